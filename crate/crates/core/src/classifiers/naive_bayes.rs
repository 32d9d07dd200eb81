//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::learner::{logistic, require_both_classes, FitError, Scorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassStats {
    log_prior: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    defective: ClassStats,
    non_defective: ClassStats,
}

const VAR_FLOOR_FACTOR: f64 = 1e-9;

impl GaussianNbModel {
    pub fn fit(train: &Dataset) -> Result<Self, FitError> {
        require_both_classes(train)?;
        let global = moments(train.instances().iter().map(|i| i.features.as_slice()), train.n_features());
        let floors: Vec<f64> = global
            .1
            .iter()
            .map(|v| VAR_FLOOR_FACTOR * (v + 1e-12))
            .collect();
        let n = train.len() as f64;
        let stats = |want_defective: bool| {
            let rows: Vec<&[f64]> = train
                .instances()
                .iter()
                .filter(|i| i.label.is_defective() == want_defective)
                .map(|i| i.features.as_slice())
                .collect();
            let count = rows.len() as f64;
            let (mean, var) = moments(rows.into_iter(), train.n_features());
            ClassStats {
                log_prior: (count / n).ln(),
                mean,
                var: var.iter().zip(&floors).map(|(v, f)| v.max(*f)).collect(),
            }
        };
        Ok(GaussianNbModel {
            defective: stats(true),
            non_defective: stats(false),
        })
    }

    /// log P(Defective | x) - log P(NonDefective | x).
    pub fn log_odds(&self, x: &[f64]) -> f64 {
        log_joint(&self.defective, x) - log_joint(&self.non_defective, x)
    }
}

/// Per-feature mean and population variance.
fn moments<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut n = 0.0;
    let mut mean = vec![0.0; p];
    for r in rows.clone() {
        n += 1.0;
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; p];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

fn log_joint(c: &ClassStats, x: &[f64]) -> f64 {
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    c.log_prior
        + x.iter()
            .zip(&c.mean)
            .zip(&c.var)
            .map(|((v, m), s2)| -0.5 * (ln_2pi + s2.ln() + (v - m) * (v - m) / s2))
            .sum::<f64>()
}

impl Scorer for GaussianNbModel {
    fn score(&self, features: &[f64]) -> f64 {
        logistic(self.log_odds(features))
    }

    fn threshold(&self) -> f64 {
        0.5
    }
}
