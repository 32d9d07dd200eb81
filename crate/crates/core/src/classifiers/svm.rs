//! Linear SVM trained with Pegasos-style sub-gradient descent on the primal
//! hinge loss. The bias is an extra constant feature.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::scaling::Standardizer;
use crate::data::Dataset;
use crate::learner::{require_both_classes, FitError, Scorer};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-2,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    params: SvmParams,
    scaler: Standardizer,
    weights: Vec<f64>,
    bias: f64,
}

impl SvmModel {
    pub fn fit(train: &Dataset, params: &SvmParams) -> Result<Self, FitError> {
        require_both_classes(train)?;
        if !(params.lambda > 0.0 && params.lambda.is_finite()) || params.epochs == 0 {
            return Err(FitError::InvalidParams("svm needs lambda > 0 and epochs > 0".into()));
        }
        let scaler = Standardizer::fit(train);
        let p = train.n_features();
        let rows: Vec<Vec<f64>> = train
            .instances()
            .iter()
            .map(|i| {
                let mut z = scaler.transform(&i.features);
                z.push(1.0);
                z
            })
            .collect();
        let y: Vec<f64> = train
            .instances()
            .iter()
            .map(|i| if i.label.is_defective() { 1.0 } else { -1.0 })
            .collect();

        let lambda = params.lambda;
        let mut w = vec![0.0; p + 1];
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut rng = rng::seeded(params.seed);
        let mut t = 0u64;
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let margin = y[i] * dot(&w, &rows[i]);
                let shrink = 1.0 - eta * lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    for (v, x) in w.iter_mut().zip(&rows[i]) {
                        *v += eta * y[i] * x;
                    }
                }
            }
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(FitError::Numerical("svm weights diverged".into()));
        }
        let bias = w.pop().expect("bias slot");
        Ok(SvmModel {
            params: *params,
            scaler,
            weights: w,
            bias,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Scorer for SvmModel {
    /// Signed margin in standardized space.
    fn score(&self, features: &[f64]) -> f64 {
        dot(&self.weights, &self.scaler.transform(features)) + self.bias
    }

    fn threshold(&self) -> f64 {
        0.0
    }
}
