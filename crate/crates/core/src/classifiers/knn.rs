//! Brute-force k-nearest neighbours over Euclidean distance.

use serde::{Deserialize, Serialize};

use super::scaling::Standardizer;
use crate::data::Dataset;
use crate::learner::{FitError, Scorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
    pub weighting: Weighting,
    /// z-score features with training statistics before measuring distance.
    pub standardize: bool,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: 5,
            weighting: Weighting::Uniform,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    params: KnnParams,
    n_features: usize,
    /// Row-major training matrix (standardized when `params.standardize`).
    points: Vec<f64>,
    defective: Vec<bool>,
    scaler: Option<Standardizer>,
}

/// Largest `f64` strictly below 0.5: the score reported when a vote tie is
/// resolved toward NonDefective, so that `score >= 0.5` still decides the
/// label.
pub(crate) const TIE_TO_NON_DEFECTIVE: f64 = 0.499_999_999_999_999_94;

impl KnnModel {
    pub fn fit(train: &Dataset, params: &KnnParams) -> Result<Self, FitError> {
        if params.k == 0 {
            return Err(FitError::InvalidParams("k must be positive".into()));
        }
        if params.k > train.len() {
            return Err(FitError::KTooLarge {
                k: params.k,
                n: train.len(),
            });
        }
        let scaler = params.standardize.then(|| Standardizer::fit(train));
        let p = train.n_features();
        let mut points = Vec::with_capacity(train.len() * p);
        for inst in train.instances() {
            match &scaler {
                Some(s) => points.extend(s.transform(&inst.features)),
                None => points.extend_from_slice(&inst.features),
            }
        }
        Ok(KnnModel {
            params: *params,
            n_features: p,
            points,
            defective: train.instances().iter().map(|i| i.label.is_defective()).collect(),
            scaler,
        })
    }

    pub fn params(&self) -> &KnnParams {
        &self.params
    }

    /// The k nearest training rows as `(distance, index)`, nearest first.
    /// Equal distances are ordered by training index.
    pub fn neighbors(&self, query: &[f64]) -> Vec<(f64, usize)> {
        let q: Vec<f64> = match &self.scaler {
            Some(s) => s.transform(query),
            None => query.to_vec(),
        };
        let mut d2: Vec<(f64, usize)> = self
            .points
            .chunks_exact(self.n_features)
            .enumerate()
            .map(|(i, row)| {
                let s: f64 = row.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        let k = self.params.k;
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d2.len() {
            d2.select_nth_unstable_by(k - 1, cmp);
            d2.truncate(k);
        }
        d2.sort_unstable_by(cmp);
        d2.into_iter().map(|(s, i)| (s.sqrt(), i)).collect()
    }
}

impl Scorer for KnnModel {
    /// Fraction of the k neighbours that are defective (weighted by inverse
    /// distance when configured). Exact ties go to the class whose neighbours
    /// have the smaller summed distance, then to NonDefective.
    fn score(&self, features: &[f64]) -> f64 {
        let nn = self.neighbors(features);
        let (mut w_def, mut w_all) = (0.0, 0.0);
        match self.params.weighting {
            Weighting::Uniform => {
                for &(_, i) in &nn {
                    w_all += 1.0;
                    if self.defective[i] {
                        w_def += 1.0;
                    }
                }
            }
            Weighting::InverseDistance => {
                let exact = nn.iter().any(|(d, _)| *d == 0.0);
                for &(d, i) in &nn {
                    let w = if exact {
                        if d == 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        1.0 / d
                    };
                    w_all += w;
                    if self.defective[i] {
                        w_def += w;
                    }
                }
            }
        }
        let score = w_def / w_all;
        if score != 0.5 {
            return score;
        }
        let (sum_def, sum_non) = nn.iter().fold((0.0, 0.0), |(a, b), &(d, i)| {
            if self.defective[i] {
                (a + d, b)
            } else {
                (a, b + d)
            }
        });
        if sum_def < sum_non {
            0.5
        } else {
            TIE_TO_NON_DEFECTIVE
        }
    }

    fn threshold(&self) -> f64 {
        0.5
    }
}
