//! Random forest of CART trees with per-split feature subsampling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{design, leaf_probability, Impurity, TreeBuilder, TreeModel, TreeParams};
use crate::data::Dataset;
use crate::learner::{FitError, Scorer};
use crate::resample::bootstrap_indices;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Defaults to ceil(sqrt(feature count)).
    pub features_per_split: Option<usize>,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            features_per_split: None,
            tree: TreeParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    params: ForestParams,
    trees: Vec<TreeModel>,
}

pub(crate) fn sqrt_features(p: usize) -> usize {
    (p as f64).sqrt().ceil() as usize
}

impl ForestModel {
    pub fn fit(train: &Dataset, params: &ForestParams) -> Result<Self, FitError> {
        if train.is_empty() {
            return Err(FitError::EmptyDataset);
        }
        if params.n_trees == 0 {
            return Err(FitError::InvalidParams("n_trees must be positive".into()));
        }
        let p = train.n_features();
        let m = params.features_per_split.unwrap_or_else(|| sqrt_features(p));
        if m == 0 || m > p {
            return Err(FitError::InvalidParams(format!("features_per_split {m} outside 1..={p}")));
        }
        let (x, y) = design(train);
        let n = train.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let seed = rng::derive_seed(params.seed, t as u64);
                let rows = if params.bootstrap {
                    bootstrap_indices(n, n, rng::derive_seed_str(seed, "bootstrap"))
                } else {
                    (0..n).collect()
                };
                let tree = TreeBuilder::new(&x, &y, p, params.tree, Impurity::Gini)
                    .random_features(m, rng::derive_seed_str(seed, "features"))
                    .build(rows);
                TreeModel::from_tree(params.tree, tree)
            })
            .collect();
        Ok(ForestModel {
            params: *params,
            trees,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

pub(crate) fn mean_score(scores: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = scores.len() as f64;
    scores.sum::<f64>() / n
}

impl Scorer for ForestModel {
    fn score(&self, features: &[f64]) -> f64 {
        mean_score(self.trees.iter().map(|t| {
            let (sum, count) = t.tree().leaf(features);
            leaf_probability(sum, count)
        }))
    }

    fn threshold(&self) -> f64 {
        0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ClassLabel::*;

    fn noisy(n: usize) -> Dataset {
        let rows = (0..n)
            .map(|i| {
                let a = (i as f64 * 0.71).sin();
                let b = (i as f64 * 0.13).cos();
                let c = (i * 7 % 11) as f64;
                (vec![a, b, c], if a * b + 0.05 * c > 0.2 { Defective } else { NonDefective })
            })
            .collect();
        Dataset::from_rows(rows, "n").unwrap()
    }

    #[test]
    fn degenerate_forest_is_a_tree() {
        let d = noisy(60);
        let f = ForestModel::fit(
            &d,
            &ForestParams {
                n_trees: 1,
                bootstrap: false,
                features_per_split: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        let t = TreeModel::fit(&d, &TreeParams::default()).unwrap();
        for i in 0..30 {
            let q = [i as f64 * 0.1 - 1.0, 0.3, (i % 11) as f64];
            assert_eq!(f.score(&q), t.score(&q));
        }
    }

    #[test]
    fn seeded_determinism() {
        let d = noisy(80);
        let params = ForestParams {
            n_trees: 15,
            seed: 4,
            ..Default::default()
        };
        let a = ForestModel::fit(&d, &params).unwrap();
        let b = ForestModel::fit(&d, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(sqrt_features(21), 5);
    }

    #[test]
    fn mean_of_votes() {
        let s = mean_score([0.9, 0.8, 0.1].into_iter());
        assert!((s - 0.6).abs() < 1e-15);
        assert!(s >= 0.5);
    }
}
