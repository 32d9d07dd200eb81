//! Bootstrap aggregation around any inner learner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::knn::KnnParams;
use crate::data::Dataset;
use crate::learner::{FitError, LearnerSpec, Scorer, TrainedModel};
use crate::resample::bootstrap_indices;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReplicateMode {
    #[default]
    Bootstrap,
    /// Every round sees the unmodified training set. Useful in tests.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaggingParams {
    pub n_rounds: usize,
    pub inner: Box<LearnerSpec>,
    pub replicate: ReplicateMode,
    pub seed: u64,
}

impl Default for BaggingParams {
    fn default() -> Self {
        BaggingParams {
            n_rounds: 10,
            inner: Box::new(LearnerSpec::Knn(KnnParams::default())),
            replicate: ReplicateMode::Bootstrap,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    rounds: Vec<TrainedModel>,
}

impl BaggingModel {
    pub fn fit(train: &Dataset, params: &BaggingParams) -> Result<Self, FitError> {
        if train.is_empty() {
            return Err(FitError::EmptyDataset);
        }
        if params.n_rounds == 0 {
            return Err(FitError::InvalidParams("n_rounds must be positive".into()));
        }
        let n = train.len();
        let rounds = (0..params.n_rounds)
            .into_par_iter()
            .map(|r| {
                let seed = LearnerSpec::child_seed(params.seed, "bagging", r as u64);
                let inner = params.inner.as_ref().clone().with_seed(seed);
                match params.replicate {
                    ReplicateMode::Identity => inner.fit(train),
                    ReplicateMode::Bootstrap => {
                        let idx = bootstrap_indices(n, n, seed);
                        inner.fit(&train.select(&idx, "+bag")?)
                    }
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BaggingModel { rounds })
    }

    pub fn rounds(&self) -> &[TrainedModel] {
        &self.rounds
    }
}

impl Scorer for BaggingModel {
    fn score(&self, features: &[f64]) -> f64 {
        self.rounds.iter().map(|m| m.score(features)).sum::<f64>() / self.rounds.len() as f64
    }

    fn threshold(&self) -> f64 {
        self.rounds[0].threshold()
    }
}
