//! Bootstrap resampling and class balancing.
//!
//! Balancing only ever repeats existing rows; no feature value is
//! synthesized.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ClassLabel, Dataset, IngestError};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum BalanceStrategy {
    /// Up-sample the minority class with replacement until it matches the
    /// majority count.
    #[default]
    BalanceToMajority,
    /// Up-sample the minority class until it makes up at least
    /// `target_minority_fraction` of the output.
    Ratio { target_minority_fraction: f64 },
    /// Sensitivity option: sample the majority class down to the minority
    /// count, without replacement.
    DownsampleMajority,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleSpec {
    #[serde(flatten)]
    pub strategy: BalanceStrategy,
    /// Number of independent repetitions the harness averages over.
    #[serde(default = "default_observations")]
    pub observations_param: u32,
    /// Overridden by the experiment seed derivation when run by the harness.
    #[serde(default)]
    pub seed: u64,
}

fn default_observations() -> u32 {
    7
}

impl Default for ResampleSpec {
    fn default() -> Self {
        ResampleSpec {
            strategy: BalanceStrategy::BalanceToMajority,
            observations_param: default_observations(),
            seed: 0,
        }
    }
}

impl ResampleSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Error)]
pub enum ResampleError {
    #[error("cannot resample an empty dataset")]
    EmptyDataset,
    #[error("dataset contains a single class; balancing needs both")]
    SingleClassDataset,
    #[error("invalid resample spec: {0}")]
    InvalidSpec(String),
    #[error("train and test schemas differ")]
    SchemaMismatch,
    #[error(transparent)]
    Dataset(#[from] IngestError),
}

/// `size` indices drawn uniformly with replacement from `0..n`.
pub fn bootstrap_indices(n: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::seeded(seed);
    (0..size).map(|_| rng.random_range(0..n)).collect()
}

pub fn bootstrap_sample(dataset: &Dataset, size: usize, seed: u64) -> Result<Dataset, ResampleError> {
    if dataset.is_empty() {
        return Err(ResampleError::EmptyDataset);
    }
    let idx = bootstrap_indices(dataset.len(), size, seed);
    Ok(dataset.select(&idx, "+bootstrap")?)
}

/// Indices into `dataset` forming the balanced sample, in shuffled order.
/// Every original row of the up-sampled class appears at least once.
pub fn balance_indices(dataset: &Dataset, spec: &ResampleSpec) -> Result<Vec<usize>, ResampleError> {
    let (defective, clean): (Vec<usize>, Vec<usize>) =
        (0..dataset.len()).partition(|&i| dataset.label(i) == ClassLabel::Defective);
    if defective.is_empty() || clean.is_empty() {
        return Err(ResampleError::SingleClassDataset);
    }
    let (minority, majority) = if defective.len() <= clean.len() {
        (defective, clean)
    } else {
        (clean, defective)
    };
    let mut rng = rng::seeded(rng::seed_with_checksum(spec.seed, dataset.checksum()));

    let mut out: Vec<usize> = match spec.strategy {
        BalanceStrategy::BalanceToMajority => upsample(&minority, &majority, majority.len(), &mut rng),
        BalanceStrategy::Ratio {
            target_minority_fraction: t,
        } => {
            if !(t > 0.0 && t <= 0.5) {
                return Err(ResampleError::InvalidSpec(format!(
                    "target_minority_fraction must lie in (0, 0.5], got {t}"
                )));
            }
            let target = (t * majority.len() as f64 / (1.0 - t)).ceil() as usize;
            upsample(&minority, &majority, target.max(minority.len()), &mut rng)
        }
        BalanceStrategy::DownsampleMajority => {
            let mut kept: Vec<usize> = majority
                .choose_multiple(&mut rng, minority.len())
                .copied()
                .collect();
            kept.extend_from_slice(&minority);
            kept
        }
    };
    out.shuffle(&mut rng);
    Ok(out)
}

fn upsample(minority: &[usize], majority: &[usize], target: usize, rng: &mut rng::Rng) -> Vec<usize> {
    let mut out = Vec::with_capacity(majority.len() + target);
    out.extend_from_slice(majority);
    out.extend_from_slice(minority);
    for _ in minority.len()..target {
        out.push(minority[rng.random_range(0..minority.len())]);
    }
    out
}

pub fn balance_classes(dataset: &Dataset, spec: &ResampleSpec) -> Result<Dataset, ResampleError> {
    let idx = balance_indices(dataset, spec)?;
    Ok(dataset.select(&idx, "+balanced")?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakageReport {
    pub duplicate_count: usize,
    pub duplicate_fraction_of_test: f64,
}

fn vector_key(v: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 compare equal, so key them identically.
    v.iter().map(|x| if *x == 0.0 { 0 } else { x.to_bits() }).collect()
}

/// Count test instances whose exact feature vector also occurs in `train`.
pub fn leakage_audit(train: &Dataset, test: &Dataset) -> Result<LeakageReport, ResampleError> {
    if train.schema().len() != test.schema().len() {
        return Err(ResampleError::SchemaMismatch);
    }
    let seen: HashSet<Vec<u64>> = train.instances().iter().map(|i| vector_key(&i.features)).collect();
    let duplicate_count = test
        .instances()
        .iter()
        .filter(|i| seen.contains(&vector_key(&i.features)))
        .count();
    Ok(LeakageReport {
        duplicate_count,
        duplicate_fraction_of_test: duplicate_count as f64 / test.len() as f64,
    })
}

/// Count test rows whose source row (before resampling) also feeds the
/// training side. This isolates duplicates created by resampling from
/// duplicates already present in the raw data.
pub fn provenance_overlap(train_sources: &[usize], test_sources: &[usize]) -> usize {
    let seen: HashSet<usize> = train_sources.iter().copied().collect();
    test_sources.iter().filter(|s| seen.contains(s)).count()
}
