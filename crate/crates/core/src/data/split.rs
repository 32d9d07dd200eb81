//! Index-based holdout and k-fold splitting.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ClassLabel, Dataset};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitKind {
    Holdout { train_fraction: f64 },
    Kfold { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    #[serde(flatten)]
    pub kind: SplitKind,
    #[serde(default = "default_true")]
    pub stratified: bool,
    /// Overridden by the experiment seed derivation when run by the harness.
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl SplitPlan {
    pub fn kfold(k: usize, stratified: bool, seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::Kfold { k },
            stratified,
            seed,
        }
    }

    pub fn holdout(train_fraction: f64, stratified: bool, seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::Holdout { train_fraction },
            stratified,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("too few instances for folds: {detail}")]
    TooFewInstancesForFolds { detail: String },
    #[error("invalid split plan: {0}")]
    InvalidPlan(String),
}

/// Partition `dataset` per `plan`. The shuffle seed mixes the dataset checksum
/// with `plan.seed`.
pub fn make_splits(dataset: &Dataset, plan: &SplitPlan) -> Result<Vec<Split>, SplitError> {
    let seed = rng::seed_with_checksum(plan.seed, dataset.checksum());
    split_labels(&dataset.labels(), plan.kind, plan.stratified, seed)
}

/// Stratified k-fold over a bare label vector, seeded directly.
pub fn stratified_kfold(labels: &[ClassLabel], k: usize, seed: u64) -> Result<Vec<Split>, SplitError> {
    split_labels(labels, SplitKind::Kfold { k }, true, seed)
}

fn split_labels(
    labels: &[ClassLabel],
    kind: SplitKind,
    stratified: bool,
    seed: u64,
) -> Result<Vec<Split>, SplitError> {
    let mut rng = rng::seeded(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        [ClassLabel::NonDefective, ClassLabel::Defective]
            .iter()
            .map(|c| {
                let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == *c).collect();
                idx.shuffle(&mut rng);
                idx
            })
            .filter(|g| !g.is_empty())
            .collect()
    } else {
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(&mut rng);
        vec![idx]
    };

    match kind {
        SplitKind::Kfold { k } => kfold(labels.len(), &groups, k),
        SplitKind::Holdout { train_fraction } => holdout(labels.len(), &groups, train_fraction),
    }
}

fn kfold(n: usize, groups: &[Vec<usize>], k: usize) -> Result<Vec<Split>, SplitError> {
    if k < 2 {
        return Err(SplitError::InvalidPlan(format!("k must be >= 2, got {k}")));
    }
    for g in groups {
        if g.len() < k {
            return Err(SplitError::TooFewInstancesForFolds {
                detail: format!("a stratum has {} instances but k = {k}", g.len()),
            });
        }
    }
    // Deal each stratum round-robin, continuing the fold cursor across strata
    // so fold sizes stay within one of each other.
    let mut test_folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cursor = 0;
    for g in groups {
        for &i in g {
            test_folds[cursor % k].push(i);
            cursor += 1;
        }
    }
    Ok(test_folds
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..n).filter(|&i| !in_test[i]).collect();
            Split { train, test }
        })
        .collect())
}

fn holdout(n: usize, groups: &[Vec<usize>], fraction: f64) -> Result<Vec<Split>, SplitError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(SplitError::InvalidPlan(format!(
            "train_fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let total_train = (n as f64 * fraction).round() as usize;
    if total_train == 0 || total_train >= n {
        return Err(SplitError::TooFewInstancesForFolds {
            detail: format!("{n} instances cannot form a {fraction} holdout"),
        });
    }
    // Largest-remainder allocation of the train quota across strata.
    let quotas: Vec<f64> = groups.iter().map(|g| g.len() as f64 * fraction).collect();
    let mut take: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total_train - take.iter().sum::<usize>();
    for &g in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        if take[g] < groups[g].len() {
            take[g] += 1;
            missing -= 1;
        }
    }
    let mut train = Vec::with_capacity(total_train);
    let mut test = Vec::with_capacity(n - total_train);
    for (g, &t) in groups.iter().zip(&take) {
        train.extend_from_slice(&g[..t]);
        test.extend_from_slice(&g[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(vec![Split { train, test }])
}
