//! Two-stage stacking: stage-1 learners produce scores, a stage-2
//! meta-learner decides from those scores (optionally alongside the original
//! features). Without a stage 2 the stage-1 scores are combined directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::knn::KnnParams;
use crate::data::{stratified_kfold, ClassLabel, Dataset};
use crate::learner::{FitError, LearnerSpec, Scorer, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    #[default]
    AverageScore,
    MajorityVote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MetaInput {
    ScoresOnly,
    #[default]
    FeaturesPlusScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaLearner {
    pub learner: Box<LearnerSpec>,
    #[serde(default)]
    pub meta_input: MetaInput,
}

impl Default for MetaLearner {
    fn default() -> Self {
        MetaLearner {
            learner: Box::new(LearnerSpec::Knn(KnnParams::default())),
            meta_input: MetaInput::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleSpec {
    pub stage1: Vec<LearnerSpec>,
    pub combine: Combine,
    pub stage2: Option<MetaLearner>,
    /// Folds used to produce out-of-fold stage-1 scores.
    pub internal_folds: usize,
    /// Score training instances with the full stage-1 models instead.
    pub in_sample: bool,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            stage1: Vec::new(),
            combine: Combine::AverageScore,
            stage2: Some(MetaLearner::default()),
            internal_folds: 5,
            in_sample: false,
            seed: 0,
        }
    }
}

/// Which rows trained and which rows were scored in each internal fold.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OofTrace {
    pub folds: Vec<OofFold>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OofFold {
    pub train: Vec<usize>,
    pub scored: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    stage1: Vec<TrainedModel>,
    combine: Combine,
    meta: Option<Box<TrainedModel>>,
    meta_input: MetaInput,
}

impl StackedModel {
    pub fn fit(train: &Dataset, spec: &EnsembleSpec, trace: Option<&mut OofTrace>) -> Result<Self, FitError> {
        if spec.stage1.is_empty() {
            return Err(FitError::InvalidParams("stage1 must list at least one learner".into()));
        }
        if train.is_empty() {
            return Err(FitError::EmptyDataset);
        }
        let learners: Vec<LearnerSpec> = spec
            .stage1
            .iter()
            .enumerate()
            .map(|(j, l)| l.clone().with_seed(LearnerSpec::child_seed(spec.seed, "stage1", j as u64)))
            .collect();
        let stage1 = learners
            .par_iter()
            .map(|l| l.fit(train))
            .collect::<Result<Vec<_>, _>>()?;

        let Some(meta_spec) = &spec.stage2 else {
            return Ok(StackedModel {
                stage1,
                combine: spec.combine,
                meta: None,
                meta_input: MetaInput::ScoresOnly,
            });
        };

        let scores = if spec.in_sample {
            (0..train.len())
                .map(|i| stage1.iter().map(|m| m.score(train.features(i))).collect())
                .collect()
        } else {
            out_of_fold_scores(train, &learners, spec, trace)?
        };

        let rows: Vec<(Vec<f64>, ClassLabel)> = scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| (meta_vector(meta_spec.meta_input, train.features(i), &s), train.label(i)))
            .collect();
        let meta_train = Dataset::from_rows(rows, &format!("{}+meta", train.origin()))?;
        let meta = meta_spec
            .learner
            .as_ref()
            .clone()
            .with_seed(LearnerSpec::child_seed(spec.seed, "stage2", 0))
            .fit(&meta_train)?;
        Ok(StackedModel {
            stage1,
            combine: spec.combine,
            meta: Some(Box::new(meta)),
            meta_input: meta_spec.meta_input,
        })
    }

    pub fn stage1(&self) -> &[TrainedModel] {
        &self.stage1
    }

    pub fn meta(&self) -> Option<&TrainedModel> {
        self.meta.as_deref()
    }
}

/// Fit and also return the internal fold bookkeeping.
pub fn stacked_fit_traced(train: &Dataset, spec: &EnsembleSpec) -> Result<(StackedModel, OofTrace), FitError> {
    let mut trace = OofTrace::default();
    let model = StackedModel::fit(train, spec, Some(&mut trace))?;
    Ok((model, trace))
}

/// Per-instance stage-1 score vectors, each produced by models that never saw
/// the instance.
fn out_of_fold_scores(
    train: &Dataset,
    learners: &[LearnerSpec],
    spec: &EnsembleSpec,
    trace: Option<&mut OofTrace>,
) -> Result<Vec<Vec<f64>>, FitError> {
    let fold_seed = LearnerSpec::child_seed(spec.seed, "internal_folds", 0);
    let folds = stratified_kfold(&train.labels(), spec.internal_folds, fold_seed)?;
    let per_fold = folds
        .par_iter()
        .map(|f| {
            let part = train.select(&f.train, "+oof")?;
            let models = learners.iter().map(|l| l.fit(&part)).collect::<Result<Vec<_>, _>>()?;
            Ok(f
                .test
                .iter()
                .map(|&i| models.iter().map(|m| m.score(train.features(i))).collect::<Vec<f64>>())
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, FitError>>()?;

    let mut scores = vec![Vec::new(); train.len()];
    for (f, fold_scores) in folds.iter().zip(per_fold) {
        for (&i, s) in f.test.iter().zip(fold_scores) {
            scores[i] = s;
        }
    }
    if let Some(t) = trace {
        t.folds = folds
            .into_iter()
            .map(|f| OofFold {
                train: f.train,
                scored: f.test,
            })
            .collect();
    }
    Ok(scores)
}

fn meta_vector(mode: MetaInput, features: &[f64], scores: &[f64]) -> Vec<f64> {
    match mode {
        MetaInput::ScoresOnly => scores.to_vec(),
        MetaInput::FeaturesPlusScores => features.iter().chain(scores).copied().collect(),
    }
}

impl Scorer for StackedModel {
    fn score(&self, features: &[f64]) -> f64 {
        let scores = self.stage1.iter().map(|m| m.score(features));
        match &self.meta {
            Some(meta) => meta.score(&meta_vector(self.meta_input, features, &scores.collect::<Vec<_>>())),
            None => {
                let n = self.stage1.len() as f64;
                match self.combine {
                    // Shift each score so its own threshold lands on 0.5.
                    Combine::AverageScore => {
                        self.stage1
                            .iter()
                            .zip(scores)
                            .map(|(m, s)| s - m.threshold() + 0.5)
                            .sum::<f64>()
                            / n
                    }
                    Combine::MajorityVote => {
                        self.stage1
                            .iter()
                            .zip(scores)
                            .filter(|(m, s)| *s >= m.threshold())
                            .count() as f64
                            / n
                    }
                }
            }
        }
    }

    fn threshold(&self) -> f64 {
        match &self.meta {
            Some(m) => m.threshold(),
            None => 0.5,
        }
    }
}
