//! The uniform fitted-model contract shared by base classifiers and
//! ensembles.
//!
//! A [`LearnerSpec`] is declarative (serializable hyperparameters); fitting it
//! on a [`Dataset`] yields a [`TrainedModel`] whose `predict` returns a label
//! and a defect-confidence score, with `label == Defective` exactly when
//! `score >= threshold()`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{
    forest::{ForestModel, ForestParams},
    knn::{KnnModel, KnnParams},
    naive_bayes::GaussianNbModel,
    svm::{SvmModel, SvmParams},
    tree::{TreeModel, TreeParams},
};
use crate::data::{ClassLabel, Dataset, IngestError, SplitError};
use crate::ensembles::{
    bagging::{BaggingModel, BaggingParams},
    cbr::{CbrModel, CbrParams},
    stacking::{EnsembleSpec, StackedModel},
};
use crate::rng;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training set contains a single class")]
    SingleClassDataset,
    #[error("k = {k} exceeds the {n} training instances")]
    KTooLarge { k: usize, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("internal stacking folds cannot be formed: {0}")]
    FoldTooSmall(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Dataset(#[from] IngestError),
}

impl From<SplitError> for FitError {
    fn from(e: SplitError) -> Self {
        FitError::FoldTooSmall(e.to_string())
    }
}

/// Declarative learner description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Knn(KnnParams),
    NaiveBayes,
    DecisionTree(TreeParams),
    Svm(SvmParams),
    RandomForest(ForestParams),
    ClassificationByRegression(CbrParams),
    Bagging(BaggingParams),
    Stacked(EnsembleSpec),
}

impl LearnerSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LearnerSpec::Knn(_) => "knn",
            LearnerSpec::NaiveBayes => "naive_bayes",
            LearnerSpec::DecisionTree(_) => "decision_tree",
            LearnerSpec::Svm(_) => "svm",
            LearnerSpec::RandomForest(_) => "random_forest",
            LearnerSpec::ClassificationByRegression(_) => "classification_by_regression",
            LearnerSpec::Bagging(_) => "bagging",
            LearnerSpec::Stacked(_) => "stacked",
        }
    }

    /// Default-parameter learner for a base model name.
    pub fn by_name(name: &str) -> Option<LearnerSpec> {
        Some(match name {
            "knn" => LearnerSpec::Knn(KnnParams::default()),
            "naive_bayes" | "gnb" => LearnerSpec::NaiveBayes,
            "decision_tree" | "tree" => LearnerSpec::DecisionTree(TreeParams::default()),
            "svm" => LearnerSpec::Svm(SvmParams::default()),
            "random_forest" | "forest" => LearnerSpec::RandomForest(ForestParams::default()),
            "classification_by_regression" | "cbr" => {
                LearnerSpec::ClassificationByRegression(CbrParams::default())
            }
            "bagging" => LearnerSpec::Bagging(BaggingParams::default()),
            _ => return None,
        })
    }

    /// Replace every seed in the spec tree with one derived from `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            LearnerSpec::Svm(p) => p.seed = seed,
            LearnerSpec::RandomForest(p) => p.seed = seed,
            LearnerSpec::Bagging(p) => p.seed = seed,
            LearnerSpec::Stacked(p) => p.seed = seed,
            LearnerSpec::Knn(_)
            | LearnerSpec::NaiveBayes
            | LearnerSpec::DecisionTree(_)
            | LearnerSpec::ClassificationByRegression(_) => {}
        }
        self
    }

    /// Apply `f` to every KNN parameter block in the tree (including those
    /// nested inside ensembles).
    pub fn map_knn(&mut self, f: &mut dyn FnMut(&mut KnnParams)) {
        match self {
            LearnerSpec::Knn(p) => f(p),
            LearnerSpec::Bagging(p) => p.inner.map_knn(f),
            LearnerSpec::Stacked(s) => {
                for l in &mut s.stage1 {
                    l.map_knn(f);
                }
                if let Some(meta) = &mut s.stage2 {
                    meta.learner.map_knn(f);
                }
            }
            _ => {}
        }
    }

    /// Apply `f` to every ensemble spec in the tree.
    pub fn map_ensembles(&mut self, f: &mut dyn FnMut(&mut EnsembleSpec)) {
        match self {
            LearnerSpec::Bagging(p) => p.inner.map_ensembles(f),
            LearnerSpec::Stacked(s) => {
                f(s);
                for l in &mut s.stage1 {
                    l.map_ensembles(f);
                }
            }
            _ => {}
        }
    }

    pub fn fit(&self, train: &Dataset) -> Result<TrainedModel, FitError> {
        if train.is_empty() {
            return Err(FitError::EmptyDataset);
        }
        let model = match self {
            LearnerSpec::Knn(p) => FittedModel::Knn(KnnModel::fit(train, p)?),
            LearnerSpec::NaiveBayes => FittedModel::NaiveBayes(GaussianNbModel::fit(train)?),
            LearnerSpec::DecisionTree(p) => FittedModel::DecisionTree(TreeModel::fit(train, p)?),
            LearnerSpec::Svm(p) => FittedModel::Svm(SvmModel::fit(train, p)?),
            LearnerSpec::RandomForest(p) => FittedModel::RandomForest(ForestModel::fit(train, p)?),
            LearnerSpec::ClassificationByRegression(p) => {
                FittedModel::ClassificationByRegression(CbrModel::fit(train, p)?)
            }
            LearnerSpec::Bagging(p) => FittedModel::Bagging(BaggingModel::fit(train, p)?),
            LearnerSpec::Stacked(s) => FittedModel::Stacked(StackedModel::fit(train, s, None)?),
        };
        Ok(TrainedModel::from_parts(self.clone(), train, model))
    }

    /// Short stable hash of the serialized spec, for labelling report rows.
    pub fn spec_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        crate::data::sha256_hex(&json)[..16].to_string()
    }

    pub(crate) fn child_seed(parent: u64, tag: &str, index: u64) -> u64 {
        rng::derive_seed(rng::derive_seed_str(parent, tag), index)
    }
}

/// Scoring behaviour common to every fitted model.
pub trait Scorer {
    /// Defect-confidence score; higher means more likely defective.
    fn score(&self, features: &[f64]) -> f64;
    /// Decision threshold on `score`.
    fn threshold(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Knn(KnnModel),
    NaiveBayes(GaussianNbModel),
    DecisionTree(TreeModel),
    Svm(SvmModel),
    RandomForest(ForestModel),
    ClassificationByRegression(CbrModel),
    Bagging(BaggingModel),
    Stacked(StackedModel),
}

impl FittedModel {
    fn scorer(&self) -> &dyn Scorer {
        match self {
            FittedModel::Knn(m) => m,
            FittedModel::NaiveBayes(m) => m,
            FittedModel::DecisionTree(m) => m,
            FittedModel::Svm(m) => m,
            FittedModel::RandomForest(m) => m,
            FittedModel::ClassificationByRegression(m) => m,
            FittedModel::Bagging(m) => m,
            FittedModel::Stacked(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: ClassLabel,
    pub score: f64,
}

/// A fitted model plus the hyperparameters and training provenance that
/// produced it. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: LearnerSpec,
    pub training_size: usize,
    pub training_checksum: String,
    pub model: FittedModel,
}

impl TrainedModel {
    pub(crate) fn from_parts(spec: LearnerSpec, train: &Dataset, model: FittedModel) -> Self {
        TrainedModel {
            spec,
            training_size: train.len(),
            training_checksum: train.checksum().to_string(),
            model,
        }
    }

    pub fn kind(&self) -> &'static str {
        self.spec.kind_name()
    }

    pub fn score(&self, features: &[f64]) -> f64 {
        self.model.scorer().score(features)
    }

    pub fn threshold(&self) -> f64 {
        self.model.scorer().threshold()
    }

    pub fn predict(&self, features: &[f64]) -> Prediction {
        let score = self.score(features);
        let label = if score >= self.threshold() {
            ClassLabel::Defective
        } else {
            ClassLabel::NonDefective
        };
        Prediction { label, score }
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Vec<Prediction> {
        data.instances().iter().map(|i| self.predict(&i.features)).collect()
    }
}

/// Versioned on-disk envelope for a [`TrainedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub model: TrainedModel,
}

pub const ARTIFACT_FORMAT: &str = "defectlab-model";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("artifact is not a {ARTIFACT_FORMAT} file (format {0:?})")]
    WrongFormat(String),
    #[error("unsupported artifact version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl TrainedModel {
    pub fn to_artifact_json(&self) -> String {
        serde_json::to_string(&ModelArtifact {
            format: ARTIFACT_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_artifact_json(text: &str) -> Result<Self, ArtifactError> {
        let a: ModelArtifact = serde_json::from_str(text)?;
        if a.format != ARTIFACT_FORMAT {
            return Err(ArtifactError::WrongFormat(a.format));
        }
        if a.version != ARTIFACT_VERSION {
            return Err(ArtifactError::UnsupportedVersion(a.version));
        }
        Ok(a.model)
    }
}

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Both-classes precondition shared by several learners.
pub(crate) fn require_both_classes(train: &Dataset) -> Result<(), FitError> {
    let (d, n) = train.class_counts();
    if d == 0 || n == 0 {
        return Err(FitError::SingleClassDataset);
    }
    Ok(())
}
