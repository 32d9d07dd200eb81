//! Ensemble learners and the named stacked pipelines.

pub mod bagging;
pub mod cbr;
pub mod stacking;

use thiserror::Error;

pub use bagging::{BaggingModel, BaggingParams, ReplicateMode};
pub use cbr::{CbrModel, CbrParams, Regressor};
pub use stacking::{
    stacked_fit_traced, Combine, EnsembleSpec, MetaInput, MetaLearner, OofFold, OofTrace, StackedModel,
};

use crate::classifiers::knn::KnnParams;
use crate::learner::LearnerSpec;

pub const PIPELINE_NAMES: [&str; 3] = ["cm1_default", "kc2_default", "pc1_default"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error("unknown pipeline {0:?} (expected one of cm1_default, kc2_default, pc1_default)")]
    UnknownPipelineName(String),
}

/// The stacked pipeline configured for a dataset.
pub fn predefined_pipeline(name: &str) -> Result<EnsembleSpec, PipelineError> {
    let knn = || LearnerSpec::Knn(KnnParams::default());
    let stage1 = match name {
        "cm1_default" => vec![LearnerSpec::ClassificationByRegression(CbrParams::default()), knn()],
        "kc2_default" | "pc1_default" => vec![LearnerSpec::Bagging(BaggingParams::default()), knn()],
        other => return Err(PipelineError::UnknownPipelineName(other.to_string())),
    };
    Ok(EnsembleSpec {
        stage1,
        combine: Combine::AverageScore,
        stage2: Some(MetaLearner {
            learner: Box::new(knn()),
            meta_input: MetaInput::FeaturesPlusScores,
        }),
        ..EnsembleSpec::default()
    })
}

/// Pipeline name for a dataset label such as `CM1` or `pc1`.
pub fn pipeline_for_dataset(dataset: &str) -> Option<&'static str> {
    let lower = dataset.to_ascii_lowercase();
    PIPELINE_NAMES.iter().copied().find(|p| p.strip_suffix("_default") == Some(lower.as_str()))
}
