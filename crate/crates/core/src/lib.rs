//! Defect-prediction toolkit for PROMISE software-metric datasets: ingestion,
//! class rebalancing, base classifiers, stacked ensembles, evaluation and an
//! experiment harness.

pub mod classifiers;
pub mod data;
pub mod ensembles;
pub mod eval;
pub mod harness;
pub mod learner;
pub mod resample;
pub mod rng;

pub use data::{load_dataset, ClassLabel, Dataset, FeatureSchema, IngestError, IngestOptions, Instance};
pub use ensembles::{predefined_pipeline, EnsembleSpec};
pub use eval::{ConfusionMatrix, EvaluationReport, Metrics, RocCurve};
pub use learner::{FitError, LearnerSpec, Prediction, Scorer, TrainedModel};
pub use resample::{balance_classes, BalanceStrategy, LeakageReport, ResampleSpec};
