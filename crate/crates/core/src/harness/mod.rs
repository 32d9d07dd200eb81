//! Configuration-driven experiments: protocols, repeated cross-validation,
//! report files, and reproduction of the published comparison tables.

mod config;
mod experiment;
mod info;
mod reproduce;

use thiserror::Error;

pub use config::{Balance, DatasetRef, ExperimentConfig, ModelEntry, Protocol, ResolvedModel};
pub use experiment::{
    leakage_csv, load_checked, prepare_folds, run_experiment, ExperimentOutcome, FoldData, FoldLeakage, FoldRow,
    ModelOutcome,
};
pub use info::{audit_leakage, dataset_info, DatasetInfo};
pub use reproduce::{
    reproduce_tables, ReproduceOptions, ReproduceOutcome, SummaryRow, TargetCell, Targets, ACCURACY_BAND_PP,
    DEFAULT_DATASETS, KNN_MATCH_PP, TABLE_MODELS,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invariant(String),
}

impl HarnessError {
    /// Process exit code: 2 configuration, 3 data or I/O, 4 internal
    /// invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) | HarnessError::Io(_) => 3,
            HarnessError::Invariant(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Data(_) => "data",
            HarnessError::Io(_) => "io",
            HarnessError::Invariant(_) => "invariant",
        }
    }

    /// Single-line `error[kind]: message` diagnostic.
    pub fn diagnostic(&self) -> String {
        format!("error[{}]: {}", self.kind(), config::one_line(&self.to_string()))
    }
}
