//! Confusion-matrix metrics, ROC curves and model comparison reports.

mod confusion;
mod report;
mod roc;

use thiserror::Error;

pub use confusion::{confusion, f1_from, metrics, ConfusionMatrix, DegenerateFlags, Metrics};
pub use report::{
    class_name, compare_models, comparison_csv, pct, ComparisonRow, ComparisonTable, EvaluationReport,
    METRICS_CSV_HEADER,
};
pub use roc::{roc, RocCurve};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no predictions to evaluate")]
    EmptyPredictions,
    #[error("ROC needs both classes among the actual labels")]
    SingleClassActuals,
    #[error("no reports to compare")]
    NoReports,
    #[error("reports do not share dataset and protocol: {0}")]
    MismatchedReports(String),
}
