//! Base classifiers. Each fits on a [`Dataset`](crate::data::Dataset) and
//! implements [`Scorer`](crate::learner::Scorer).

pub mod forest;
pub mod knn;
pub mod naive_bayes;
pub mod scaling;
pub mod svm;
pub mod tree;

pub use forest::{ForestModel, ForestParams};
pub use knn::{KnnModel, KnnParams, Weighting};
pub use naive_bayes::GaussianNbModel;
pub use scaling::Standardizer;
pub use svm::{SvmModel, SvmParams};
pub use tree::{TreeModel, TreeParams};
