//! Classification by regression: regress the +1/-1 coded label on the
//! features and classify by the sign of the fitted value.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classifiers::knn::TIE_TO_NON_DEFECTIVE;
use crate::classifiers::scaling::Standardizer;
use crate::classifiers::tree::{Impurity, Tree, TreeBuilder, TreeParams};
use crate::data::Dataset;
use crate::learner::{logistic, require_both_classes, FitError, Scorer};

const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Regressor {
    /// Least squares over standardized features plus an intercept.
    #[default]
    Ols,
    RegressionTree(TreeParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct CbrParams {
    pub regressor: Regressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Fitted {
    Linear {
        scaler: Standardizer,
        coef: Vec<f64>,
        intercept: f64,
    },
    Tree(Tree),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbrModel {
    params: CbrParams,
    fitted: Fitted,
}

fn target(defective: bool) -> f64 {
    if defective {
        1.0
    } else {
        -1.0
    }
}

impl CbrModel {
    pub fn fit(train: &Dataset, params: &CbrParams) -> Result<Self, FitError> {
        require_both_classes(train)?;
        let y: Vec<f64> = train.instances().iter().map(|i| target(i.label.is_defective())).collect();
        let fitted = match params.regressor {
            Regressor::Ols => fit_ols(train, &y)?,
            Regressor::RegressionTree(tp) => {
                let x: Vec<f64> = train.instances().iter().flat_map(|i| i.features.iter().copied()).collect();
                let tree = TreeBuilder::new(&x, &y, train.n_features(), tp, Impurity::SquaredError)
                    .build((0..train.len()).collect());
                Fitted::Tree(tree)
            }
        };
        Ok(CbrModel {
            params: *params,
            fitted,
        })
    }

    /// Fitted regression value before the logistic map.
    pub fn raw(&self, x: &[f64]) -> f64 {
        match &self.fitted {
            Fitted::Linear { scaler, coef, intercept } => {
                scaler.transform(x).iter().zip(coef).map(|(a, b)| a * b).sum::<f64>() + intercept
            }
            Fitted::Tree(t) => {
                let (sum, count) = t.leaf(x);
                sum / count as f64
            }
        }
    }
}

fn fit_ols(train: &Dataset, y: &[f64]) -> Result<Fitted, FitError> {
    let scaler = Standardizer::fit(train);
    let (n, p) = (train.len(), train.n_features());
    let mut x = DMatrix::<f64>::zeros(n, p + 1);
    for (r, inst) in train.instances().iter().enumerate() {
        for (c, v) in scaler.transform(&inst.features).into_iter().enumerate() {
            x[(r, c)] = v;
        }
        x[(r, p)] = 1.0;
    }
    let mut gram = x.transpose() * &x;
    for d in 0..=p {
        gram[(d, d)] += RIDGE;
    }
    let rhs = x.transpose() * DVector::from_column_slice(y);
    let beta = gram
        .cholesky()
        .ok_or_else(|| FitError::Numerical("normal equations are not positive definite".into()))?
        .solve(&rhs);
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(FitError::Numerical("least-squares solution is not finite".into()));
    }
    Ok(Fitted::Linear {
        scaler,
        coef: beta.rows(0, p).iter().copied().collect(),
        intercept: beta[p],
    })
}

impl Scorer for CbrModel {
    fn score(&self, features: &[f64]) -> f64 {
        let raw = self.raw(features);
        let s = logistic(raw);
        // keep the label tied to the sign of the raw output when the
        // logistic map rounds to exactly one half
        if raw < 0.0 && s >= 0.5 {
            TIE_TO_NON_DEFECTIVE
        } else {
            s
        }
    }

    fn threshold(&self) -> f64 {
        0.5
    }
}
