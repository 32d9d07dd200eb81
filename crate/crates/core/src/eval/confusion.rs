use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::data::ClassLabel;

/// Counts at a fixed choice of positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub positive_class: ClassLabel,
}

impl ConfusionMatrix {
    pub fn empty(positive_class: ClassLabel) -> Self {
        ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: 0,
            positive_class,
        }
    }

    pub fn record(&mut self, predicted: ClassLabel, actual: ClassLabel) {
        let p = self.positive_class;
        match (predicted == p, actual == p) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts read with the other class as positive.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
            positive_class: self.positive_class.other(),
        }
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        let o = if other.positive_class == self.positive_class {
            *other
        } else {
            other.swapped()
        };
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

/// Tally `(predicted, actual)` pairs.
pub fn confusion(pairs: &[(ClassLabel, ClassLabel)], positive_class: ClassLabel) -> Result<ConfusionMatrix, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    let mut cm = ConfusionMatrix::empty(positive_class);
    for &(p, a) in pairs {
        cm.record(p, a);
    }
    Ok(cm)
}

/// Set when a ratio's denominator was zero and the value defaulted to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DegenerateFlags {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl DegenerateFlags {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }

    pub fn union(self, o: DegenerateFlags) -> Self {
        DegenerateFlags {
            precision: self.precision || o.precision,
            recall: self.recall || o.recall,
            f1: self.f1 || o.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default)]
    pub degenerate: DegenerateFlags,
}

impl Metrics {
    /// Element-wise mean; flags are OR-ed.
    pub fn mean(items: &[Metrics]) -> Option<Metrics> {
        if items.is_empty() {
            return None;
        }
        let n = items.len() as f64;
        let sum = |f: fn(&Metrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        Some(Metrics {
            accuracy: sum(|m| m.accuracy),
            precision: sum(|m| m.precision),
            recall: sum(|m| m.recall),
            f1: sum(|m| m.f1),
            degenerate: items.iter().fold(DegenerateFlags::default(), |a, m| a.union(m.degenerate)),
        })
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyPredictions);
    }
    let accuracy = (cm.tp + cm.tn) as f64 / total as f64;
    let (precision, dp) = ratio(cm.tp, cm.tp + cm.fp);
    let (recall, dr) = ratio(cm.tp, cm.tp + cm.fn_);
    let (f1, df) = if precision + recall == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / (precision + recall), false)
    };
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        degenerate: DegenerateFlags {
            precision: dp,
            recall: dr,
            f1: df,
        },
    })
}

/// Harmonic mean of precision and recall.
pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}
