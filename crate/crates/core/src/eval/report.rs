use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::confusion::{confusion, metrics, ConfusionMatrix, Metrics};
use super::roc::roc;
use super::EvalError;
use crate::data::ClassLabel;

/// Metrics for one model under one protocol, with a block per class view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model_id: String,
    /// Short hash of the learner spec that produced the numbers.
    pub spec_hash: String,
    pub protocol: String,
    pub dataset_origin: String,
    pub dataset_checksum: String,
    pub seed: u64,
    /// Defective taken as the positive class.
    pub defective: Metrics,
    /// NonDefective taken as the positive class.
    pub non_defective: Metrics,
    pub auc: f64,
    /// Pooled counts with Defective as positive.
    pub confusion: ConfusionMatrix,
    pub repetitions: usize,
    pub folds: usize,
    /// Range of the per-repetition accuracy.
    pub accuracy_min: f64,
    pub accuracy_max: f64,
    pub fit_seconds: f64,
}

impl EvaluationReport {
    /// Report for a single scored evaluation (one repetition, one fold).
    #[allow(clippy::too_many_arguments)]
    pub fn from_scored(
        model_id: &str,
        protocol: &str,
        dataset_origin: &str,
        dataset_checksum: &str,
        seed: u64,
        scored: &[(f64, ClassLabel, ClassLabel)],
        fit_seconds: f64,
    ) -> Result<Self, EvalError> {
        let pairs: Vec<_> = scored.iter().map(|&(_, p, a)| (p, a)).collect();
        let cm = confusion(&pairs, ClassLabel::Defective)?;
        let defective = metrics(&cm)?;
        let non_defective = metrics(&cm.swapped())?;
        let auc = roc(
            &scored.iter().map(|&(s, _, a)| (s, a)).collect::<Vec<_>>(),
            ClassLabel::Defective,
        )?
        .auc;
        Ok(EvaluationReport {
            model_id: model_id.to_string(),
            spec_hash: String::new(),
            protocol: protocol.to_string(),
            dataset_origin: dataset_origin.to_string(),
            dataset_checksum: dataset_checksum.to_string(),
            seed,
            defective,
            non_defective,
            auc,
            confusion: cm,
            repetitions: 1,
            folds: 1,
            accuracy_min: defective.accuracy,
            accuracy_max: defective.accuracy,
            fit_seconds,
        })
    }

    pub fn view(&self, class: ClassLabel) -> &Metrics {
        match class {
            ClassLabel::Defective => &self.defective,
            ClassLabel::NonDefective => &self.non_defective,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model:      {} (spec {})", self.model_id, self.spec_hash);
        let _ = writeln!(s, "protocol:   {}", self.protocol);
        let _ = writeln!(s, "dataset:    {} ({})", self.dataset_origin, self.dataset_checksum);
        let _ = writeln!(s, "seed:       {}", self.seed);
        let _ = writeln!(s, "evaluation: {} repetition(s) x {} fold(s)", self.repetitions, self.folds);
        let _ = writeln!(
            s,
            "accuracy:   {} (range {} .. {})",
            pct(self.defective.accuracy),
            pct(self.accuracy_min),
            pct(self.accuracy_max)
        );
        let _ = writeln!(s, "auc:        {:.4}", self.auc);
        for class in [ClassLabel::Defective, ClassLabel::NonDefective] {
            let m = self.view(class);
            let _ = writeln!(s, "[positive = {}]", class_name(class));
            let _ = writeln!(s, "  precision {}", pct(m.precision));
            let _ = writeln!(s, "  recall    {}", pct(m.recall));
            let _ = writeln!(s, "  f1        {}", pct(m.f1));
            if m.degenerate.any() {
                let _ = writeln!(
                    s,
                    "  zero denominator: precision={} recall={} f1={}",
                    m.degenerate.precision, m.degenerate.recall, m.degenerate.f1
                );
            }
        }
        let c = &self.confusion;
        let _ = writeln!(s, "confusion (pooled, Defective positive):");
        let _ = writeln!(s, "  tp={} fp={} fn={} tn={}", c.tp, c.fp, c.fn_, c.tn);
        s
    }

    /// One CSV line per class view, matching [`METRICS_CSV_HEADER`].
    pub fn csv_rows(&self) -> Vec<String> {
        [ClassLabel::Defective, ClassLabel::NonDefective]
            .iter()
            .map(|&c| {
                let m = self.view(c);
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    self.dataset_origin,
                    self.dataset_checksum,
                    self.protocol,
                    self.model_id,
                    self.spec_hash,
                    class_name(c),
                    pct(m.accuracy),
                    pct(m.precision),
                    pct(m.recall),
                    pct(m.f1),
                    pct(self.auc),
                    self.seed
                )
            })
            .collect()
    }
}

pub const METRICS_CSV_HEADER: &str = "dataset,dataset_sha256,protocol,model,spec_hash,positive_class,accuracy,precision,recall,f1,auc,seed";

pub fn class_name(c: ClassLabel) -> &'static str {
    match c {
        ClassLabel::Defective => "defective",
        ClassLabel::NonDefective => "non_defective",
    }
}

/// Fraction rendered as a percentage with two decimals.
pub fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_id: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub dataset_origin: String,
    pub protocol: String,
    pub view: ClassLabel,
    pub rows: Vec<ComparisonRow>,
}

/// One row per report, sorted by model id.
pub fn compare_models(reports: &[EvaluationReport], view: ClassLabel) -> Result<ComparisonTable, EvalError> {
    let first = reports.first().ok_or(EvalError::NoReports)?;
    for r in reports {
        if r.dataset_origin != first.dataset_origin || r.protocol != first.protocol {
            return Err(EvalError::MismatchedReports(format!(
                "{}/{} vs {}/{}",
                first.dataset_origin, first.protocol, r.dataset_origin, r.protocol
            )));
        }
    }
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| {
            let m = r.view(view);
            ComparisonRow {
                model_id: r.model_id.clone(),
                accuracy: m.accuracy,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                auc: r.auc,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    Ok(ComparisonTable {
        dataset_origin: first.dataset_origin.clone(),
        protocol: first.protocol.clone(),
        view,
        rows,
    })
}

impl ComparisonTable {
    pub fn row(&self, model_id: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.model_id == model_id)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} / {} (positive = {})\n{:<24}{:>10}{:>11}{:>9}{:>9}{:>9}\n",
            self.dataset_origin,
            self.protocol,
            class_name(self.view),
            "model",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "auc"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<24}{:>10}{:>11}{:>9}{:>9}{:>9}",
                r.model_id,
                pct(r.accuracy),
                pct(r.precision),
                pct(r.recall),
                pct(r.f1),
                pct(r.auc)
            );
        }
        s
    }
}

/// Both class views of every report as CSV.
pub fn comparison_csv(reports: &[EvaluationReport]) -> String {
    let mut sorted: Vec<&EvaluationReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    let mut s = String::from(METRICS_CSV_HEADER);
    s.push('\n');
    for r in sorted {
        for row in r.csv_rows() {
            s.push_str(&row);
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::*;

    fn report(model: &str, origin: &str) -> EvaluationReport {
        let scored = [
            (0.9, Defective, Defective),
            (0.6, Defective, NonDefective),
            (0.2, NonDefective, NonDefective),
            (0.1, NonDefective, Defective),
        ];
        EvaluationReport::from_scored(model, "leakage_free", origin, "abc", 1, &scored, 0.0).unwrap()
    }

    #[test]
    fn per_class_blocks_share_accuracy() {
        let r = report("knn", "CM1");
        assert_eq!(r.defective.accuracy, r.non_defective.accuracy);
        assert_eq!(r.defective.precision, 0.5);
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.csv_rows().len(), 2);
        assert!(r.to_text().contains("positive = non_defective"));
    }

    #[test]
    fn comparison_rows_sorted() {
        let t = compare_models(&[report("svm", "CM1"), report("knn", "CM1")], Defective).unwrap();
        let ids: Vec<_> = t.rows.iter().map(|r| r.model_id.as_str()).collect();
        assert_eq!(ids, ["knn", "svm"]);
        let single = compare_models(&[report("knn", "CM1")], Defective).unwrap();
        assert_eq!(single.rows.len(), 1);
        assert!(matches!(
            compare_models(&[report("knn", "CM1"), report("svm", "PC1")], Defective),
            Err(EvalError::MismatchedReports(_))
        ));
        let csv = comparison_csv(&[report("svm", "CM1"), report("knn", "CM1")]);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("CM1,abc,leakage_free,knn,,defective,50.00"));
    }

    #[test]
    fn percent_formatting() {
        assert_eq!(pct(0.98561), "98.56");
        assert_eq!(pct(1.0), "100.00");
    }
}
