use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{one_line, Balance, DatasetRef, ExperimentConfig, ModelEntry, Protocol};
use super::experiment::{create_dir, run_experiment, ExperimentOutcome};
use super::HarnessError;
use crate::data::{ClassLabel, SplitPlan};
use crate::eval::{compare_models, pct, EvaluationReport};
use crate::resample::ResampleSpec;

/// Models in the comparison tables, in table order.
pub const TABLE_MODELS: [&str; 5] = ["svm", "knn", "decision_tree", "random_forest", "ensemble"];
pub const DEFAULT_DATASETS: [&str; 3] = ["cm1", "kc2", "pc1"];
/// Allowed gap between measured and published ensemble accuracy, in
/// percentage points.
pub const ACCURACY_BAND_PP: f64 = 3.0;
/// KNN within this many points of the ensemble counts as matching it.
pub const KNN_MATCH_PP: f64 = 0.5;

/// One published table cell, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCell {
    pub dataset: String,
    pub model: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    /// NaN where the published cell is blank.
    pub f_score: f64,
    pub inconsistent_under_eq1: bool,
    #[serde(default)]
    pub alt_accuracy: Option<f64>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub cell: Vec<TargetCell>,
}

impl Targets {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Data(format!("cannot read targets {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| HarnessError::Data(format!("invalid targets {}: {}", path.display(), one_line(&e.to_string()))))
    }

    pub fn get(&self, dataset: &str, model: &str) -> Option<&TargetCell> {
        self.cell
            .iter()
            .find(|c| c.dataset.eq_ignore_ascii_case(dataset) && c.model == model)
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub fixtures_dir: PathBuf,
    pub datasets: Vec<String>,
    pub protocols: Vec<Protocol>,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Defaults to `paper_targets.toml` in the fixtures directory.
    pub targets: Option<PathBuf>,
    pub balance: Balance,
    pub split: SplitPlan,
    pub resample: ResampleSpec,
    pub standardize: bool,
    pub meta_insample: bool,
    pub allow_checksum_mismatch: bool,
}

impl ReproduceOptions {
    pub fn new(fixtures_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, seed: u64) -> Self {
        ReproduceOptions {
            fixtures_dir: fixtures_dir.into(),
            datasets: DEFAULT_DATASETS.iter().map(|s| s.to_string()).collect(),
            protocols: vec![Protocol::PaperFaithful, Protocol::LeakageFree],
            seed,
            output_dir: output_dir.into(),
            targets: None,
            balance: Balance::Bootstrap,
            split: SplitPlan::kfold(10, true, 0),
            resample: ResampleSpec::default(),
            standardize: false,
            meta_insample: false,
            allow_checksum_mismatch: false,
        }
    }
}

/// Headline numbers for one dataset under one protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub protocol: Protocol,
    pub ensemble_accuracy: f64,
    pub paper_accuracy: Option<f64>,
    pub within_band: Option<bool>,
    pub best_baseline: String,
    pub best_baseline_accuracy: f64,
    /// Ensemble at least as accurate as the best of svm, tree and forest.
    pub ordering_holds: bool,
    pub knn_accuracy: f64,
    pub knn_matches_ensemble: bool,
}

#[derive(Debug, Clone)]
pub struct ReproduceOutcome {
    pub experiments: Vec<ExperimentOutcome>,
    pub summary: Vec<SummaryRow>,
}

fn fixture_path(dir: &Path, dataset: &str) -> PathBuf {
    dir.join(format!("{}.arff", dataset.to_ascii_lowercase()))
}

/// Run the comparison models on each dataset under each protocol and write
/// tables, deviations from the published values and a summary.
pub fn reproduce_tables(opts: &ReproduceOptions) -> Result<ReproduceOutcome, HarnessError> {
    if opts.datasets.is_empty() {
        return Err(HarnessError::Config("no datasets selected".into()));
    }
    for d in &opts.datasets {
        let p = fixture_path(&opts.fixtures_dir, d);
        if !p.exists() {
            return Err(HarnessError::Data(format!("missing dataset fixture: {}", p.display())));
        }
    }
    let targets_path = opts
        .targets
        .clone()
        .unwrap_or_else(|| opts.fixtures_dir.join("paper_targets.toml"));
    let targets = Targets::load(&targets_path)?;
    create_dir(&opts.output_dir)?;

    let mut experiments = Vec::new();
    for d in &opts.datasets {
        for &protocol in &opts.protocols {
            let cfg = ExperimentConfig {
                dataset: DatasetRef {
                    path: fixture_path(&opts.fixtures_dir, d),
                    checksum: None,
                },
                protocol,
                split: opts.split,
                resample: opts.resample,
                balance: opts.balance,
                models: TABLE_MODELS.iter().map(|m| ModelEntry::Name(m.to_string())).collect(),
                seed: opts.seed,
                output_dir: opts.output_dir.join(d.to_ascii_lowercase()).join(protocol.as_str()),
                standardize: opts.standardize,
                meta_insample: opts.meta_insample,
                allow_checksum_mismatch: opts.allow_checksum_mismatch,
                drop_missing: false,
            };
            log::info!("reproduce: {d} under {protocol}");
            experiments.push(run_experiment(&cfg)?);
        }
    }

    let summary: Vec<SummaryRow> = experiments.iter().map(|e| summarize(e, &targets)).collect::<Result<_, _>>()?;
    let out = &opts.output_dir;
    write(out, "tables.txt", &tables_text(&experiments)?)?;
    write(out, "deviations.csv", &deviations_csv(&experiments, &targets))?;
    write(out, "summary.csv", &summary_csv(&summary))?;
    write(out, "timings.json", &timings_json(&experiments))?;
    Ok(ReproduceOutcome { experiments, summary })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), HarnessError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", path.display())))
}

fn accuracy(e: &ExperimentOutcome, model: &str) -> Result<f64, HarnessError> {
    e.report(model)
        .map(|r| r.defective.accuracy)
        .ok_or_else(|| HarnessError::Invariant(format!("no report for {model} on {}", e.dataset)))
}

fn summarize(e: &ExperimentOutcome, targets: &Targets) -> Result<SummaryRow, HarnessError> {
    let ens = accuracy(e, "ensemble")?;
    let mut best = ("svm", accuracy(e, "svm")?);
    for m in ["decision_tree", "random_forest"] {
        let a = accuracy(e, m)?;
        if a > best.1 {
            best = (m, a);
        }
    }
    let knn = accuracy(e, "knn")?;
    let paper = targets.get(&e.dataset, "ensemble").map(|c| c.accuracy);
    Ok(SummaryRow {
        dataset: e.dataset.clone(),
        protocol: e.protocol,
        ensemble_accuracy: ens,
        paper_accuracy: paper,
        within_band: paper.map(|p| (ens * 100.0 - p).abs() <= ACCURACY_BAND_PP),
        best_baseline: best.0.to_string(),
        best_baseline_accuracy: best.1,
        ordering_holds: ens >= best.1,
        knn_accuracy: knn,
        knn_matches_ensemble: knn >= ens || (ens - knn) * 100.0 <= KNN_MATCH_PP,
    })
}

fn tag(p: Protocol) -> &'static str {
    match p {
        Protocol::PaperFaithful => "paper_comparable",
        Protocol::LeakageFree => "leakage_free",
    }
}

fn tables_text(experiments: &[ExperimentOutcome]) -> Result<String, HarnessError> {
    let mut s = String::new();
    for e in experiments {
        let reports: Vec<EvaluationReport> = e.models.iter().map(|m| m.report.clone()).collect();
        for view in [ClassLabel::Defective, ClassLabel::NonDefective] {
            let t = compare_models(&reports, view).map_err(|x| HarnessError::Invariant(x.to_string()))?;
            let _ = writeln!(s, "[{}]", tag(e.protocol));
            s.push_str(&t.to_text());
            s.push('\n');
        }
    }
    Ok(s)
}

fn fmt_opt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.2}")
    }
}

fn deviations_csv(experiments: &[ExperimentOutcome], targets: &Targets) -> String {
    let mut s = String::from(
        "dataset,protocol,tag,model,metric,positive_class,paper,measured,difference,inconsistent_under_eq1,dataset_sha256,spec_hash,seed\n",
    );
    for e in experiments {
        let mut reports: Vec<&EvaluationReport> = e.models.iter().map(|m| &m.report).collect();
        reports.sort_by(|a, b| a.model_id.cmp(&b.model_id));
        for r in reports {
            let Some(cell) = targets.get(&e.dataset, &r.model_id) else {
                continue;
            };
            let mut row = |metric: &str, class: &str, paper: f64, measured: f64| {
                let m = measured * 100.0;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{metric},{class},{},{},{},{},{},{},{}",
                    e.dataset,
                    e.protocol,
                    tag(e.protocol),
                    r.model_id,
                    fmt_opt(paper),
                    pct(measured),
                    fmt_opt(m - paper),
                    cell.inconsistent_under_eq1,
                    r.dataset_checksum,
                    r.spec_hash,
                    r.seed
                );
            };
            row("accuracy", "any", cell.accuracy, r.defective.accuracy);
            if let Some(alt) = cell.alt_accuracy {
                row("accuracy_alt", "any", alt, r.defective.accuracy);
            }
            for (class, m) in [("defective", &r.defective), ("non_defective", &r.non_defective)] {
                row("precision", class, cell.precision, m.precision);
                row("recall", class, cell.recall, m.recall);
                row("f_score", class, cell.f_score, m.f1);
            }
        }
    }
    s
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "dataset,protocol,tag,ensemble_accuracy,paper_accuracy,difference,within_3pp,best_baseline,best_baseline_accuracy,ordering_claim,knn_accuracy,knn_matches_ensemble\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.protocol,
            tag(r.protocol),
            pct(r.ensemble_accuracy),
            r.paper_accuracy.map(fmt_opt).unwrap_or_default(),
            r.paper_accuracy.map(|p| fmt_opt(r.ensemble_accuracy * 100.0 - p)).unwrap_or_default(),
            r.within_band.map(|b| b.to_string()).unwrap_or_default(),
            r.best_baseline,
            pct(r.best_baseline_accuracy),
            if r.ordering_holds { "holds" } else { "fails" },
            pct(r.knn_accuracy),
            r.knn_matches_ensemble
        );
    }
    s
}

fn timings_json(experiments: &[ExperimentOutcome]) -> String {
    let mut map: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    for e in experiments {
        let models: BTreeMap<&str, f64> = e
            .models
            .iter()
            .map(|m| (m.report.model_id.as_str(), m.report.fit_seconds))
            .collect();
        map.insert(
            format!("{}/{}", e.dataset, e.protocol),
            serde_json::json!({ "total_seconds": e.seconds, "model_seconds": models }),
        );
    }
    serde_json::to_string_pretty(&map).expect("timings serialize") + "\n"
}
