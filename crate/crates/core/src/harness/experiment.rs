use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Balance, ExperimentConfig, Protocol, ResolvedModel};
use super::HarnessError;
use crate::data::{
    load_dataset, make_splits, ChecksumManifest, ChecksumStatus, ClassLabel, Dataset, IngestOptions, SplitPlan,
};
use crate::eval::{
    class_name, compare_models, comparison_csv, confusion, metrics, pct, roc, ConfusionMatrix, EvaluationReport,
    Metrics, RocCurve,
};
use crate::learner::FitError;
use crate::resample::{balance_indices, leakage_audit, provenance_overlap, ResampleSpec};
use crate::rng;

/// Train/test portions of one fold plus the raw-row index behind every row.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub repetition: usize,
    pub fold: usize,
    pub train: Dataset,
    pub test: Dataset,
    pub train_sources: Vec<usize>,
    pub test_sources: Vec<usize>,
}

/// Duplicate counts between the train and test side of one fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldLeakage {
    pub repetition: usize,
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Test rows whose exact feature vector occurs in the training portion.
    pub exact_duplicates: usize,
    /// Test rows that are copies of a raw row also feeding training.
    pub resampling_duplicates: usize,
    /// Exact duplicates already present in the raw data.
    pub natural_duplicates: usize,
    pub duplicate_fraction_of_test: f64,
}

impl FoldData {
    pub fn leakage(&self) -> Result<FoldLeakage, HarnessError> {
        let audit = leakage_audit(&self.train, &self.test).map_err(|e| HarnessError::Invariant(e.to_string()))?;
        let resampling = provenance_overlap(&self.train_sources, &self.test_sources);
        if resampling > audit.duplicate_count {
            return Err(HarnessError::Invariant(format!(
                "fold {}: {resampling} resampled copies but only {} exact duplicates",
                self.fold, audit.duplicate_count
            )));
        }
        Ok(FoldLeakage {
            repetition: self.repetition,
            fold: self.fold,
            train_size: self.train.len(),
            test_size: self.test.len(),
            exact_duplicates: audit.duplicate_count,
            resampling_duplicates: resampling,
            natural_duplicates: audit.duplicate_count - resampling,
            duplicate_fraction_of_test: audit.duplicate_fraction_of_test,
        })
    }
}

/// Seeds for one repetition, all derived from the experiment seed.
fn repetition_seed(seed: u64, repetition: usize) -> u64 {
    rng::derive_seed(seed, repetition as u64)
}

fn balance_spec(spec: &ResampleSpec, rep_seed: u64) -> ResampleSpec {
    spec.with_seed(rng::derive_seed_str(rep_seed, "balance"))
}

fn resample_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Data(e.to_string())
}

/// Build every fold of one repetition under `protocol`.
pub fn prepare_folds(
    data: &Dataset,
    protocol: Protocol,
    balance: Balance,
    plan: &SplitPlan,
    resample: &ResampleSpec,
    seed: u64,
    repetition: usize,
) -> Result<Vec<FoldData>, HarnessError> {
    let rep_seed = repetition_seed(seed, repetition);
    let plan = SplitPlan {
        seed: rng::derive_seed_str(rep_seed, "split"),
        ..*plan
    };
    let bal = balance_spec(resample, rep_seed);
    let identity: Vec<usize> = (0..data.len()).collect();

    match protocol {
        Protocol::PaperFaithful => {
            let (working, sources) = match balance {
                Balance::Bootstrap => {
                    let idx = balance_indices(data, &bal).map_err(resample_err)?;
                    (data.select(&idx, "+balanced").map_err(resample_err)?, idx)
                }
                Balance::None => (data.clone(), identity),
            };
            let splits = make_splits(&working, &plan).map_err(resample_err)?;
            splits
                .into_iter()
                .enumerate()
                .map(|(fold, s)| {
                    Ok(FoldData {
                        repetition,
                        fold,
                        train: working.select(&s.train, "+train").map_err(resample_err)?,
                        test: working.select(&s.test, "+test").map_err(resample_err)?,
                        train_sources: s.train.iter().map(|&i| sources[i]).collect(),
                        test_sources: s.test.iter().map(|&i| sources[i]).collect(),
                    })
                })
                .collect()
        }
        Protocol::LeakageFree => {
            let splits = make_splits(data, &plan).map_err(resample_err)?;
            splits
                .into_iter()
                .enumerate()
                .map(|(fold, s)| {
                    let portion = data.select(&s.train, "+train").map_err(resample_err)?;
                    let train_sources: Vec<usize> = match balance {
                        Balance::Bootstrap => {
                            let fold_spec = bal.with_seed(rng::derive_seed(bal.seed, fold as u64));
                            balance_indices(&portion, &fold_spec)
                                .map_err(resample_err)?
                                .into_iter()
                                .map(|i| s.train[i])
                                .collect()
                        }
                        Balance::None => s.train.clone(),
                    };
                    Ok(FoldData {
                        repetition,
                        fold,
                        train: data.select(&train_sources, "+train").map_err(resample_err)?,
                        test: data.select(&s.test, "+test").map_err(resample_err)?,
                        train_sources,
                        test_sources: s.test.clone(),
                    })
                })
                .collect()
        }
    }
}

/// Load the configured dataset and check its checksum against the config
/// and against a `datasets.lock` manifest next to the file.
pub fn load_checked(cfg: &ExperimentConfig) -> Result<(Dataset, Vec<String>), HarnessError> {
    let path = &cfg.dataset.path;
    if !path.exists() {
        return Err(HarnessError::Data(format!("dataset file not found: {}", path.display())));
    }
    let opts = IngestOptions {
        drop_missing: cfg.drop_missing,
        ..IngestOptions::default()
    };
    let data = load_dataset(path, &opts).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
    let mut warnings = Vec::new();
    let mut expected: Vec<(String, String)> = Vec::new();
    if let Some(c) = &cfg.dataset.checksum {
        expected.push(("config".into(), c.to_ascii_lowercase()));
    }
    let lock = path.with_file_name("datasets.lock");
    if let (Ok(m), Some(name)) = (ChecksumManifest::load(&lock), path.file_name()) {
        if let ChecksumStatus::Mismatch { expected: e, .. } = m.check(&name.to_string_lossy(), data.checksum()) {
            expected.push(("datasets.lock".into(), e));
        }
    }
    for (source, want) in expected {
        if want != data.checksum() {
            let msg = format!(
                "checksum mismatch for {} ({source} expects {want}, file has {})",
                path.display(),
                data.checksum()
            );
            if cfg.allow_checksum_mismatch {
                warnings.push(msg);
            } else {
                return Err(HarnessError::Data(msg));
            }
        }
    }
    Ok((data, warnings))
}

fn fit_error(model: &str, e: FitError) -> HarnessError {
    let msg = format!("model {model}: {e}");
    match e {
        FitError::InvalidParams(_) | FitError::KTooLarge { .. } => HarnessError::Config(msg),
        FitError::Numerical(_) => HarnessError::Invariant(msg),
        _ => HarnessError::Data(msg),
    }
}

struct JobResult {
    model: usize,
    repetition: usize,
    fold: usize,
    /// `(score, predicted, actual)` per test row.
    scored: Vec<(f64, ClassLabel, ClassLabel)>,
    seconds: f64,
}

/// Per-fold metrics, kept for variance inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldRow {
    pub model_id: String,
    pub spec_hash: String,
    pub repetition: usize,
    pub fold: usize,
    pub defective: Metrics,
    pub non_defective: Metrics,
}

#[derive(Debug, Clone)]
pub struct ModelOutcome {
    pub report: EvaluationReport,
    /// Curve over the pooled out-of-fold scores of the first repetition.
    pub roc: RocCurve,
    pub fold_rows: Vec<FoldRow>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub dataset: String,
    pub dataset_checksum: String,
    pub protocol: Protocol,
    pub seed: u64,
    pub models: Vec<ModelOutcome>,
    pub leakage: Vec<FoldLeakage>,
    pub warnings: Vec<String>,
    pub seconds: f64,
    pub output_dir: PathBuf,
}

impl ExperimentOutcome {
    pub fn report(&self, model_id: &str) -> Option<&EvaluationReport> {
        self.models.iter().map(|m| &m.report).find(|r| r.model_id == model_id)
    }
}

/// Run every configured model over every repetition and fold, aggregate, and
/// write the outputs into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let started = Instant::now();
    cfg.validate()?;
    let models = cfg.resolve_models()?;
    let (data, warnings) = load_checked(cfg)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let reps = cfg.resample.observations_param as usize;
    log::info!(
        "{}: {} rows, protocol {}, {} models x {} repetitions",
        data.origin(),
        data.len(),
        cfg.protocol,
        models.len(),
        reps
    );

    let mut folds = Vec::new();
    for r in 0..reps {
        folds.extend(prepare_folds(
            &data,
            cfg.protocol,
            cfg.balance,
            &cfg.split,
            &cfg.resample,
            cfg.seed,
            r,
        )?);
    }
    let leakage = folds.iter().map(FoldData::leakage).collect::<Result<Vec<_>, _>>()?;
    if cfg.protocol == Protocol::LeakageFree {
        if let Some(l) = leakage.iter().find(|l| l.resampling_duplicates > 0) {
            return Err(HarnessError::Invariant(format!(
                "leakage_free fold {} of repetition {} has {} resampled test rows",
                l.fold, l.repetition, l.resampling_duplicates
            )));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|m| (0..folds.len()).map(move |f| (m, f)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(m, f)| run_job(&models[m], m, &folds[f], cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;

    let mut outcomes = Vec::with_capacity(models.len());
    for (mi, model) in models.iter().enumerate() {
        let mine: Vec<&JobResult> = results.iter().filter(|r| r.model == mi).collect();
        outcomes.push(aggregate(cfg, &data, model, &mine, reps)?);
    }

    let outcome = ExperimentOutcome {
        dataset: data.origin().to_string(),
        dataset_checksum: data.checksum().to_string(),
        protocol: cfg.protocol,
        seed: cfg.seed,
        models: outcomes,
        leakage,
        warnings,
        seconds: started.elapsed().as_secs_f64(),
        output_dir: cfg.output_dir.clone(),
    };
    write_outputs(&outcome, cfg)?;
    Ok(outcome)
}

fn run_job(model: &ResolvedModel, index: usize, fold: &FoldData, seed: u64) -> Result<JobResult, HarnessError> {
    let fit_seed = rng::derive_seed(
        rng::derive_seed_str(repetition_seed(seed, fold.repetition), &model.id),
        fold.fold as u64,
    );
    let t = Instant::now();
    let trained = model
        .spec
        .clone()
        .with_seed(fit_seed)
        .fit(&fold.train)
        .map_err(|e| fit_error(&model.id, e))?;
    let scored = fold
        .test
        .instances()
        .iter()
        .map(|inst| {
            let p = trained.predict(&inst.features);
            (p.score, p.label, inst.label)
        })
        .collect();
    Ok(JobResult {
        model: index,
        repetition: fold.repetition,
        fold: fold.fold,
        scored,
        seconds: t.elapsed().as_secs_f64(),
    })
}

fn eval_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Invariant(e.to_string())
}

fn aggregate(
    cfg: &ExperimentConfig,
    data: &Dataset,
    model: &ResolvedModel,
    results: &[&JobResult],
    reps: usize,
) -> Result<ModelOutcome, HarnessError> {
    let mut fold_rows = Vec::new();
    let mut pooled = ConfusionMatrix::empty(ClassLabel::Defective);
    let mut rep_def = Vec::new();
    let mut rep_non = Vec::new();
    let mut rep_auc = Vec::new();
    let mut first_roc = None;
    let mut evaluated = 0;
    let mut seconds = 0.0;
    let mut folds_per_rep = 0;

    for rep in 0..reps {
        let mut rep_results: Vec<&&JobResult> = results.iter().filter(|r| r.repetition == rep).collect();
        rep_results.sort_by_key(|r| r.fold);
        folds_per_rep = rep_results.len();
        let mut fd = Vec::new();
        let mut fnd = Vec::new();
        let mut rep_scores = Vec::new();
        for r in rep_results {
            let pairs: Vec<_> = r.scored.iter().map(|&(_, p, a)| (p, a)).collect();
            let cm = confusion(&pairs, ClassLabel::Defective).map_err(eval_err)?;
            pooled.add(&cm);
            evaluated += pairs.len();
            seconds += r.seconds;
            let d = metrics(&cm).map_err(eval_err)?;
            let n = metrics(&cm.swapped()).map_err(eval_err)?;
            fold_rows.push(FoldRow {
                model_id: model.id.clone(),
                spec_hash: model.spec.spec_hash(),
                repetition: rep,
                fold: r.fold,
                defective: d,
                non_defective: n,
            });
            fd.push(d);
            fnd.push(n);
            rep_scores.extend(r.scored.iter().map(|&(s, _, a)| (s, a)));
        }
        rep_def.push(Metrics::mean(&fd).ok_or_else(|| eval_err("repetition without folds"))?);
        rep_non.push(Metrics::mean(&fnd).ok_or_else(|| eval_err("repetition without folds"))?);
        let curve = roc(&rep_scores, ClassLabel::Defective).map_err(|e| HarnessError::Data(e.to_string()))?;
        rep_auc.push(curve.auc);
        if first_roc.is_none() {
            first_roc = Some(curve);
        }
    }
    if pooled.total() != evaluated {
        return Err(eval_err("confusion counts do not add up to the evaluated rows"));
    }
    let defective = Metrics::mean(&rep_def).ok_or_else(|| eval_err("no repetitions"))?;
    let non_defective = Metrics::mean(&rep_non).ok_or_else(|| eval_err("no repetitions"))?;
    let accs: Vec<f64> = rep_def.iter().map(|m| m.accuracy).collect();
    let report = EvaluationReport {
        model_id: model.id.clone(),
        spec_hash: model.spec.spec_hash(),
        protocol: cfg.protocol.to_string(),
        dataset_origin: data.origin().to_string(),
        dataset_checksum: data.checksum().to_string(),
        seed: cfg.seed,
        defective,
        non_defective,
        auc: rep_auc.iter().sum::<f64>() / rep_auc.len() as f64,
        confusion: pooled,
        repetitions: reps,
        folds: folds_per_rep,
        accuracy_min: accs.iter().copied().fold(f64::INFINITY, f64::min),
        accuracy_max: accs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        fit_seconds: seconds,
    };
    check_report(&report)?;
    Ok(ModelOutcome {
        report,
        roc: first_roc.ok_or_else(|| eval_err("no repetitions"))?,
        fold_rows,
    })
}

fn check_report(r: &EvaluationReport) -> Result<(), HarnessError> {
    let values = [
        r.defective.accuracy,
        r.defective.precision,
        r.defective.recall,
        r.defective.f1,
        r.non_defective.accuracy,
        r.non_defective.precision,
        r.non_defective.recall,
        r.non_defective.f1,
        r.auc,
    ];
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(eval_err(format!("model {}: metric outside [0, 1]", r.model_id)));
    }
    if (r.defective.accuracy - r.non_defective.accuracy).abs() > 1e-12 {
        return Err(eval_err(format!("model {}: per-class accuracies differ", r.model_id)));
    }
    Ok(())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), HarnessError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write_outputs(o: &ExperimentOutcome, cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let reports: Vec<EvaluationReport> = o.models.iter().map(|m| m.report.clone()).collect();

    for m in &o.models {
        let id = &m.report.model_id;
        write(dir, &format!("report_{id}.txt"), &m.report.to_text())?;
        write(dir, &format!("roc_{id}.csv"), &m.roc.to_csv())?;
        write(
            dir,
            &format!("roc_{id}.svg"),
            &m.roc.to_svg(&format!("{} {} ({})", o.dataset, id, o.protocol)),
        )?;
    }
    write(dir, "comparison.csv", &comparison_csv(&reports))?;
    let mut tables = String::new();
    for view in [ClassLabel::Defective, ClassLabel::NonDefective] {
        tables.push_str(&compare_models(&reports, view).map_err(eval_err)?.to_text());
        tables.push('\n');
    }
    write(dir, "comparison.txt", &tables)?;
    write(dir, "folds.csv", &folds_csv(o))?;
    write(dir, "leakage.csv", &leakage_csv(&o.leakage))?;
    write(dir, "timings.json", &timings_json(o))?;
    Ok(())
}

fn folds_csv(o: &ExperimentOutcome) -> String {
    let mut s = String::from(
        "dataset,dataset_sha256,protocol,model,spec_hash,seed,repetition,fold,positive_class,accuracy,precision,recall,f1\n",
    );
    let mut rows: Vec<&FoldRow> = o.models.iter().flat_map(|m| &m.fold_rows).collect();
    rows.sort_by(|a, b| (&a.model_id, a.repetition, a.fold).cmp(&(&b.model_id, b.repetition, b.fold)));
    for r in rows {
        for (c, m) in [(ClassLabel::Defective, &r.defective), (ClassLabel::NonDefective, &r.non_defective)] {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                o.dataset,
                o.dataset_checksum,
                o.protocol,
                r.model_id,
                r.spec_hash,
                o.seed,
                r.repetition,
                r.fold,
                class_name(c),
                pct(m.accuracy),
                pct(m.precision),
                pct(m.recall),
                pct(m.f1)
            );
        }
    }
    s
}

pub fn leakage_csv(rows: &[FoldLeakage]) -> String {
    let mut s = String::from(
        "repetition,fold,train_size,test_size,exact_duplicates,resampling_duplicates,natural_duplicates,duplicate_fraction_of_test\n",
    );
    for l in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.4}",
            l.repetition,
            l.fold,
            l.train_size,
            l.test_size,
            l.exact_duplicates,
            l.resampling_duplicates,
            l.natural_duplicates,
            l.duplicate_fraction_of_test
        );
    }
    s
}

fn timings_json(o: &ExperimentOutcome) -> String {
    let per_model: BTreeMap<&str, f64> = o
        .models
        .iter()
        .map(|m| (m.report.model_id.as_str(), m.report.fit_seconds))
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "dataset": o.dataset,
        "protocol": o.protocol.as_str(),
        "total_seconds": o.seconds,
        "model_seconds": per_model,
    }))
    .expect("timings serialize")
        + "\n"
}
