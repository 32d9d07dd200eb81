//! Acceptance gate. Every test writes one `criterion N: PASS|FAIL` line to
//! stderr (uncaptured) and then asserts its verdict.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Mutex, OnceLock};

use defectlab::classifiers::{KnnParams, SvmParams, TreeParams};
use defectlab::data::stratified_kfold;
use defectlab::ensembles::{stacked_fit_traced, EnsembleSpec};
use defectlab::eval::{metrics, roc};
use defectlab::{balance_classes, ClassLabel, ConfusionMatrix, Dataset, LearnerSpec, ResampleSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_DATASETS: [&str; 3] = ["cm1", "kc2", "pc1"];
const RUNTIME_LIMIT_SECONDS: f64 = 60.0;

fn verdict(n: u32, name: &str, ok: bool, detail: &str) {
    let line = format!("criterion {n:>2}: {} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn label(defective: bool) -> ClassLabel {
    if defective {
        ClassLabel::Defective
    } else {
        ClassLabel::NonDefective
    }
}

/// Random dataset with both classes present.
fn random_dataset(r: &mut ChaCha8Rng, n: usize, p: usize, integer: bool) -> Dataset {
    loop {
        let rows: Vec<(Vec<f64>, ClassLabel)> = (0..n)
            .map(|_| {
                let x = (0..p)
                    .map(|_| if integer { r.random_range(0..6) as f64 } else { r.random_range(-10.0..10.0) })
                    .collect();
                (x, label(r.random_bool(0.4)))
            })
            .collect();
        if rows.iter().any(|r| r.1.is_defective()) && rows.iter().any(|r| !r.1.is_defective()) {
            return Dataset::from_rows(rows, "random").unwrap();
        }
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn defectlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defectlab"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

// Full reproduction runs are long and single-threaded timing matters, so they
// never overlap.
static HEAVY: Mutex<()> = Mutex::new(());

fn reproduce_into(dir: &Path) -> Output {
    let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let _ = fs::remove_dir_all(dir);
    defectlab(&[
        "reproduce-tables",
        "--fixtures",
        fixtures().to_str().unwrap(),
        "--datasets",
        &available_datasets().join(","),
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "42",
    ])
}

fn available_datasets() -> Vec<&'static str> {
    TARGET_DATASETS
        .into_iter()
        .filter(|d| fixtures().join(format!("{d}.arff")).exists())
        .collect()
}

fn missing_datasets() -> Vec<&'static str> {
    let have = available_datasets();
    TARGET_DATASETS.into_iter().filter(|d| !have.contains(d)).collect()
}

fn shared_run() -> &'static Path {
    static RUN: OnceLock<PathBuf> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance/run_a");
        let out = reproduce_into(&dir);
        assert!(
            out.status.success(),
            "reproduce-tables failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        dir
    })
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn summary_row(dataset: &str, protocol: &str) -> BTreeMap<String, String> {
    read_csv(&shared_run().join("summary.csv"))
        .into_iter()
        .find(|r| r["dataset"].eq_ignore_ascii_case(dataset) && r["protocol"] == protocol)
        .unwrap_or_else(|| panic!("no summary row for {dataset}/{protocol}"))
}

fn missing_note() -> String {
    let missing = missing_datasets();
    if missing.is_empty() {
        String::new()
    } else {
        format!("; fixture missing for {}", missing.join(","))
    }
}

#[test]
fn criterion_01_metric_arithmetic() {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut degenerate_seen = 0;
    let mut ok = true;
    for i in 0..50 {
        // every tenth matrix has an empty predicted-positive or actual-positive column
        let (tp, fp, fn_, tn) = match i % 10 {
            0 => (0, 0, r.random_range(1..40), r.random_range(1..40)),
            5 => (0, r.random_range(1..40), 0, r.random_range(1..40)),
            _ => (
                r.random_range(0..60),
                r.random_range(0..60),
                r.random_range(0..60),
                r.random_range(1..60),
            ),
        };
        let cm = ConfusionMatrix {
            tp,
            fp,
            fn_,
            tn,
            positive_class: ClassLabel::Defective,
        };
        let m = metrics(&cm).unwrap();
        let total = (tp + fp + fn_ + tn) as f64;
        let accuracy = (tp + tn) as f64 / total;
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
        for (got, want) in [(m.accuracy, accuracy), (m.precision, precision), (m.recall, recall), (m.f1, f1)] {
            worst = worst.max((got - want).abs());
        }
        ok &= m.degenerate.precision == (tp + fp == 0);
        ok &= m.degenerate.recall == (tp + fn_ == 0);
        ok &= m.degenerate.f1 == (tp == 0);
        if m.degenerate.any() {
            degenerate_seen += 1;
        }
    }
    ok &= worst <= 1e-12 && degenerate_seen > 0;
    verdict(
        1,
        "metric arithmetic",
        ok,
        &format!("50 matrices, max abs error {worst:.1e}, {degenerate_seen} with zero denominators"),
    );
}

fn mann_whitney(scored: &[(f64, ClassLabel)]) -> f64 {
    let pos: Vec<f64> = scored.iter().filter(|s| s.1.is_defective()).map(|s| s.0).collect();
    let neg: Vec<f64> = scored.iter().filter(|s| !s.1.is_defective()).map(|s| s.0).collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

#[test]
fn criterion_02_auc_oracle() {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = r.random_range(2..=1000);
        // coarse grids on some sets force score ties
        let levels = if i % 3 == 0 { Some(r.random_range(2..20)) } else { None };
        let mut scored: Vec<(f64, ClassLabel)> = (0..n)
            .map(|_| {
                let s = match levels {
                    Some(l) => r.random_range(0..l) as f64 / l as f64,
                    None => r.random::<f64>(),
                };
                (s, label(r.random_bool(0.3)))
            })
            .collect();
        scored[0].1 = ClassLabel::Defective;
        scored[1].1 = ClassLabel::NonDefective;
        let auc = roc(&scored, ClassLabel::Defective).unwrap().auc;
        worst = worst.max((auc - mann_whitney(&scored)).abs());
    }
    let separated: Vec<_> = (0..50).map(|i| (i as f64, label(i >= 30))).collect();
    let constant: Vec<_> = (0..50).map(|i| (0.7, label(i % 4 == 0))).collect();
    let perfect = roc(&separated, ClassLabel::Defective).unwrap().auc;
    let flat = roc(&constant, ClassLabel::Defective).unwrap().auc;
    verdict(
        2,
        "AUC oracle",
        worst <= 1e-9 && perfect == 1.0 && flat == 0.5,
        &format!("100 sets, max deviation {worst:.1e}; separated {perfect}; constant {flat}"),
    );
}

/// Exhaustive KNN with the library's documented tie rules.
fn brute_knn(train: &Dataset, k: usize, q: &[f64]) -> ClassLabel {
    let mut d: Vec<(f64, usize)> = (0..train.len())
        .map(|i| {
            let s: f64 = train.features(i).iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum();
            (s.sqrt(), i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let nn = &d[..k];
    let def = nn.iter().filter(|(_, i)| train.label(*i).is_defective()).count();
    if 2 * def != k {
        return label(2 * def > k);
    }
    let sum = |want: bool| -> f64 {
        nn.iter()
            .filter(|(_, i)| train.label(*i).is_defective() == want)
            .map(|(s, _)| s)
            .sum()
    };
    label(sum(true) < sum(false))
}

#[test]
fn criterion_03_knn_oracle() {
    let mut r = rng(3);
    let (mut queries, mut mismatches) = (0, 0);
    for _ in 0..20 {
        let n = r.random_range(4..=50);
        let p = r.random_range(1..=5);
        let train = random_dataset(&mut r, n, p, false);
        let k = r.random_range(1..=n.min(9));
        let model = LearnerSpec::Knn(KnnParams { k, ..Default::default() }).fit(&train).unwrap();
        let probes: Vec<Vec<f64>> = (0..n)
            .map(|i| train.features(i).to_vec())
            .chain((0..40).map(|_| (0..p).map(|_| r.random_range(-12.0..12.0)).collect()))
            .collect();
        for q in &probes {
            queries += 1;
            if model.predict(q).label != brute_knn(&train, k, q) {
                mismatches += 1;
            }
        }
    }
    verdict(
        3,
        "KNN oracle",
        mismatches == 0,
        &format!("20 datasets, {queries} queries, {mismatches} mismatches"),
    );
}

fn weighted_gini(train: &Dataset, feature: usize, threshold: f64) -> f64 {
    let gini = |rows: &[usize]| {
        if rows.is_empty() {
            return 0.0;
        }
        let p = rows.iter().filter(|&&i| train.label(i).is_defective()).count() as f64 / rows.len() as f64;
        1.0 - p * p - (1.0 - p) * (1.0 - p)
    };
    let (l, r): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| train.features(i)[feature] <= threshold);
    (l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r)) / train.len() as f64
}

/// First (feature, midpoint) with the lowest weighted Gini.
fn brute_root(train: &Dataset) -> Option<(usize, f64, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..train.n_features() {
        let mut values: Vec<f64> = (0..train.len()).map(|i| train.features(i)[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let g = weighted_gini(train, f, t);
            if best.is_none_or(|b| g < b.2) {
                best = Some((f, t, g));
            }
        }
    }
    best
}

#[test]
fn criterion_04_cart_root_split() {
    let mut r = rng(4);
    let mut mismatches = Vec::new();
    let spec = LearnerSpec::DecisionTree(TreeParams {
        max_depth: None,
        min_leaf: 1,
    });
    for case in 0..40 {
        let n = r.random_range(3..=20);
        let p = r.random_range(1..=4);
        let train = random_dataset(&mut r, n, p, case % 2 == 0);
        let model = spec.fit(&train).unwrap();
        let defectlab::learner::FittedModel::DecisionTree(tree) = &model.model else {
            panic!("decision tree expected");
        };
        let got = tree.root_split();
        let want = brute_root(&train).map(|(f, t, _)| (f, t));
        if got != want {
            mismatches.push(format!("case {case}: {got:?} vs {want:?}"));
        }
    }
    let xor = Dataset::from_rows(
        vec![
            (vec![0.0, 0.0], ClassLabel::NonDefective),
            (vec![0.0, 1.0], ClassLabel::Defective),
            (vec![1.0, 0.0], ClassLabel::Defective),
            (vec![1.0, 1.0], ClassLabel::NonDefective),
        ],
        "xor",
    )
    .unwrap();
    let xor_model = LearnerSpec::DecisionTree(TreeParams {
        max_depth: Some(2),
        min_leaf: 1,
    })
    .fit(&xor)
    .unwrap();
    let correct = (0..4).filter(|&i| xor_model.predict(xor.features(i)).label == xor.label(i)).count();
    verdict(
        4,
        "CART root split",
        mismatches.is_empty() && correct == 4,
        &format!(
            "40 datasets of <= 20 rows, {} root mismatches{}; XOR-4 train accuracy {correct}/4 at depth 2",
            mismatches.len(),
            mismatches.first().map(|m| format!(" ({m})")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_05_balance_invariant() {
    let mut r = rng(5);
    let mut failures = 0;
    for case in 0..30 {
        let n = r.random_range(10..200);
        let rows: Vec<(Vec<f64>, ClassLabel)> = (0..n)
            .map(|i| {
                let x = vec![r.random_range(0..50) as f64, r.random::<f64>()];
                (x, label(i % 9 == 0 || r.random_bool(0.05)))
            })
            .collect();
        let data = Dataset::from_rows(rows, "imbalanced").unwrap();
        let out = balance_classes(&data, &ResampleSpec::default().with_seed(case)).unwrap();
        let (d, nd) = out.class_counts();
        let input: HashSet<Vec<u64>> = data
            .instances()
            .iter()
            .map(|i| i.features.iter().map(|v| v.to_bits()).collect())
            .collect();
        let all_present = out
            .instances()
            .iter()
            .all(|i| input.contains(&i.features.iter().map(|v| v.to_bits()).collect::<Vec<_>>()));
        if d.abs_diff(nd) > 1 || !all_present {
            failures += 1;
        }
    }
    verdict(
        5,
        "balance invariant",
        failures == 0,
        &format!("30 imbalanced datasets, {failures} violations"),
    );
}

#[test]
fn criterion_06_stratified_kfold() {
    let mut r = rng(6);
    let mut problems = Vec::new();
    for case in 0..30 {
        let n = r.random_range(20..500);
        let k = r.random_range(2..=10);
        let labels: Vec<ClassLabel> = (0..n).map(|_| label(r.random_bool(0.2))).collect();
        let defective = labels.iter().filter(|l| l.is_defective()).count();
        if defective < k || n - defective < k {
            continue;
        }
        let folds = stratified_kfold(&labels, k, case).unwrap();
        let mut seen = vec![0; n];
        for f in &folds {
            for &i in &f.test {
                seen[i] += 1;
            }
            let mut all: Vec<usize> = f.train.iter().chain(&f.test).copied().collect();
            all.sort_unstable();
            if all != (0..n).collect::<Vec<_>>() {
                problems.push(format!("case {case}: train and test do not partition the rows"));
            }
            let def = f.test.iter().filter(|&&i| labels[i].is_defective()).count() as f64;
            let expected = defective as f64 * f.test.len() as f64 / n as f64;
            if (def - expected).abs() > 1.0 {
                problems.push(format!("case {case}: fold has {def} defective, expected {expected:.2}"));
            }
        }
        if seen.iter().any(|&c| c != 1) {
            problems.push(format!("case {case}: test folds are not an exact partition"));
        }
    }
    verdict(
        6,
        "stratified k-fold",
        problems.is_empty(),
        &format!(
            "{} problems{}",
            problems.len(),
            problems.first().map(|p| format!(" ({p})")).unwrap_or_default()
        ),
    );
}

fn tree_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "timings.json") {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_07_determinism() {
    let a = tree_files(shared_run());
    let dir_b = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance/run_b");
    let out = reproduce_into(&dir_b);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = tree_files(&dir_b);
    let differing: Vec<String> = a
        .keys()
        .chain(b.keys())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .filter(|k| a.get(*k) != b.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    verdict(
        7,
        "determinism",
        differing.is_empty() && !a.is_empty(),
        &format!(
            "two seed-42 runs over {}: {} files compared, {} differ{}",
            available_datasets().join(","),
            a.len(),
            differing.len(),
            missing_note()
        ),
    );
}

#[test]
fn criterion_08_out_of_fold_discipline() {
    let mut r = rng(8);
    let data = random_dataset(&mut r, 60, 3, false);
    let spec = EnsembleSpec {
        stage1: vec![
            LearnerSpec::Knn(KnnParams::default()),
            LearnerSpec::DecisionTree(TreeParams::default()),
        ],
        seed: 8,
        ..Default::default()
    };
    let (_, trace) = stacked_fit_traced(&data, &spec).unwrap();
    let mut scored = vec![0; data.len()];
    let mut overlap = 0;
    for f in &trace.folds {
        let train: HashSet<usize> = f.train.iter().copied().collect();
        for &i in &f.scored {
            scored[i] += 1;
            if train.contains(&i) {
                overlap += 1;
            }
        }
    }
    let once = scored.iter().all(|&c| c == 1);
    verdict(
        8,
        "out-of-fold discipline",
        !trace.folds.is_empty() && overlap == 0 && once,
        &format!(
            "60 instances, {} internal folds, {overlap} rows scored by a model that trained on them, every row scored once: {once}",
            trace.folds.len()
        ),
    );
}

#[test]
fn criterion_09_svm_standardization_invariance() {
    let mut r = rng(9);
    let p = 4;
    let rows: Vec<(Vec<f64>, ClassLabel)> = (0..200)
        .map(|_| {
            let x: Vec<f64> = (0..p).map(|_| r.random_range(-5.0..5.0)).collect();
            let noisy = x[0] + 0.5 * x[1] - 0.3 * x[2] + r.random_range(-1.0..1.0);
            (x, label(noisy > 0.5))
        })
        .collect();
    let scale = [1000.0, 0.001, 37.5, 2.0];
    let shift = [-250.0, 3.0, 1e4, -0.125];
    let affine = |x: &[f64]| -> Vec<f64> { x.iter().enumerate().map(|(j, v)| v * scale[j] + shift[j]).collect() };
    let raw = Dataset::from_rows(rows.clone(), "raw").unwrap();
    let moved = Dataset::from_rows(rows.iter().map(|(x, l)| (affine(x), *l)).collect(), "affine").unwrap();
    let spec = LearnerSpec::Svm(SvmParams {
        seed: 9,
        ..Default::default()
    });
    let a = spec.fit(&raw).unwrap();
    let b = spec.fit(&moved).unwrap();
    let probes: Vec<Vec<f64>> = (0..100).map(|_| (0..p).map(|_| r.random_range(-6.0..6.0)).collect()).collect();
    let differ = probes
        .iter()
        .filter(|q| a.predict(q).label != b.predict(&affine(q)).label)
        .count();
    verdict(
        9,
        "SVM standardization invariance",
        differ == 0,
        &format!("100 probes under per-feature affine maps, {differ} label changes"),
    );
}

#[test]
fn criterion_10_leakage_separation() {
    let run = shared_run();
    let mut details = Vec::new();
    let mut ok = missing_datasets().is_empty();
    for d in available_datasets() {
        let free = read_csv(&run.join(d).join("leakage_free/leakage.csv"));
        let resampled: usize = free.iter().map(|r| r["resampling_duplicates"].parse::<usize>().unwrap()).sum();
        let faithful = read_csv(&run.join(d).join("paper_faithful/leakage.csv"));
        let fractions: Vec<f64> = faithful
            .iter()
            .map(|r| r["duplicate_fraction_of_test"].parse().unwrap())
            .collect();
        let min = fractions.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
        ok &= resampled == 0 && !free.is_empty() && min > 0.0;
        details.push(format!(
            "{d}: leakage_free resampling duplicates {resampled} over {} folds, paper_faithful duplicate fraction min {min:.4} mean {mean:.4}",
            free.len()
        ));
    }
    verdict(10, "leakage separation", ok, &format!("{}{}", details.join("; "), missing_note()));
}

fn ensemble_seconds(dataset: &str, protocol: &str) -> f64 {
    let text = fs::read_to_string(shared_run().join("timings.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v[format!("{}/{protocol}", dataset.to_ascii_uppercase())]["model_seconds"]["ensemble"]
        .as_f64()
        .unwrap()
}

#[test]
fn criterion_11_paper_accuracy_band() {
    let mut ok = missing_datasets().is_empty();
    let mut details = Vec::new();
    for d in available_datasets() {
        let row = summary_row(d, "paper_faithful");
        let seconds = ensemble_seconds(d, "paper_faithful");
        let within = row["within_3pp"] == "true";
        ok &= within && seconds < RUNTIME_LIMIT_SECONDS;
        details.push(format!(
            "{d}: ensemble {}% vs published {}% (diff {} pp), {seconds:.1} s",
            row["ensemble_accuracy"], row["paper_accuracy"], row["difference"]
        ));
    }
    verdict(11, "accuracy within 3 pp", ok, &format!("{}{}", details.join("; "), missing_note()));
}

#[test]
fn criterion_12_ordering_claim() {
    let mut ok = missing_datasets().is_empty();
    let mut details = Vec::new();
    for d in available_datasets() {
        let row = summary_row(d, "paper_faithful");
        ok &= row["ordering_claim"] == "holds";
        let flag = if row["knn_matches_ensemble"] == "true" {
            " [flag: plain knn matches ensemble]"
        } else {
            ""
        };
        details.push(format!(
            "{d}: ensemble {}% vs best baseline {} {}%, {}{flag}",
            row["ensemble_accuracy"], row["best_baseline"], row["best_baseline_accuracy"], row["ordering_claim"]
        ));
    }
    verdict(12, "ordering claim", ok, &format!("{}{}", details.join("; "), missing_note()));
}

#[test]
fn criterion_13_leakage_free_run() {
    let run = shared_run();
    let expected = [
        "report_ensemble.txt",
        "roc_ensemble.csv",
        "roc_ensemble.svg",
        "comparison.csv",
        "comparison.txt",
        "folds.csv",
        "leakage.csv",
        "timings.json",
    ];
    let mut missing = Vec::new();
    for d in available_datasets() {
        for f in expected {
            let p = run.join(d).join("leakage_free").join(f);
            if !p.exists() {
                missing.push(p.display().to_string());
            }
        }
    }
    let deviations = read_csv(&run.join("deviations.csv"));
    let mut gaps = Vec::new();
    for d in available_datasets() {
        let gap = deviations.iter().find(|r| {
            r["dataset"].eq_ignore_ascii_case(d)
                && r["protocol"] == "leakage_free"
                && r["model"] == "ensemble"
                && r["metric"] == "accuracy"
        });
        match gap {
            Some(r) if r["difference"].parse::<f64>().is_ok() => gaps.push(format!("{d} {} pp", r["difference"])),
            _ => missing.push(format!("{d} leakage_free ensemble accuracy deviation")),
        }
    }
    verdict(
        13,
        "leakage-free run and deviation report",
        missing.is_empty() && !gaps.is_empty(),
        &format!(
            "artifacts present for {}; gap vs published: {}{}",
            available_datasets().join(","),
            gaps.join(", "),
            if missing.is_empty() { String::new() } else { format!("; missing {}", missing.join(", ")) }
        ),
    );
}
