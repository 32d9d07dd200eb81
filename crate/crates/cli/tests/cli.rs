use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn defectlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defectlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dataset_info_counts() {
    for (file, line) in [("cm1.arff", "498 instances"), ("pc1.arff", "1109 instances")] {
        let o = defectlab(&["dataset-info", "--dataset", fixture(file).to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains(line));
    }
}

#[test]
fn unknown_model_is_a_config_error() {
    let o = defectlab(&[
        "run",
        "--dataset",
        fixture("cm1.arff").to_str().unwrap(),
        "--models",
        "knn,gradient_boost",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.starts_with("error[config]:"), "{e}");
    assert!(e.contains("gradient_boost"), "{e}");
}

#[test]
fn missing_seed_is_a_config_error() {
    let o = defectlab(&["run", "--dataset", fixture("cm1.arff").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn missing_fixture_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("cm1.arff"), dir.path().join("cm1.arff")).unwrap();
    let o = defectlab(&[
        "reproduce-tables",
        "--fixtures",
        dir.path().to_str().unwrap(),
        "--datasets",
        "cm1,kc2",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("kc2.arff"), "{}", stderr(&o));
}

#[test]
fn corrupt_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.arff");
    fs::write(&path, "@relation broken\n@attribute a numeric\n@data\n1,2,3\n").unwrap();
    let o = defectlab(&["dataset-info", "--dataset", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = defectlab(&[
        "run",
        "--dataset",
        fixture("cm1.arff").to_str().unwrap(),
        "--models",
        "knn,decision_tree",
        "--seed",
        "7",
        "--protocol",
        "leakage-free",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["report_knn.txt", "roc_decision_tree.csv", "comparison.csv", "folds.csv", "leakage.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(out.join("report_knn.txt")).unwrap();
    assert!(report.contains("leakage_free"), "{report}");
}

#[test]
fn run_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("cm1.arff"), dir.path().join("cm1.arff")).unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "seed = 3\nmodels = [\"naive_bayes\", { id = \"knn1\", spec = { kind = \"knn\", k = 1 } }]\noutput_dir = \"results\"\n\n[dataset]\npath = \"cm1.arff\"\n",
    )
    .unwrap();
    let o = defectlab(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("results/report_knn1.txt").exists());
}
