use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::data::{SplitKind, SplitPlan};
use crate::ensembles::{pipeline_for_dataset, predefined_pipeline, PIPELINE_NAMES};
use crate::learner::LearnerSpec;
use crate::resample::ResampleSpec;

/// Order in which balancing and splitting happen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Balance the whole dataset, then split. Copies of a row may land on
    /// both sides of a split.
    PaperFaithful,
    /// Split, then balance each training portion only.
    #[default]
    LeakageFree,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::PaperFaithful => "paper_faithful",
            Protocol::LeakageFree => "leakage_free",
        }
    }

    /// Accepts `paper_faithful` or `paper-faithful` (likewise for leakage-free).
    pub fn parse(s: &str) -> Option<Protocol> {
        match s.replace('-', "_").as_str() {
            "paper_faithful" => Some(Protocol::PaperFaithful),
            "leakage_free" => Some(Protocol::LeakageFree),
            _ => None,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Balance {
    None,
    #[default]
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    pub path: PathBuf,
    /// Expected SHA-256 of the file bytes.
    #[serde(default)]
    pub checksum: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelEntry {
    /// A base learner name, a pipeline name, or `ensemble` for the dataset's
    /// predefined pipeline.
    Name(String),
    Inline { id: String, spec: LearnerSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetRef,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default = "default_split")]
    pub split: SplitPlan,
    #[serde(default)]
    pub resample: ResampleSpec,
    #[serde(default)]
    pub balance: Balance,
    pub models: Vec<ModelEntry>,
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// z-score features inside every KNN.
    #[serde(default)]
    pub standardize: bool,
    /// Score stacking training rows in-sample instead of out-of-fold.
    #[serde(default)]
    pub meta_insample: bool,
    #[serde(default)]
    pub allow_checksum_mismatch: bool,
    #[serde(default)]
    pub drop_missing: bool,
}

fn default_split() -> SplitPlan {
    SplitPlan::kfold(10, true, 0)
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A model to evaluate, with the id used in file names and tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub id: String,
    pub spec: LearnerSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("invalid config: {}", one_line(&e.to_string()))))
    }

    /// Read a config file; a relative dataset path or output directory is
    /// taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.dataset.path.is_relative() {
            cfg.dataset.path = base.join(&cfg.dataset.path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Upper-case file stem, e.g. `CM1`.
    pub fn dataset_name(&self) -> String {
        self.dataset
            .path
            .file_stem()
            .map(|s| s.to_string_lossy().to_uppercase())
            .unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.models.is_empty() {
            return Err(HarnessError::Config("models list is empty".into()));
        }
        if self.resample.observations_param == 0 {
            return Err(HarnessError::Config("resample.observations_param must be positive".into()));
        }
        match self.split.kind {
            SplitKind::Kfold { k } if k < 2 => {
                return Err(HarnessError::Config(format!("split.k must be at least 2, got {k}")))
            }
            SplitKind::Holdout { train_fraction } if !(train_fraction > 0.0 && train_fraction < 1.0) => {
                return Err(HarnessError::Config(format!(
                    "split.train_fraction must lie in (0, 1), got {train_fraction}"
                )))
            }
            _ => {}
        }
        Ok(())
    }

    /// Resolve model entries into specs, applying the KNN and stacking
    /// switches.
    pub fn resolve_models(&self) -> Result<Vec<ResolvedModel>, HarnessError> {
        let dataset = self.dataset_name();
        let mut out = Vec::new();
        let mut ids = HashSet::new();
        for entry in &self.models {
            let mut m = match entry {
                ModelEntry::Name(name) => resolve_name(name, &dataset)?,
                ModelEntry::Inline { id, spec } => ResolvedModel {
                    id: id.clone(),
                    spec: spec.clone(),
                },
            };
            if !valid_id(&m.id) {
                return Err(HarnessError::Config(format!(
                    "model id {:?} must be non-empty and use only letters, digits, '_' or '-'",
                    m.id
                )));
            }
            if !ids.insert(m.id.clone()) {
                return Err(HarnessError::Config(format!("duplicate model id {:?}", m.id)));
            }
            if self.standardize {
                m.spec.map_knn(&mut |p| p.standardize = true);
            }
            if self.meta_insample {
                m.spec.map_ensembles(&mut |e| e.in_sample = true);
            }
            out.push(m);
        }
        Ok(out)
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn resolve_name(name: &str, dataset: &str) -> Result<ResolvedModel, HarnessError> {
    if let Some(spec) = LearnerSpec::by_name(name) {
        return Ok(ResolvedModel {
            id: spec.kind_name().to_string(),
            spec,
        });
    }
    if name == "ensemble" {
        let pipeline = pipeline_for_dataset(dataset).ok_or_else(|| {
            HarnessError::Config(format!(
                "model \"ensemble\": no predefined pipeline for dataset {dataset}; name one of {}",
                PIPELINE_NAMES.join(", ")
            ))
        })?;
        return Ok(ResolvedModel {
            id: "ensemble".into(),
            spec: LearnerSpec::Stacked(predefined_pipeline(pipeline).expect("known pipeline")),
        });
    }
    if let Ok(spec) = predefined_pipeline(name) {
        return Ok(ResolvedModel {
            id: name.to_string(),
            spec: LearnerSpec::Stacked(spec),
        });
    }
    Err(HarnessError::Config(format!("unknown model id {name:?}")))
}

pub(crate) fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 42
models = ["svm", "tree", "ensemble"]

[dataset]
path = "cm1.arff"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.protocol, Protocol::LeakageFree);
        assert_eq!(c.split, SplitPlan::kfold(10, true, 0));
        assert_eq!(c.resample.observations_param, 7);
        assert_eq!(c.balance, Balance::Bootstrap);
        let ids: Vec<_> = c.resolve_models().unwrap().into_iter().map(|m| m.id).collect();
        assert_eq!(ids, ["svm", "decision_tree", "ensemble"]);
    }

    #[test]
    fn seed_is_mandatory() {
        let text = MINIMAL.replace("seed = 42", "");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(HarnessError::Config(_))));
    }

    #[test]
    fn unknown_model_is_named() {
        let text = MINIMAL.replace("\"svm\"", "\"perceptron\"");
        let err = ExperimentConfig::from_toml(&text).unwrap().resolve_models().unwrap_err();
        assert!(err.to_string().contains("perceptron"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn full_config_roundtrip() {
        let text = r#"
seed = 7
protocol = "paper_faithful"
balance = "none"
output_dir = "results"
standardize = true

[dataset]
path = "fixtures/pc1.arff"
checksum = "abc"

[split]
kind = "holdout"
train_fraction = 0.7
stratified = false

[resample]
strategy = "ratio"
target_minority_fraction = 0.4
observations_param = 3

[[models]]
id = "knn3"
[models.spec]
kind = "knn"
k = 3

[[models]]
id = "stack"
[models.spec]
kind = "stacked"
stage1 = [{ kind = "naive_bayes" }, { kind = "svm", epochs = 5 }]
[models.spec.stage2]
meta_input = "scores_only"
learner = { kind = "knn", k = 1 }
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.split, SplitPlan::holdout(0.7, false, 0));
        let models = c.resolve_models().unwrap();
        assert_eq!(models[0].spec, LearnerSpec::Knn(crate::classifiers::KnnParams {
            k: 3,
            standardize: true,
            ..Default::default()
        }));
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn protocol_names() {
        assert_eq!(Protocol::parse("paper-faithful"), Some(Protocol::PaperFaithful));
        assert_eq!(Protocol::parse("leakage_free"), Some(Protocol::LeakageFree));
        assert_eq!(Protocol::parse("other"), None);
    }
}
