use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::config::{Balance, Protocol};
use super::experiment::{prepare_folds, FoldLeakage};
use super::HarnessError;
use crate::data::{
    load_dataset, validate_schema, ChecksumManifest, ChecksumStatus, Dataset, IngestOptions, SchemaViolation,
    SplitPlan,
};
use crate::resample::ResampleSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInfo {
    pub origin: String,
    pub instances: usize,
    pub features: usize,
    pub defective: usize,
    pub non_defective: usize,
    pub schema: Vec<SchemaViolation>,
    pub checksum: String,
    /// Status against a `datasets.lock` beside the file, when present.
    pub manifest: Option<ChecksumStatus>,
    pub distinct_vectors: usize,
    /// Feature vectors that occur with both labels.
    pub label_conflicts: usize,
}

pub fn dataset_info(path: &Path, options: &IngestOptions) -> Result<DatasetInfo, HarnessError> {
    let data = load_dataset(path, options).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
    let manifest = ChecksumManifest::load(&path.with_file_name("datasets.lock"))
        .ok()
        .zip(path.file_name())
        .map(|(m, name)| m.check(&name.to_string_lossy(), data.checksum()));
    Ok(summarize(&data, manifest))
}

fn summarize(data: &Dataset, manifest: Option<ChecksumStatus>) -> DatasetInfo {
    let (defective, non_defective) = data.class_counts();
    let mut labels: HashMap<Vec<u64>, HashSet<bool>> = HashMap::new();
    for inst in data.instances() {
        let key = inst.features.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect();
        labels.entry(key).or_default().insert(inst.label.is_defective());
    }
    DatasetInfo {
        origin: data.origin().to_string(),
        instances: data.len(),
        features: data.n_features(),
        defective,
        non_defective,
        schema: validate_schema(data, true),
        checksum: data.checksum().to_string(),
        manifest,
        distinct_vectors: labels.len(),
        label_conflicts: labels.values().filter(|s| s.len() == 2).count(),
    }
}

impl DatasetInfo {
    pub fn to_text(&self) -> String {
        let n = self.instances as f64;
        let mut s = String::new();
        let _ = writeln!(s, "dataset:   {}", self.origin);
        let _ = writeln!(s, "{} instances, {} features", self.instances, self.features);
        let _ = writeln!(
            s,
            "defective:     {:>6} ({:.2}%)",
            self.defective,
            100.0 * self.defective as f64 / n
        );
        let _ = writeln!(
            s,
            "non-defective: {:>6} ({:.2}%)",
            self.non_defective,
            100.0 * self.non_defective as f64 / n
        );
        let _ = writeln!(
            s,
            "distinct feature vectors: {} ({} with conflicting labels)",
            self.distinct_vectors, self.label_conflicts
        );
        if self.schema.is_empty() {
            let _ = writeln!(s, "schema:    ok (PROMISE 21-attribute layout)");
        } else {
            let v: Vec<String> = self.schema.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "schema:    {}", v.join("; "));
        }
        let _ = writeln!(s, "sha256:    {}", self.checksum);
        match &self.manifest {
            Some(ChecksumStatus::Match) => {
                let _ = writeln!(s, "manifest:  match");
            }
            Some(ChecksumStatus::Mismatch { expected, .. }) => {
                let _ = writeln!(s, "manifest:  MISMATCH (expected {expected})");
            }
            Some(ChecksumStatus::NotListed) => {
                let _ = writeln!(s, "manifest:  not listed");
            }
            None => {}
        }
        s
    }
}

/// Duplicate audit of every fold the harness would build, without fitting.
pub fn audit_leakage(
    data: &Dataset,
    protocol: Protocol,
    balance: Balance,
    plan: &SplitPlan,
    resample: &ResampleSpec,
    seed: u64,
) -> Result<Vec<FoldLeakage>, HarnessError> {
    let mut out = Vec::new();
    for r in 0..resample.observations_param as usize {
        for f in prepare_folds(data, protocol, balance, plan, resample, seed, r)? {
            out.push(f.leakage()?);
        }
    }
    Ok(out)
}
