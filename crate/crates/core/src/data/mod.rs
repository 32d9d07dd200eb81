//! PROMISE metric datasets: in-memory representation, ARFF/CSV ingestion,
//! schema validation and index-based splitting.

mod arff;
mod delimited;
mod manifest;
mod schema;
mod split;

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use arff::parse_arff;
pub use delimited::{parse_csv, write_csv};
pub use manifest::{ChecksumManifest, ChecksumStatus};
pub use schema::{normalize_name, validate_schema, SchemaViolation, PROMISE_FEATURES};
pub use split::{make_splits, stratified_kfold, Split, SplitError, SplitKind, SplitPlan};

/// Binary defect label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    NonDefective,
    Defective,
}

impl ClassLabel {
    pub fn is_defective(self) -> bool {
        matches!(self, ClassLabel::Defective)
    }

    pub fn other(self) -> Self {
        match self {
            ClassLabel::Defective => ClassLabel::NonDefective,
            ClassLabel::NonDefective => ClassLabel::Defective,
        }
    }

    /// Serialized form used in CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Defective => "true",
            ClassLabel::NonDefective => "false",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Defective => "defective",
            ClassLabel::NonDefective => "non_defective",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Ordered feature attributes plus the name of the label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub attributes: Vec<Attribute>,
    pub label_name: String,
}

impl FeatureSchema {
    pub fn numeric<S: AsRef<str>>(names: &[S], label_name: &str) -> Self {
        FeatureSchema {
            attributes: names
                .iter()
                .map(|n| Attribute {
                    name: n.as_ref().to_string(),
                    kind: AttributeKind::Numeric,
                })
                .collect(),
            label_name: label_name.to_string(),
        }
    }

    /// Canonical 21-attribute PROMISE schema with a `defects` label.
    pub fn promise() -> Self {
        Self::numeric(&PROMISE_FEATURES, "defects")
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: Vec<f64>,
    pub label: ClassLabel,
}

impl Instance {
    pub fn new(features: Vec<f64>, label: ClassLabel) -> Self {
        Instance { features, label }
    }
}

/// Maps serialized label cells onto [`ClassLabel`]. Matching is trimmed and
/// case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMapping {
    pub truthy: Vec<String>,
    pub falsy: Vec<String>,
}

impl Default for LabelMapping {
    fn default() -> Self {
        LabelMapping {
            truthy: ["true", "yes", "Y", "1"].map(String::from).to_vec(),
            falsy: ["false", "no", "N", "0"].map(String::from).to_vec(),
        }
    }
}

impl LabelMapping {
    pub fn map(&self, cell: &str) -> Option<ClassLabel> {
        let cell = strip_quotes(cell.trim());
        if self.truthy.iter().any(|t| t.eq_ignore_ascii_case(cell)) {
            Some(ClassLabel::Defective)
        } else if self.falsy.iter().any(|t| t.eq_ignore_ascii_case(cell)) {
            Some(ClassLabel::NonDefective)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub labels: LabelMapping,
    /// Drop rows containing `?` instead of failing.
    pub drop_missing: bool,
    /// Origin tag; defaults to the ARFF relation name or file stem.
    pub origin: Option<String>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    ArityMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: cannot parse {value:?} as a finite number")]
    NonNumericFeature {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("line {line}: unknown label value {value:?}")]
    UnknownLabelValue { line: usize, value: String },
    #[error("line {line}: missing value (use drop-missing to skip such rows)")]
    MissingValue { line: usize },
    #[error("line {line}: unsupported construct: {what}")]
    Unsupported { line: usize, what: String },
    #[error("dataset has no instances")]
    EmptyDataset,
    #[error("instance {index} has {found} features, schema has {expected}")]
    FeatureCount {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("instance {index} contains a non-finite feature value")]
    NonFinite { index: usize },
    #[error("unrecognised dataset extension for {0} (expected .arff or .csv)")]
    UnknownFormat(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// An immutable table of labelled metric vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: FeatureSchema,
    instances: Vec<Instance>,
    origin: String,
    checksum: String,
}

impl Dataset {
    /// Build a dataset, computing a content checksum over the instances.
    pub fn new(
        schema: FeatureSchema,
        instances: Vec<Instance>,
        origin: impl Into<String>,
    ) -> Result<Self, IngestError> {
        let checksum = content_checksum(&schema, &instances);
        Self::with_checksum(schema, instances, origin, checksum)
    }

    pub fn with_checksum(
        schema: FeatureSchema,
        instances: Vec<Instance>,
        origin: impl Into<String>,
        checksum: impl Into<String>,
    ) -> Result<Self, IngestError> {
        if instances.is_empty() {
            return Err(IngestError::EmptyDataset);
        }
        for (index, inst) in instances.iter().enumerate() {
            if inst.features.len() != schema.len() {
                return Err(IngestError::FeatureCount {
                    index,
                    expected: schema.len(),
                    found: inst.features.len(),
                });
            }
            if inst.features.iter().any(|v| !v.is_finite()) {
                return Err(IngestError::NonFinite { index });
            }
        }
        Ok(Dataset {
            schema,
            instances,
            origin: origin.into(),
            checksum: checksum.into(),
        })
    }

    /// Convenience constructor for tests and synthetic data: numeric features
    /// named `f0..`, label `defects`.
    pub fn from_rows(rows: Vec<(Vec<f64>, ClassLabel)>, origin: &str) -> Result<Self, IngestError> {
        let width = rows.first().map_or(0, |r| r.0.len());
        let names: Vec<String> = (0..width).map(|i| format!("f{i}")).collect();
        let instances = rows
            .into_iter()
            .map(|(features, label)| Instance { features, label })
            .collect();
        Dataset::new(FeatureSchema::numeric(&names, "defects"), instances, origin)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn features(&self, index: usize) -> &[f64] {
        &self.instances[index].features
    }

    pub fn label(&self, index: usize) -> ClassLabel {
        self.instances[index].label
    }

    /// `(defective, non_defective)` counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let d = self
            .instances
            .iter()
            .filter(|i| i.label.is_defective())
            .count();
        (d, self.instances.len() - d)
    }

    /// Materialize the instances at `indices` (repeats allowed) as a new
    /// dataset tagged `origin + suffix`.
    pub fn select(&self, indices: &[usize], suffix: &str) -> Result<Dataset, IngestError> {
        let instances = indices.iter().map(|&i| self.instances[i].clone()).collect();
        Dataset::new(self.schema.clone(), instances, format!("{}{}", self.origin, suffix))
    }

    /// Replace the origin tag.
    pub fn with_origin(mut self, origin: impl Into<String>) -> Self {
        self.origin = origin.into();
        self
    }
}

/// `(defective_fraction, non_defective_fraction)`.
pub fn class_distribution(dataset: &Dataset) -> (f64, f64) {
    let (d, n) = dataset.class_counts();
    let total = (d + n) as f64;
    let df = d as f64 / total;
    (df, n as f64 / total)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn content_checksum(schema: &FeatureSchema, instances: &[Instance]) -> String {
    let mut h = Sha256::new();
    for name in schema.names() {
        h.update(name.as_bytes());
        h.update([0u8]);
    }
    h.update(schema.label_name.as_bytes());
    for inst in instances {
        for v in &inst.features {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update([inst.label.is_defective() as u8]);
    }
    hex::encode(h.finalize())
}

pub(crate) fn strip_quotes(s: &str) -> &str {
    let b = s.as_bytes();
    if b.len() >= 2 && ((b[0] == b'\'' && b[b.len() - 1] == b'\'') || (b[0] == b'"' && b[b.len() - 1] == b'"')) {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

/// Load a `.arff` or `.csv` file (CSV assumed to carry a header row). The
/// checksum is the SHA-256 of the file bytes; the origin defaults to the
/// upper-cased file stem.
pub fn load_dataset(path: &Path, options: &IngestOptions) -> Result<Dataset, IngestError> {
    let bytes = fs::read(path)?;
    let mut options = options.clone();
    if options.origin.is_none() {
        options.origin = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_uppercase());
    }
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "arff" => parse_arff(bytes.as_slice(), &options),
        "csv" => parse_csv(bytes.as_slice(), true, &options),
        _ => Err(IngestError::UnknownFormat(path.display().to_string())),
    }
}
