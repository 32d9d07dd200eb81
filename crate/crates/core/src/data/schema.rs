use std::collections::BTreeSet;

use serde::Serialize;

use super::Dataset;

/// The 21 NASA MDP module metrics carried by CM1, KC2 and PC1.
pub const PROMISE_FEATURES: [&str; 21] = [
    "loc",
    "v(g)",
    "ev(g)",
    "iv(g)",
    "n",
    "v",
    "l",
    "d",
    "i",
    "e",
    "b",
    "t",
    "loCode",
    "loComment",
    "loBlank",
    "loCodeandComment",
    "uniq_op",
    "uniq_opnd",
    "total_op",
    "total_opnd",
    "branchCount",
];

/// Spellings seen in distributed PROMISE files that differ from the canonical
/// names by more than case.
const ALIASES: &[(&str, &str)] = &[("loccodeandcomment", "locodeandcomment")];

/// Trimmed, lower-cased attribute name with known spelling variants folded.
pub fn normalize_name(name: &str) -> String {
    let lower = name.trim().to_lowercase();
    ALIASES
        .iter()
        .find(|(variant, _)| *variant == lower)
        .map_or(lower, |(_, canonical)| canonical.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum SchemaViolation {
    MissingAttribute { name: String },
    UnexpectedAttribute { name: String },
    FeatureCount { expected: usize, found: usize },
}

impl std::fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemaViolation::MissingAttribute { name } => write!(f, "missing attribute {name}"),
            SchemaViolation::UnexpectedAttribute { name } => {
                write!(f, "unexpected attribute {name}")
            }
            SchemaViolation::FeatureCount { expected, found } => {
                write!(f, "expected {expected} features, found {found}")
            }
        }
    }
}

/// Check a dataset against the PROMISE feature set.
///
/// Strict mode compares normalized names as sets (order is free, since PC1
/// and CM1 list the line-count attributes in different orders). Lenient mode
/// only requires 21 numeric features.
pub fn validate_schema(dataset: &Dataset, strict_promise: bool) -> Vec<SchemaViolation> {
    let schema = dataset.schema();
    if !strict_promise {
        if schema.len() != PROMISE_FEATURES.len() {
            return vec![SchemaViolation::FeatureCount {
                expected: PROMISE_FEATURES.len(),
                found: schema.len(),
            }];
        }
        return Vec::new();
    }

    let present: BTreeSet<String> = schema.names().map(normalize_name).collect();
    let mut violations = Vec::new();
    for name in PROMISE_FEATURES {
        if !present.contains(&normalize_name(name)) {
            violations.push(SchemaViolation::MissingAttribute {
                name: name.to_string(),
            });
        }
    }
    let expected: BTreeSet<String> = PROMISE_FEATURES.iter().map(|n| normalize_name(n)).collect();
    for name in schema.names() {
        if !expected.contains(&normalize_name(name)) {
            violations.push(SchemaViolation::UnexpectedAttribute {
                name: name.to_string(),
            });
        }
    }
    violations
}
