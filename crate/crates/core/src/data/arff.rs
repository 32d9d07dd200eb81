//! ARFF subset reader: `@relation`, numeric or nominal `@attribute`s and
//! dense comma-separated `@data` rows. The last attribute is the label.

use std::collections::HashSet;
use std::io::Read;

use super::{
    normalize_name, sha256_hex, strip_quotes, Dataset, FeatureSchema, IngestError, IngestOptions,
    Instance,
};

#[derive(Debug)]
enum DeclaredType {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug)]
struct Declared {
    name: String,
    ty: DeclaredType,
    line: usize,
}

pub fn parse_arff<R: Read>(mut source: R, options: &IngestOptions) -> Result<Dataset, IngestError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let checksum = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| IngestError::MalformedHeader {
        line: 0,
        reason: format!("input is not UTF-8: {e}"),
    })?;

    let mut relation: Option<String> = None;
    let mut declared: Vec<Declared> = Vec::new();
    let mut data_start: Option<usize> = None;
    let mut lines = text.lines().enumerate();

    for (idx, raw) in lines.by_ref() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (keyword, rest) = split_keyword(line);
        match keyword.to_ascii_lowercase().as_str() {
            "@relation" => relation = Some(strip_quotes(rest.trim()).to_string()),
            "@attribute" => declared.push(parse_attribute(rest, line_no)?),
            "@data" => {
                data_start = Some(line_no);
                break;
            }
            _ => {
                return Err(IngestError::MalformedHeader {
                    line: line_no,
                    reason: format!("unexpected header line {line:?}"),
                })
            }
        }
    }

    let data_line = data_start.ok_or_else(|| IngestError::MalformedHeader {
        line: text.lines().count(),
        reason: "missing @data section".into(),
    })?;
    if declared.len() < 2 {
        return Err(IngestError::MalformedHeader {
            line: data_line,
            reason: format!(
                "need at least one feature and one label attribute, found {}",
                declared.len()
            ),
        });
    }

    let mut seen = HashSet::new();
    for d in &declared {
        if !seen.insert(normalize_name(&d.name)) {
            return Err(IngestError::MalformedHeader {
                line: d.line,
                reason: format!("duplicate attribute name {:?}", d.name),
            });
        }
    }

    let label_decl = declared.pop().expect("checked above");
    for d in &declared {
        if let DeclaredType::Nominal(_) = d.ty {
            return Err(IngestError::Unsupported {
                line: d.line,
                what: format!("nominal feature attribute {:?}", d.name),
            });
        }
    }
    if let DeclaredType::Nominal(values) = &label_decl.ty {
        if values.len() != 2 {
            return Err(IngestError::Unsupported {
                line: label_decl.line,
                what: format!("label attribute with {} nominal values", values.len()),
            });
        }
    }

    let names: Vec<&str> = declared.iter().map(|d| d.name.as_str()).collect();
    let schema = FeatureSchema::numeric(&names, &label_decl.name);
    let arity = declared.len() + 1;

    let mut instances = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if line.starts_with('{') {
            return Err(IngestError::Unsupported {
                line: line_no,
                what: "sparse data row".into(),
            });
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if let Some(inst) = parse_row(&cells, arity, line_no, options)? {
            instances.push(inst);
        }
    }

    let origin = options
        .origin
        .clone()
        .or(relation)
        .unwrap_or_else(|| "unnamed".to_string());
    Dataset::with_checksum(schema, instances, origin, checksum)
}

/// Shared row decoding for ARFF and CSV. Returns `None` when the row was
/// dropped for containing a missing value.
pub(super) fn parse_row(
    cells: &[&str],
    arity: usize,
    line: usize,
    options: &IngestOptions,
) -> Result<Option<Instance>, IngestError> {
    if cells.len() != arity {
        return Err(IngestError::ArityMismatch {
            line,
            expected: arity,
            found: cells.len(),
        });
    }
    if cells.contains(&"?") {
        if options.drop_missing {
            return Ok(None);
        }
        return Err(IngestError::MissingValue { line });
    }
    let (label_cell, feature_cells) = cells.split_last().expect("arity >= 2");
    let mut features = Vec::with_capacity(feature_cells.len());
    for (column, cell) in feature_cells.iter().enumerate() {
        let v: f64 = strip_quotes(cell)
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| IngestError::NonNumericFeature {
                line,
                column: column + 1,
                value: cell.to_string(),
            })?;
        features.push(v);
    }
    let label = options
        .labels
        .map(label_cell)
        .ok_or_else(|| IngestError::UnknownLabelValue {
            line,
            value: label_cell.to_string(),
        })?;
    Ok(Some(Instance { features, label }))
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(pos) => (&line[..pos], &line[pos..]),
        None => (line, ""),
    }
}

fn parse_attribute(rest: &str, line: usize) -> Result<Declared, IngestError> {
    let rest = rest.trim();
    let (name, ty_text) = if let Some(q) = rest.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let close = rest[1..].find(q).ok_or_else(|| IngestError::MalformedHeader {
            line,
            reason: "unterminated quoted attribute name".into(),
        })?;
        (&rest[1..close + 1], rest[close + 2..].trim())
    } else {
        let (n, t) = split_keyword(rest);
        (n, t.trim())
    };
    if name.is_empty() || ty_text.is_empty() {
        return Err(IngestError::MalformedHeader {
            line,
            reason: "attribute needs a name and a type".into(),
        });
    }
    let ty = if ty_text.starts_with('{') {
        let inner = ty_text
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| IngestError::MalformedHeader {
                line,
                reason: format!("bad nominal specification {ty_text:?}"),
            })?;
        DeclaredType::Nominal(
            inner
                .split(',')
                .map(|v| strip_quotes(v.trim()).to_string())
                .collect(),
        )
    } else {
        match ty_text.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => DeclaredType::Numeric,
            other => {
                return Err(IngestError::Unsupported {
                    line,
                    what: format!("attribute type {other:?}"),
                })
            }
        }
    };
    Ok(Declared {
        name: name.to_string(),
        ty,
        line,
    })
}
