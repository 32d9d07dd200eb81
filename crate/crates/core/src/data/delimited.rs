//! CSV reading and writing. The final column is the label.

use std::collections::HashSet;
use std::io::{Read, Write};

use super::arff::parse_row;
use super::{normalize_name, sha256_hex, Dataset, FeatureSchema, IngestError, IngestOptions};

pub fn parse_csv<R: Read>(
    mut source: R,
    has_header: bool,
    options: &IngestOptions,
) -> Result<Dataset, IngestError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let checksum = sha256_hex(&bytes);

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(None)
        .from_reader(bytes.as_slice());

    let mut records = reader.records();
    let first = match records.next() {
        None => {
            return Err(IngestError::MalformedHeader {
                line: 1,
                reason: "empty input".into(),
            })
        }
        Some(r) => r.map_err(csv_error)?,
    };
    if first.len() < 2 {
        return Err(IngestError::MalformedHeader {
            line: 1,
            reason: format!("need at least two columns, found {}", first.len()),
        });
    }
    let arity = first.len();

    let schema = if has_header {
        let names: Vec<&str> = first.iter().collect();
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || !seen.insert(normalize_name(n)) {
                return Err(IngestError::MalformedHeader {
                    line: 1,
                    reason: format!("empty or duplicate column name {n:?}"),
                });
            }
        }
        let (label, features) = names.split_last().expect("arity >= 2");
        FeatureSchema::numeric(features, label)
    } else {
        let names: Vec<String> = (0..arity - 1).map(|i| format!("f{i}")).collect();
        FeatureSchema::numeric(&names, "defects")
    };

    let mut instances = Vec::new();
    let mut push = |record: csv::StringRecord| -> Result<(), IngestError> {
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            return Ok(());
        }
        let cells: Vec<&str> = record.iter().collect();
        if let Some(inst) = parse_row(&cells, arity, line, options)? {
            instances.push(inst);
        }
        Ok(())
    };
    if !has_header {
        push(first)?;
    }
    for record in records {
        push(record.map_err(csv_error)?)?;
    }

    let origin = options.origin.clone().unwrap_or_else(|| "unnamed".to_string());
    Dataset::with_checksum(schema, instances, origin, checksum)
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::MalformedHeader {
            line,
            reason: format!("{other:?}"),
        },
    }
}

/// Write a header row plus one row per instance. Values use the shortest
/// representation that round-trips to the identical `f64`.
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = dataset.schema().names().collect();
    header.push(&dataset.schema().label_name);
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for inst in dataset.instances() {
        row.clear();
        row.extend(inst.features.iter().map(|v| format!("{v:?}")));
        row.push(inst.label.as_str().to_string());
        w.write_record(&row)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_arff, ClassLabel, PROMISE_FEATURES};

    #[test]
    fn header_row_parses() {
        let header = format!("{},defects", PROMISE_FEATURES.join(","));
        let row = format!("{},false", vec!["1.1"; 21].join(","));
        let ds = parse_csv(format!("{header}\n{row}\n").as_bytes(), true, &IngestOptions::default()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.label(0), ClassLabel::NonDefective);
        assert_eq!(ds.n_features(), 21);
        assert_eq!(ds.schema().attributes[0].name, "loc");
    }

    #[test]
    fn synthetic_names_without_header() {
        let ds = parse_csv("1,2,Y\n3,4,N\n".as_bytes(), false, &IngestOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        let names: Vec<&str> = ds.schema().names().collect();
        assert_eq!(names, ["f0", "f1"]);
        assert_eq!(ds.schema().label_name, "defects");
    }

    #[test]
    fn empty_input_is_malformed() {
        let err = parse_csv("".as_bytes(), true, &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedHeader { .. }));
    }

    #[test]
    fn ragged_row() {
        let err = parse_csv("a,b,defects\n1,2,true\n1,true\n".as_bytes(), true, &IngestOptions::default())
            .unwrap_err();
        assert!(matches!(err, IngestError::ArityMismatch { expected: 3, found: 2, line: 3 }));
    }

    #[test]
    fn arff_and_csv_agree() {
        let arff = "@relation t\n@attribute loc numeric\n@attribute v(g) numeric\n@attribute defects {false,true}\n@data\n1,2,false\n3.5,4,true\n";
        let csv = "loc,v(g),defects\n1,2,false\n3.5,4,true\n";
        let a = parse_arff(arff.as_bytes(), &IngestOptions::default()).unwrap();
        let c = parse_csv(csv.as_bytes(), true, &IngestOptions::default()).unwrap();
        assert_eq!(a.schema(), c.schema());
        assert_eq!(a.instances(), c.instances());
    }
}
