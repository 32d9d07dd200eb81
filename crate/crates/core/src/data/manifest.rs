//! `datasets.lock`: one `<sha256>  <file name>` line per fixture, the same
//! layout `sha256sum` prints.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChecksumManifest {
    entries: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChecksumStatus {
    Match,
    Mismatch { expected: String, actual: String },
    NotListed,
}

impl ChecksumManifest {
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                let mut parts = l.split_whitespace();
                let sum = parts.next()?;
                let name = parts.next()?.trim_start_matches('*');
                Some((name.to_string(), sum.to_ascii_lowercase()))
            })
            .collect();
        ChecksumManifest { entries }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn expected(&self, file_name: &str) -> Option<&str> {
        self.entries.get(file_name).map(String::as_str)
    }

    pub fn check(&self, file_name: &str, actual: &str) -> ChecksumStatus {
        match self.expected(file_name) {
            None => ChecksumStatus::NotListed,
            Some(e) if e.eq_ignore_ascii_case(actual) => ChecksumStatus::Match,
            Some(e) => ChecksumStatus::Mismatch {
                expected: e.to_string(),
                actual: actual.to_string(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sha256sum_output() {
        let m = ChecksumManifest::parse("# fixtures\nabc123  cm1.arff\nDEF *pc1.arff\n");
        assert_eq!(m.check("cm1.arff", "ABC123"), ChecksumStatus::Match);
        assert_eq!(m.check("pc1.arff", "def"), ChecksumStatus::Match);
        assert!(matches!(m.check("cm1.arff", "zzz"), ChecksumStatus::Mismatch { .. }));
        assert_eq!(m.check("kc2.arff", "x"), ChecksumStatus::NotListed);
    }
}
