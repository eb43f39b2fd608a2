//! Tab-separated triple file ingestion.
//!
//! One triple per line: three tab-separated fields, optionally followed by
//! a `1` / `-1` label for classification splits. Benchmark distributions
//! disagree on field order, so the caller picks it per file.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Field layout of a triple file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnOrder {
    /// head, relation, tail
    Hrt,
    /// head, tail, relation
    Htr,
}

impl ColumnOrder {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hrt" => Some(ColumnOrder::Hrt),
            "htr" => Some(ColumnOrder::Htr),
            _ => None,
        }
    }
}

/// A triple as read from disk, names not yet interned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
    pub label: Option<bool>,
}

/// Reads every nonempty line of `path` as one triple, in file order.
pub fn load_triples(path: &Path, order: ColumnOrder) -> Result<Vec<RawTriple>> {
    let content = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(Error::MalformedLine {
                path: path.to_owned(),
                line: idx + 1,
                fields: fields.len(),
            });
        }
        let (head, relation, tail) = match order {
            ColumnOrder::Hrt => (fields[0], fields[1], fields[2]),
            ColumnOrder::Htr => (fields[0], fields[2], fields[1]),
        };
        let label = if fields.len() == 4 {
            match fields[3] {
                "1" => Some(true),
                "-1" => Some(false),
                token => {
                    return Err(Error::UnknownLabel {
                        path: path.to_owned(),
                        line: idx + 1,
                        token: token.to_owned(),
                    })
                }
            }
        } else {
            None
        };
        out.push(RawTriple {
            head: head.to_owned(),
            relation: relation.to_owned(),
            tail: tail.to_owned(),
            label,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn hrt_order_maps_fields_directly() {
        let f = write_tmp("A\tr\tB\n");
        let triples = load_triples(f.path(), ColumnOrder::Hrt).unwrap();
        assert_eq!(triples.len(), 1);
        assert_eq!(
            (triples[0].head.as_str(), triples[0].relation.as_str(), triples[0].tail.as_str()),
            ("A", "r", "B")
        );
        assert_eq!(triples[0].label, None);
    }

    #[test]
    fn htr_order_permutes_fields() {
        let f = write_tmp("A\tB\tr\n");
        let triples = load_triples(f.path(), ColumnOrder::Htr).unwrap();
        assert_eq!(
            (triples[0].head.as_str(), triples[0].relation.as_str(), triples[0].tail.as_str()),
            ("A", "r", "B")
        );
    }

    #[test]
    fn labels_parse_and_preserve_file_order() {
        let f = write_tmp("A\tr\tB\t1\nC\tr\tD\t-1\n\nE\tr\tF\t1\n");
        let triples = load_triples(f.path(), ColumnOrder::Hrt).unwrap();
        assert_eq!(triples.len(), 3);
        assert_eq!(triples[0].label, Some(true));
        assert_eq!(triples[1].label, Some(false));
        assert_eq!(triples[2].head, "E");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = write_tmp("A\tr\tB\nA\tr\n");
        match load_triples(f.path(), ColumnOrder::Hrt) {
            Err(Error::MalformedLine { line, fields, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(fields, 2);
            }
            other => panic!("expected MalformedLine, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_token_is_an_error() {
        let f = write_tmp("A\tr\tB\tyes\n");
        match load_triples(f.path(), ColumnOrder::Hrt) {
            Err(Error::UnknownLabel { line, token, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(token, "yes");
            }
            other => panic!("expected UnknownLabel, got {other:?}"),
        }
    }

    #[test]
    fn crlf_lines_are_accepted() {
        let f = write_tmp("A\tr\tB\r\nC\tr\tD\r\n");
        let triples = load_triples(f.path(), ColumnOrder::Hrt).unwrap();
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[1].tail, "D");
    }
}
