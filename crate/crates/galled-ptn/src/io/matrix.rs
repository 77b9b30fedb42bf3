//! Character input in two flavors.
//!
//! The sets format lists each character's members:
//!
//! ```text
//! # comments and blank lines are ignored
//! taxa: a b c d
//! C1: a b
//! C2: c d
//! ```
//!
//! The CSV format is a presence/absence matrix with taxa as rows:
//!
//! ```text
//! taxon,C1,C2
//! a,1,0
//! b,1,0
//! c,0,1
//! ```
//!
//! Both parsers can run against an expected registry (taken from a tree read
//! elsewhere); the file's taxa must then match it as a set and the registry's
//! ids win. Without one, the sets format needs its `taxa:` line and the CSV
//! format numbers taxa by row order.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Character, CharacterSet, Taxa, TaxonSet};

fn same_label_set(file_taxa: &Taxa, expected: &Taxa) -> bool {
    file_taxa.len() == expected.len() && file_taxa.labels().all(|l| expected.id(l).is_some())
}

fn reconcile(file_taxa: Option<Taxa>, expected: Option<&Arc<Taxa>>, line: usize) -> Result<Arc<Taxa>> {
    match (file_taxa, expected) {
        (Some(own), Some(given)) => {
            if !same_label_set(&own, given) {
                return Err(Error::MatrixFormat {
                    line,
                    message: "taxa in the file differ from the taxa of the tree".into(),
                });
            }
            Ok(given.clone())
        }
        (Some(own), None) => Ok(Arc::new(own)),
        (None, Some(given)) => Ok(given.clone()),
        (None, None) => Err(Error::MatrixFormat {
            line,
            message: "no `taxa:` line and no tree to take taxa from".into(),
        }),
    }
}

/// Parses the sets format. Character order follows the file.
pub fn parse_sets(input: &str, expected: Option<&Arc<Taxa>>) -> Result<CharacterSet> {
    let mut taxa_line: Option<(Taxa, usize)> = None;
    let mut raw: Vec<(String, Vec<String>, usize)> = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((head, rest)) = line.split_once(':') else {
            return Err(Error::MatrixFormat {
                line: lineno,
                message: "expected `name: member member ...`".into(),
            });
        };
        let head = head.trim();
        let items: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        if head == "taxa" {
            if taxa_line.is_some() {
                return Err(Error::MatrixFormat { line: lineno, message: "second `taxa:` line".into() });
            }
            if !raw.is_empty() {
                return Err(Error::MatrixFormat {
                    line: lineno,
                    message: "`taxa:` must come before the first character".into(),
                });
            }
            let mut taxa = Taxa::new();
            for label in &items {
                taxa.insert(label)?;
            }
            taxa_line = Some((taxa, lineno));
        } else {
            if head.is_empty() {
                return Err(Error::MatrixFormat { line: lineno, message: "empty character name".into() });
            }
            raw.push((head.to_string(), items, lineno));
        }
    }

    let (file_taxa, taxa_lineno) = match taxa_line {
        Some((t, l)) => (Some(t), l),
        None => (None, 1),
    };
    let taxa = reconcile(file_taxa, expected, taxa_lineno)?;

    let mut characters = Vec::with_capacity(raw.len());
    for (name, items, lineno) in raw {
        let mut members = TaxonSet::empty(taxa.len());
        for label in &items {
            members.insert(taxa.require(label)?);
        }
        if items.len() != members.len() {
            return Err(Error::MatrixFormat {
                line: lineno,
                message: format!("character `{name}` lists a taxon twice"),
            });
        }
        characters.push(Character::new(name, members)?);
    }
    CharacterSet::new(taxa, characters)
}

/// Writes the sets format, including the `taxa:` line.
pub fn write_sets(chars: &CharacterSet) -> String {
    let taxa = chars.taxa();
    let mut out = String::new();
    out.push_str("taxa:");
    for label in taxa.labels() {
        out.push(' ');
        out.push_str(label);
    }
    out.push('\n');
    for c in chars.iter() {
        out.push_str(c.name());
        out.push(':');
        for t in c.members().iter() {
            out.push(' ');
            out.push_str(taxa.name(t));
        }
        out.push('\n');
    }
    out
}

/// Parses the CSV format. Taxa come from row order unless `expected` is
/// given; character order follows the columns.
pub fn parse_csv(input: &str, expected: Option<&Arc<Taxa>>) -> Result<CharacterSet> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let Some((header_line, header)) = lines.next() else {
        return Err(Error::MatrixFormat { line: 1, message: "empty matrix".into() });
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"taxon") {
        return Err(Error::MatrixFormat {
            line: header_line,
            message: "header must start with `taxon`".into(),
        });
    }
    let names = &cols[1..];

    let mut file_taxa = Taxa::new();
    let mut rows: Vec<(Vec<bool>, usize)> = Vec::new();
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != cols.len() {
            return Err(Error::MatrixFormat {
                line: lineno,
                message: format!("expected {} cells, found {}", cols.len(), cells.len()),
            });
        }
        file_taxa.insert(cells[0])?;
        let mut states = Vec::with_capacity(names.len());
        for cell in &cells[1..] {
            match *cell {
                "0" => states.push(false),
                "1" => states.push(true),
                other => {
                    return Err(Error::MatrixFormat {
                        line: lineno,
                        message: format!("cell `{other}` is not 0 or 1"),
                    });
                }
            }
        }
        rows.push((states, lineno));
    }

    let row_labels: Vec<String> = file_taxa.labels().map(str::to_string).collect();
    let taxa = reconcile(Some(file_taxa), expected, 2)?;
    let mut characters = Vec::with_capacity(names.len());
    for (col, name) in names.iter().enumerate() {
        let mut members = TaxonSet::empty(taxa.len());
        for (row, (states, _)) in rows.iter().enumerate() {
            if states[col] {
                members.insert(taxa.require(&row_labels[row])?);
            }
        }
        characters.push(Character::new(*name, members)?);
    }
    CharacterSet::new(taxa, characters)
}
