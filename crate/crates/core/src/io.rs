//! Dataset file formats.
//!
//! Edge list (CSV, UTF-8):
//!
//! ```text
//! rater,ratee,weight[,seq]
//! alice,bob,5,0
//! ```
//!
//! Without a `seq` column each pair's records are numbered 0, 1, ... in line order.
//!
//! Sociometric matrix: the first line holds the node count `M`, followed by
//! `M` lines of `M` whitespace-separated integer ratings. Cell `(i, j)` is
//! the rating given by node `i` to node `j` (rater on the row); the diagonal
//! must hold the unknown marker. Nodes are labelled `1..=M`, zero-padded to a
//! common width.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{indexed_node_label, validate_dataset, Dataset, InteractionRecord, NodeId, RatingScale};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str, line: u64) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{name} `{field}` is not a non-negative integer"),
    })
}

/// Parses edge-list text. When `manifest` is `None` the node set is the
/// union of raters and ratees.
pub fn parse_edge_csv(text: &str, scale: RatingScale, manifest: Option<Vec<NodeId>>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_ascii_lowercase)
        .collect();
    let has_seq = match header.as_slice() {
        [a, b, c] if a == "rater" && b == "ratee" && c == "weight" => false,
        [a, b, c, d] if a == "rater" && b == "ratee" && c == "weight" && d == "seq" => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `rater,ratee,weight[,seq]`, got `{}`", header.join(",")),
            })
        }
    };
    let width = if has_seq { 4 } else { 3 };

    let mut next_seq: HashMap<(String, String), u64> = HashMap::new();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
        let (rater, ratee) = (row[0].to_owned(), row[1].to_owned());
        if rater.is_empty() || ratee.is_empty() {
            return Err(Error::Parse { line, message: "empty node identifier".into() });
        }
        let weight: i64 = row[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("weight `{}` is not an integer", &row[2]),
        })?;
        let seq = if has_seq {
            parse_field(&row[3], "seq", line)?
        } else {
            let counter = next_seq.entry((rater.clone(), ratee.clone())).or_insert(0);
            *counter += 1;
            *counter - 1
        };
        records.push(InteractionRecord::new(rater, ratee, weight, seq));
    }

    let nodes = manifest.unwrap_or_else(|| {
        let mut ids: Vec<NodeId> = records
            .iter()
            .flat_map(|r| [r.rater.clone(), r.ratee.clone()])
            .collect();
        ids.sort();
        ids.dedup();
        ids
    });
    validate_dataset(nodes, records, scale)
}

pub fn load_edge_csv(path: &Path, scale: RatingScale, manifest: Option<Vec<NodeId>>) -> Result<Dataset> {
    parse_edge_csv(&read(path)?, scale, manifest)
}

/// One identifier per non-empty line.
pub fn load_node_manifest(path: &Path) -> Result<Vec<NodeId>> {
    Ok(read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(NodeId::from)
        .collect())
}

pub fn write_edge_csv(dataset: &Dataset) -> String {
    let mut out = String::from("rater,ratee,weight,seq\n");
    for r in dataset.records() {
        let _ = writeln!(out, "{},{},{},{}", r.rater, r.ratee, r.weight, r.seq_index);
    }
    out
}

pub fn write_node_manifest(dataset: &Dataset) -> String {
    dataset.nodes().iter().map(|n| format!("{n}\n")).collect()
}

pub fn parse_matrix(text: &str, scale: RatingScale, transpose: bool) -> Result<Dataset> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let m: usize = lines
        .next()
        .ok_or_else(|| Error::MatrixShape("empty file".into()))?
        .parse()
        .map_err(|_| Error::MatrixShape("first line must be the node count".into()))?;
    let rows: Vec<&str> = lines.collect();
    if rows.len() != m {
        return Err(Error::MatrixShape(format!("declared {m} nodes but found {} rows", rows.len())));
    }

    let mut cells = vec![vec![0i64; m]; m];
    for (i, row) in rows.iter().enumerate() {
        let values: Vec<&str> = row.split_whitespace().collect();
        if values.len() != m {
            return Err(Error::MatrixShape(format!(
                "row {} has {} cells, expected {m}",
                i + 1,
                values.len()
            )));
        }
        for (j, v) in values.iter().enumerate() {
            let cell_err = |message: String| Error::MatrixCell { row: i + 1, column: j + 1, message };
            let w: i64 = v.parse().map_err(|_| cell_err(format!("`{v}` is not an integer")))?;
            if !scale.accepts(w) {
                return Err(cell_err(format!(
                    "rating {w} outside {}..={} and not the unknown marker {}",
                    scale.min_valid(),
                    scale.max_valid(),
                    scale.unknown_value()
                )));
            }
            if i == j && w != scale.unknown_value() {
                return Err(cell_err(format!(
                    "diagonal must hold the unknown marker {}, found {w}",
                    scale.unknown_value()
                )));
            }
            cells[i][j] = w;
        }
    }

    let nodes: Vec<NodeId> = (0..m).map(|i| indexed_node_label(i, m)).collect();
    let mut records = Vec::new();
    for (i, row) in cells.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if i == j || w == scale.unknown_value() {
                continue;
            }
            let (rater, ratee) = if transpose { (j, i) } else { (i, j) };
            records.push(InteractionRecord::new(nodes[rater].clone(), nodes[ratee].clone(), w, 0));
        }
    }
    validate_dataset(nodes, records, scale)
}

pub fn load_matrix(path: &Path, scale: RatingScale, transpose: bool) -> Result<Dataset> {
    parse_matrix(&read(path)?, scale, transpose)
}

/// Renders a dataset as a matrix in node order. Each pair may carry at most one record.
pub fn write_matrix(dataset: &Dataset) -> Result<String> {
    let m = dataset.len();
    let unknown = dataset.scale().unknown_value();
    let mut cells = vec![vec![unknown; m]; m];
    let mut filled = vec![vec![false; m]; m];
    for r in dataset.records() {
        let i = dataset.node_index(&r.rater).expect("validated");
        let j = dataset.node_index(&r.ratee).expect("validated");
        if filled[i][j] {
            return Err(Error::MatrixShape(format!(
                "pair `{}` -> `{}` has more than one record; a matrix holds one rating per pair",
                r.rater, r.ratee
            )));
        }
        filled[i][j] = true;
        cells[i][j] = r.weight;
    }
    let mut out = format!("{m}\n");
    for row in cells {
        let line: Vec<String> = row.iter().map(i64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}
