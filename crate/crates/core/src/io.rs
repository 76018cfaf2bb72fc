//! Text formats: edge lists, distance-matrix CSV and terminal lists.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::GraphInput;
use crate::metric::MetricSpace;

/// Parses `u v w` lines. Blank lines and lines starting with `#` are skipped;
/// the vertex count is one more than the largest index seen.
pub fn parse_edge_list(text: &str) -> Result<GraphInput> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!("expected `u v w`, found {} fields", fields.len())));
        }
        let u: usize = fields[0].parse().map_err(|e| err(format!("vertex `{}`: {e}", fields[0])))?;
        let v: usize = fields[1].parse().map_err(|e| err(format!("vertex `{}`: {e}", fields[1])))?;
        let w: f64 = fields[2].parse().map_err(|e| err(format!("weight `{}`: {e}", fields[2])))?;
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    let g = GraphInput { n, edges };
    g.validate()?;
    Ok(g)
}

pub fn write_edge_list(g: &GraphInput) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# n={} m={}", g.n, g.edges.len());
    for &(u, v, w) in &g.edges {
        let _ = writeln!(out, "{u} {v} {w}");
    }
    out
}

/// Parses an `n x n` CSV of decimals without a header row.
pub fn parse_distance_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("value `{f}`: {e}") }))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_distance_csv(m: &MetricSpace) -> String {
    let mut out = String::new();
    for i in 0..m.len() {
        let row: Vec<String> = m.row(i).iter().map(|d| d.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One index per line; blank lines and `#` comments are skipped.
pub fn parse_terminals(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t = line.parse().map_err(|e| Error::Parse { line: lineno + 1, msg: format!("terminal `{line}`: {e}") })?;
        out.push(t);
    }
    Ok(out)
}

/// Loads a metric: `.csv` files are distance tables (fully validated),
/// anything else is an edge list closed under shortest paths.
pub fn load_metric(path: &Path) -> Result<MetricSpace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    metric_from_text(&text, is_csv(path))
}

pub fn metric_from_text(text: &str, csv: bool) -> Result<MetricSpace> {
    if csv {
        MetricSpace::from_distance_matrix(&parse_distance_csv(text)?, true)
    } else {
        MetricSpace::from_weighted_graph(&parse_edge_list(text)?)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}
