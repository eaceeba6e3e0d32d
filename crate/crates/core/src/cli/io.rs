//! Artifact file formats.

use std::fmt::Write as _;
use std::path::Path;

use crate::baseline::HistogramBin;
use crate::clustereval::{ReplicateOutcome, ScenarioResult};
use crate::spectra::SymmetricMatrix;

/// Full `n x n` matrix, one row per line, 17 significant digits, no header.
pub fn matrix_csv(m: &SymmetricMatrix) -> String {
    let n = m.n();
    let mut out = String::with_capacity(n * n * 25);
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{:.16e}", m.get(i, j)).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug)]
pub enum ParseError {
    Io(String),
    Format(String),
}

/// Reads the full-matrix CSV format. Rows are separated by newlines, values
/// by commas; blank lines are ignored.
pub fn read_matrix_rows(path: &Path) -> Result<Vec<Vec<f64>>, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| ParseError::Format(format!("line {}: bad number '{}'", i + 1, f.trim())))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ParseError::Format("matrix file is empty".into()));
    }
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(ParseError::Format(format!(
            "row {} has {} values but the matrix has {n} rows",
            i + 1,
            r.len()
        )));
    }
    Ok(rows)
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_left,bin_right,count\n");
    for b in bins {
        writeln!(out, "{},{},{}", b.bin_left, b.bin_right, b.count).expect("writing to a String");
    }
    out
}

pub fn spectrum_csv(values: &[f64]) -> String {
    let mut out = String::from("eigenvalue\n");
    for v in values {
        writeln!(out, "{v:.16e}").expect("writing to a String");
    }
    out
}

pub fn cluster_summary_csv(results: &[ScenarioResult]) -> String {
    let mut out = String::from("scenario,min_k,median_k,max_k,median_adj_rand\n");
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.scenario, r.min_k, r.median_k, r.max_k, r.median_adjusted_rand
        )
        .expect("writing to a String");
    }
    out
}

pub fn replicates_csv(outcomes: &[ReplicateOutcome]) -> String {
    let mut out = String::from("replicate,k,silhouette,adjusted_rand\n");
    for o in outcomes {
        writeln!(out, "{},{},{},{}", o.replicate, o.k, o.silhouette, o.adjusted_rand).expect("writing to a String");
    }
    out
}
