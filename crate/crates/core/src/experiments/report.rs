use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mann_whitney_u, mean_std};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub a: String,
    pub b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub std_a: f64,
    pub std_b: f64,
    /// U of the smaller group.
    pub u: f64,
    pub u_a: f64,
    pub z: f64,
    /// One-sided p-value for "a exceeds b".
    pub p_value: f64,
}

/// One-sided Mann-Whitney comparison of two score columns.
pub fn significance(a_name: &str, a: &[f64], b_name: &str, b: &[f64]) -> Result<SignificanceReport> {
    let mw = mann_whitney_u(a, b)?;
    let (mean_a, std_a) = mean_std(a);
    let (mean_b, std_b) = mean_std(b);
    Ok(SignificanceReport {
        a: a_name.to_string(),
        b: b_name.to_string(),
        n_a: a.len(),
        n_b: b.len(),
        mean_a,
        mean_b,
        std_a,
        std_b,
        u: mw.u,
        u_a: mw.u_a,
        z: mw.z,
        p_value: mw.p_greater,
    })
}

/// Reads the named numeric columns, each from the first file that has it.
/// Empty cells are skipped.
pub fn read_columns(paths: &[impl AsRef<Path>], names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Option<Vec<f64>>> = vec![None; names.len()];
    for path in paths {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let headers = reader.headers()?.clone();
        let wanted: Vec<(usize, usize)> = names
            .iter()
            .enumerate()
            .filter(|(k, _)| out[*k].is_none())
            .filter_map(|(k, n)| headers.iter().position(|h| h == *n).map(|col| (k, col)))
            .collect();
        if wanted.is_empty() {
            continue;
        }
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            for (w, &(k, col)) in wanted.iter().enumerate() {
                let cell = rec.get(col).unwrap_or("").trim();
                if cell.is_empty() {
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    line: row + 2,
                    message: format!("{}: column `{}` holds non-numeric `{cell}`", path.display(), names[k]),
                })?;
                cols[w].push(v);
            }
        }
        for ((k, _), col) in wanted.into_iter().zip(cols) {
            out[k] = Some(col);
        }
    }
    names
        .iter()
        .zip(out)
        .map(|(n, c)| c.ok_or_else(|| Error::Argument(format!("column `{n}` not found in the given files"))))
        .collect()
}
