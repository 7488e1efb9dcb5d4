//! Scoring of a prediction file against a ground-truth file.
//!
//! Both files need a header with a `value` column and are aligned row by
//! row. Rows with an empty truth cell are not scored. Quantile predictions
//! go in columns named `q<level>`, e.g. `q0.1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{wql, znorm_mae};
use crate::series::NormStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileScore {
    pub n_points: usize,
    pub mae: f64,
    pub wql: Option<f64>,
    pub quantile_levels: Vec<f64>,
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(|c| c.trim().to_string()).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(Table { headers, rows })
}

fn column(t: &Table, name: &str, path: &Path) -> Result<usize> {
    t.headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("{}: missing column `{name}`", path.display())))
}

fn number(cell: &str, path: &Path, row: usize) -> Result<f64> {
    cell.parse().map_err(|_| {
        Error::Config(format!(
            "{}: row {}: `{cell}` is not a number",
            path.display(),
            row + 2
        ))
    })
}

/// MAE divided by `std`, plus WQL when the prediction file has quantile
/// columns.
pub fn score_files(truth_path: &Path, pred_path: &Path, std: f64) -> Result<FileScore> {
    let truth = read_table(truth_path)?;
    let pred = read_table(pred_path)?;
    if truth.rows.len() != pred.rows.len() {
        return Err(Error::LengthMismatch {
            left: truth.rows.len(),
            right: pred.rows.len(),
        });
    }
    let tv = column(&truth, "value", truth_path)?;
    let pv = column(&pred, "value", pred_path)?;
    let mut qcols: Vec<(f64, usize)> = pred
        .headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            h.strip_prefix('q')
                .and_then(|a| a.parse().ok())
                .map(|a| (a, i))
        })
        .collect();
    qcols.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut x = Vec::new();
    let mut point = Vec::new();
    let mut quantiles: Vec<(f64, Vec<f64>)> = qcols.iter().map(|&(a, _)| (a, Vec::new())).collect();
    for (r, (trow, prow)) in truth.rows.iter().zip(&pred.rows).enumerate() {
        let cell = trow.get(tv).map(String::as_str).unwrap_or("");
        if cell.is_empty() {
            continue;
        }
        x.push(number(cell, truth_path, r)?);
        point.push(number(
            prow.get(pv).map(String::as_str).unwrap_or(""),
            pred_path,
            r,
        )?);
        for (k, &(_, c)) in qcols.iter().enumerate() {
            quantiles[k].1.push(number(
                prow.get(c).map(String::as_str).unwrap_or(""),
                pred_path,
                r,
            )?);
        }
    }
    let mae = znorm_mae(&x, &point, NormStats { mean: 0.0, std })?;
    let levels: Vec<f64> = qcols.iter().map(|q| q.0).collect();
    let wql = if levels.is_empty() {
        None
    } else {
        Some(wql(&quantiles, &x, &levels)?)
    };
    Ok(FileScore {
        n_points: x.len(),
        mae,
        wql,
        quantile_levels: levels,
    })
}
