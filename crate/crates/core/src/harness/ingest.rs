//! CSV ingestion onto the regular tick grid.
//!
//! A header row is required. The time column holds either integer ticks or
//! ISO-8601 datetimes; datetimes are converted to ticks using the dataset's
//! steps per day. Ticks absent from the file become unobserved positions,
//! and an empty target cell is unobserved too.

use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::series::{Channel, FrequencySpec, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvColumns {
    pub time: String,
    pub value: String,
    pub covariates: Vec<String>,
}

impl Default for CsvColumns {
    fn default() -> Self {
        Self {
            time: "timestamp".into(),
            value: "value".into(),
            covariates: Vec::new(),
        }
    }
}

enum Stamp {
    Tick(i64),
    Seconds(i64),
}

fn parse_stamp(cell: &str) -> Option<Stamp> {
    let cell = cell.trim();
    if let Ok(t) = cell.parse::<i64>() {
        return Some(Stamp::Tick(t));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(cell) {
        return Some(Stamp::Seconds(dt.timestamp()));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(cell, fmt) {
            return Some(Stamp::Seconds(dt.and_utc().timestamp()));
        }
    }
    NaiveDate::parse_from_str(cell, "%Y-%m-%d").ok().map(|d| {
        Stamp::Seconds(
            d.and_hms_opt(0, 0, 0)
                .expect("midnight")
                .and_utc()
                .timestamp(),
        )
    })
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(f64::NAN);
    }
    cell.parse::<f64>().map_err(|_| {
        Error::Config(format!(
            "row {row}: `{cell}` in column `{column}` is not a number"
        ))
    })
}

/// Reads `path` into a series on the tick grid spanned by its timestamps.
pub fn ingest_csv(
    path: &Path,
    id: &str,
    columns: &CsvColumns,
    freq: FrequencySpec,
) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("{}: missing column `{name}`", path.display())))
    };
    let time_col = find(&columns.time)?;
    let value_col = find(&columns.value)?;
    let cov_cols = columns
        .covariates
        .iter()
        .map(|c| find(c))
        .collect::<Result<Vec<_>>>()?;

    let step_seconds = 86_400 / freq.steps_per_day() as i64;
    if step_seconds * freq.steps_per_day() as i64 != 86_400 {
        return Err(Error::Config(format!(
            "steps_per_day = {} does not divide a day into whole seconds",
            freq.steps_per_day()
        )));
    }

    // (tick, value, covariates, raw stamp text)
    let mut rows: Vec<(i64, f64, Vec<f64>, String)> = Vec::new();
    let mut origin: Option<i64> = None;
    let mut kind_is_tick: Option<bool> = None;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let line = r + 2;
        let raw = record.get(time_col).unwrap_or("").to_string();
        let stamp = parse_stamp(&raw)
            .ok_or_else(|| Error::Config(format!("row {line}: cannot parse timestamp `{raw}`")))?;
        let tick = match stamp {
            Stamp::Tick(t) => {
                if kind_is_tick == Some(false) {
                    return Err(Error::NonUniformSampling);
                }
                kind_is_tick = Some(true);
                t
            }
            Stamp::Seconds(s) => {
                if kind_is_tick == Some(true) {
                    return Err(Error::NonUniformSampling);
                }
                kind_is_tick = Some(false);
                let o = *origin.get_or_insert(s);
                let delta = s - o;
                if delta.rem_euclid(step_seconds) != 0 {
                    return Err(Error::NonUniformSampling);
                }
                delta.div_euclid(step_seconds)
            }
        };
        let value = parse_cell(record.get(value_col).unwrap_or(""), line, &columns.value)?;
        let covs = cov_cols
            .iter()
            .zip(&columns.covariates)
            .map(|(&c, name)| parse_cell(record.get(c).unwrap_or(""), line, name))
            .collect::<Result<Vec<_>>>()?;
        rows.push((tick, value, covs, raw));
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("{}: no data rows", path.display())));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateTimestamp(w[1].3.clone()));
    }

    let first = rows[0].0;
    let n = (rows[rows.len() - 1].0 - first + 1) as usize;
    let mut values = vec![f64::NAN; n];
    let mut obs = vec![false; n];
    let mut cov_values = vec![vec![f64::NAN; n]; columns.covariates.len()];
    for (tick, value, covs, _) in rows {
        let i = (tick - first) as usize;
        values[i] = value;
        obs[i] = value.is_finite();
        for (k, c) in covs.into_iter().enumerate() {
            cov_values[k][i] = c;
        }
    }
    let channels = columns
        .covariates
        .iter()
        .zip(cov_values)
        .map(|(name, v)| Channel::new(name.clone(), v))
        .collect();
    let start = if kind_is_tick == Some(true) { first } else { 0 };
    TimeSeries::new(id, start, values, obs, channels, freq)
}

/// Writes a series as `timestamp,value,<covariates...>` with integer ticks.
/// Unobserved cells are left empty.
pub fn write_series_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["timestamp".to_string(), "value".to_string()];
    header.extend(series.covariates.iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    let fmt = |v: f64| {
        if v.is_finite() {
            format!("{v}")
        } else {
            String::new()
        }
    };
    for (i, tick) in series.timestamps().enumerate() {
        let mut row = vec![tick.to_string(), fmt(series.values[i])];
        row.extend(series.covariates.iter().map(|c| fmt(c.values[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
