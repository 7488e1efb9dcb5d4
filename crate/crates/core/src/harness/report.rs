//! Report files: `results.json`, `results.csv`, `ranks.csv` and `report.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::run::BenchReport;
use crate::error::{Error, Result};
use crate::metrics::ScoreRecord;

const CSV_HEADER: [&str; 7] = [
    "dataset",
    "imputer_id",
    "scenario_label",
    "segment_start",
    "n_points",
    "mae",
    "wql",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Best,
    Second,
    Plain,
}

/// Lowest value(s) are `Best`, the next distinct value(s) `Second`.
pub fn mark_best(values: &[f64]) -> Vec<Mark> {
    let mut distinct: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    values
        .iter()
        .map(|v| match distinct.iter().position(|d| d == v) {
            Some(0) => Mark::Best,
            Some(1) => Mark::Second,
            _ => Mark::Plain,
        })
        .collect()
}

fn cell(v: f64, mark: Mark) -> String {
    match mark {
        Mark::Best => format!("**{v:.4}**"),
        Mark::Second => format!("<u>{v:.4}</u>"),
        Mark::Plain => format!("{v:.4}"),
    }
}

fn table_header(out: &mut String, first: &str, imputers: &[String]) {
    let _ = writeln!(out, "| {first} | {} |", imputers.join(" | "));
    let _ = writeln!(out, "|---|{}", "---|".repeat(imputers.len()));
}

fn table_row(out: &mut String, name: &str, values: &[Option<f64>]) {
    let present: Vec<f64> = values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let marks = mark_best(&present);
    let cells: Vec<String> = values
        .iter()
        .zip(marks)
        .map(|(v, m)| v.map_or_else(|| "–".to_string(), |v| cell(v, m)))
        .collect();
    let _ = writeln!(out, "| {name} | {} |", cells.join(" | "));
}

/// Markdown summary: one table per dataset (rows = scenarios, columns =
/// imputers, best in bold, second underlined), dataset means and ranks.
pub fn render_markdown(report: &BenchReport) -> String {
    let imputers = &report.meta.imputers;
    let mut out = String::new();
    let _ = writeln!(out, "# Imputation benchmark\n");
    let _ = writeln!(
        out,
        "seed `{}`, config digest `{}`, version {}\n",
        report.meta.seed, report.meta.config_digest, report.meta.version
    );
    for n in &report.meta.notes {
        let _ = writeln!(out, "- {n}");
    }
    let _ = writeln!(out);

    let mut cells: BTreeMap<(String, String), BTreeMap<String, f64>> = BTreeMap::new();
    for c in &report.aggregates.cells {
        if let (Some(d), Some(i), Some(s)) = (&c.dataset, &c.imputer_id, &c.scenario_label) {
            cells
                .entry((d.clone(), s.clone()))
                .or_default()
                .insert(i.clone(), c.mae);
        }
    }
    let mut datasets: Vec<String> = Vec::new();
    for r in &report.records {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
    }

    let _ = writeln!(out, "## Z-normalized MAE\n");
    for d in &datasets {
        let _ = writeln!(out, "### {d}\n");
        table_header(&mut out, "scenario", imputers);
        for s in &report.meta.scenarios {
            let Some(row) = cells.get(&(d.clone(), s.clone())) else {
                continue;
            };
            let values: Vec<Option<f64>> = imputers.iter().map(|i| row.get(i).copied()).collect();
            table_row(&mut out, s, &values);
        }
        let _ = writeln!(out);
    }

    if !report.aggregates.datasets.is_empty() {
        let _ = writeln!(out, "## Mean over scenarios\n");
        table_header(&mut out, "dataset", imputers);
        for d in &datasets {
            let values: Vec<Option<f64>> = imputers
                .iter()
                .map(|i| {
                    report
                        .aggregates
                        .datasets
                        .iter()
                        .find(|r| r.dataset.as_ref() == Some(d) && r.imputer_id.as_ref() == Some(i))
                        .map(|r| r.mae)
                })
                .collect();
            table_row(&mut out, d, &values);
        }
        let overall: Vec<Option<f64>> = imputers
            .iter()
            .map(|i| {
                report
                    .aggregates
                    .overall
                    .iter()
                    .find(|r| r.imputer_id.as_ref() == Some(i))
                    .map(|r| r.mae)
            })
            .collect();
        table_row(&mut out, "**all datasets**", &overall);
        let _ = writeln!(out);
    }

    if report.ranks.n_tasks > 0 {
        let _ = writeln!(out, "## Average rank ({} tasks)\n", report.ranks.n_tasks);
        let _ = writeln!(out, "| imputer | mean rank |\n|---|---|");
        let mut ranked: Vec<(&String, &f64)> = report.ranks.mean_ranks.iter().collect();
        ranked.sort_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(b.0)));
        for (id, r) in ranked {
            let _ = writeln!(out, "| {id} | {r:.3} |");
        }
    }
    out
}

fn fmt_float(v: f64) -> String {
    format!("{v}")
}

pub fn write_records_csv(records: &[ScoreRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.dataset.clone(),
            r.imputer_id.clone(),
            r.scenario_label.clone(),
            r.segment_start.to_string(),
            r.n_points.to_string(),
            fmt_float(r.mae),
            r.wql.map(fmt_float).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ScoreRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let bad = |what: &str| Error::Config(format!("{}: bad {what}", path.display()));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        out.push(ScoreRecord {
            dataset: get(0).to_string(),
            imputer_id: get(1).to_string(),
            scenario_label: get(2).to_string(),
            segment_start: get(3).parse().map_err(|_| bad("segment_start"))?,
            n_points: get(4).parse().map_err(|_| bad("n_points"))?,
            mae: get(5).parse().map_err(|_| bad("mae"))?,
            wql: match get(6) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("wql"))?),
            },
        });
    }
    Ok(out)
}

fn write_ranks_csv(report: &BenchReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["imputer_id", "mean_rank", "rank_sum", "n_tasks"])?;
    for (id, r) in &report.ranks.mean_ranks {
        w.write_record([
            id.clone(),
            fmt_float(*r),
            fmt_float(report.ranks.rank_sums[id]),
            report.ranks.n_tasks.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Serialized `results.json` content.
pub fn results_json(report: &BenchReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// Writes every report file into `dir`, creating it if needed.
pub fn write_report(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("results.json");
    let csv = dir.join("results.csv");
    let ranks = dir.join("ranks.csv");
    let md = dir.join("report.md");
    std::fs::write(&json, results_json(report)? + "\n")?;
    write_records_csv(&report.records, &csv)?;
    write_ranks_csv(report, &ranks)?;
    std::fs::write(&md, render_markdown(report))?;
    Ok(vec![json, csv, ranks, md])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks() {
        assert_eq!(
            mark_best(&[0.3, 0.1, 0.2]),
            vec![Mark::Plain, Mark::Best, Mark::Second]
        );
        assert_eq!(
            mark_best(&[0.1, 0.1, 0.2]),
            vec![Mark::Best, Mark::Best, Mark::Second]
        );
        assert_eq!(mark_best(&[0.5]), vec![Mark::Best]);
        assert_eq!(mark_best(&[f64::NAN, 0.5]), vec![Mark::Plain, Mark::Best]);
    }

    #[test]
    fn two_imputer_table() {
        let mut out = String::new();
        table_header(&mut out, "scenario", &["a".into(), "b".into()]);
        table_row(&mut out, "pointwise1", &[Some(0.25), Some(0.125)]);
        table_row(&mut out, "blocks1", &[Some(0.5), Some(0.75)]);
        let expected = "| scenario | a | b |\n|---|---|---|\n\
                        | pointwise1 | <u>0.2500</u> | **0.1250** |\n\
                        | blocks1 | **0.5000** | <u>0.7500</u> |\n";
        assert_eq!(out, expected);
    }
}
