use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{DatasetConfig, RunConfig};
use super::ingest::{ingest_csv, CsvColumns};
use crate::error::{Error, Result};
use crate::features::FeatureKind;
use crate::imputers::{Imputer, ImputerKind};
use crate::masking::apply_scenario;
use crate::metrics::{
    aggregate, average_ranks, overall_average, scenario_average, wql, znorm_mae, GroupKey,
    RankMetric, RankTable, ScoreRecord, SummaryRow,
};
use crate::series::{chrono_split, extract_segments, znorm_stats, Segment, TimeSeries};
use crate::synth::generate;

pub const NORMALIZATION_NOTE: &str = "MAE is z-normalized per segment with the mean and standard \
deviation of the visible context only (held-out values never enter the statistics).";
pub const CONTEXT_NOTE: &str =
    "In-context heads are fitted on every visible point of the segment being imputed.";
pub const WEIGHTING_NOTE: &str = "Segment scores are averaged uniformly within a (dataset, \
scenario) cell; dataset means weigh every scenario equally and overall means weigh every \
dataset equally.";
pub const SURROGATE_NOTE: &str = "tix_random_basis uses a seeded random Fourier basis as a \
stand-in for a pretrained implicit-neural-representation basis; its scores are not those of \
the pretrained model.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub version: String,
    pub config_digest: String,
    /// Imputer labels in configuration order.
    pub imputers: Vec<String>,
    /// Scenario labels in configuration order.
    pub scenarios: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// Per (dataset, imputer, scenario).
    pub cells: Vec<SummaryRow>,
    /// Per (dataset, imputer), averaged over scenarios.
    pub datasets: Vec<SummaryRow>,
    /// Per imputer, averaged over datasets.
    pub overall: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub meta: ReportMeta,
    pub records: Vec<ScoreRecord>,
    pub aggregates: Aggregates,
    pub ranks: RankTable,
}

/// Stable 64-bit seed for one (segment, scenario) work item. Depends only on
/// identifiers, never on iteration order.
pub fn derive_seed(run_seed: u64, dataset: &str, segment_start: usize, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    h.update((dataset.len() as u64).to_le_bytes());
    h.update(dataset.as_bytes());
    h.update((segment_start as u64).to_le_bytes());
    h.update(label.as_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

pub fn load_dataset(d: &DatasetConfig) -> Result<TimeSeries> {
    let freq = d.freq()?;
    if let Some(spec) = d.synth_spec()? {
        return generate(&spec);
    }
    let path = d
        .path
        .as_ref()
        .ok_or_else(|| Error::Config(format!("dataset `{}` has no source", d.id)))?;
    let columns = CsvColumns {
        time: d.time_column.clone(),
        value: d.value_column.clone(),
        covariates: d.covariates.clone(),
    };
    ingest_csv(path, &d.id, &columns, freq)
}

/// Records from one masked segment, one per imputer.
fn score_item(
    dataset: &str,
    masked: &Segment,
    label: &str,
    imputers: &[Imputer],
) -> Result<Vec<ScoreRecord>> {
    let truth = masked.eval_truth();
    imputers
        .iter()
        .map(|imp| {
            let out = imp.impute(masked).map_err(|e| Error::Imputation {
                context: format!(
                    "{} on {dataset} (segment {}, {label})",
                    imp.id(),
                    masked.start
                ),
                source: Box::new(e),
            })?;
            let mae = znorm_mae(&truth, &out.point, masked.norm)?;
            let wql = match (&out.quantiles, &imp.config().quantile_levels) {
                (Some(q), Some(levels)) => wql(q, &truth, levels).ok(),
                _ => None,
            };
            Ok(ScoreRecord {
                dataset: dataset.to_string(),
                imputer_id: imp.id().to_string(),
                scenario_label: label.to_string(),
                segment_start: masked.start,
                n_points: truth.len(),
                mae,
                wql,
            })
        })
        .collect()
}

/// Runs the whole dataset × segment × scenario × imputer matrix.
///
/// Work items run in parallel on the current rayon pool; records come back
/// in a fixed order so output does not depend on scheduling.
pub fn run(config: &RunConfig) -> Result<BenchReport> {
    config.validate()?;
    let scenarios = config.scenarios();
    let imputers: Vec<Imputer> = config
        .imputers
        .iter()
        .map(|e| e.resolve().map(|c| c.build()))
        .collect::<Result<_>>()?;

    let mut failures = Vec::new();
    let mut series = Vec::new();
    for d in &config.datasets {
        match load_dataset(d) {
            Ok(s) => series.push(s),
            Err(e) => failures.push(format!("{}: {e}", d.id)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Datasets(failures));
    }

    // (dataset index, segment) pairs in dataset order.
    let mut segments: Vec<(usize, Segment)> = Vec::new();
    for (k, (d, s)) in config.datasets.iter().zip(&series).enumerate() {
        let (_, _, test) = chrono_split(s, config.splits)?;
        let stride_seed = derive_seed(config.seed, &d.id, 0, "stride");
        let [lo, hi] = config.segment.stride;
        for mut seg in extract_segments(&test, config.segment.len_days, lo, hi, stride_seed)? {
            if let Some(min_std) = d.min_std_filter {
                if znorm_stats(&seg)?.std < min_std {
                    continue;
                }
            }
            seg.parent_id = d.id.clone();
            seg.start += (test.start - s.start) as usize;
            segments.push((k, seg));
        }
    }

    let items: Vec<(usize, usize)> = (0..segments.len())
        .flat_map(|s| (0..scenarios.len()).map(move |c| (s, c)))
        .collect();
    let per_item: Vec<Vec<ScoreRecord>> = items
        .par_iter()
        .map(|&(s, c)| {
            let (k, seg) = &segments[s];
            let d = &config.datasets[*k];
            let scenario = &scenarios[c];
            let seed = derive_seed(config.seed, &d.id, seg.start, &scenario.label);
            let masked = apply_scenario(seg, scenario, seed)?;
            score_item(&d.id, &masked, &scenario.label, &imputers)
        })
        .collect::<Result<_>>()?;
    let records: Vec<ScoreRecord> = per_item.into_iter().flatten().collect();

    let ranks = if records.is_empty() {
        RankTable {
            metric: config.rank_metric,
            n_tasks: 0,
            mean_ranks: Default::default(),
            rank_sums: Default::default(),
            tasks: Vec::new(),
        }
    } else {
        average_ranks(&records, config.rank_metric)?
    };

    let mut notes = vec![
        NORMALIZATION_NOTE.to_string(),
        CONTEXT_NOTE.to_string(),
        WEIGHTING_NOTE.to_string(),
    ];
    let uses_surrogate = imputers.iter().any(|i| {
        i.config().kind == ImputerKind::TimeIndexed
            && i.config().features.kind == FeatureKind::RandomFourier
    });
    if uses_surrogate {
        notes.push(SURROGATE_NOTE.to_string());
    }
    if config.rank_metric == RankMetric::Wql {
        notes.push("Average ranks are computed on WQL.".to_string());
    }

    Ok(BenchReport {
        meta: ReportMeta {
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: config.digest(),
            imputers: imputers.iter().map(|i| i.id().to_string()).collect(),
            scenarios: scenarios.iter().map(|s| s.label.clone()).collect(),
            notes,
        },
        aggregates: Aggregates {
            cells: aggregate(
                &records,
                &[GroupKey::Dataset, GroupKey::Imputer, GroupKey::Scenario],
            ),
            datasets: scenario_average(&records),
            overall: overall_average(&records),
        },
        records,
        ranks,
    })
}

/// Runs on a dedicated pool of `jobs` threads (`None` = rayon default).
pub fn run_with_jobs(config: &RunConfig, jobs: Option<usize>) -> Result<BenchReport> {
    match jobs {
        None => run(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| run(config)),
    }
}
