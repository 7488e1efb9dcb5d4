//! Scoring and aggregation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::regress::QuantilePredictions;
use crate::series::NormStats;

/// Score of one imputer on one masked segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub dataset: String,
    pub imputer_id: String,
    pub scenario_label: String,
    pub segment_start: usize,
    pub n_points: usize,
    pub mae: f64,
    pub wql: Option<f64>,
}

/// Mean absolute error divided by the context standard deviation.
pub fn znorm_mae(truth: &[f64], pred: &[f64], norm: NormStats) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(invalid("cannot score an empty set of points"));
    }
    let sum: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum();
    Ok(sum / truth.len() as f64 / norm.std)
}

/// `α (x − q)` when `x > q`, else `(1 − α)(q − x)`.
pub fn quantile_loss(q: f64, x: f64, alpha: f64) -> f64 {
    if x > q {
        alpha * (x - q)
    } else {
        (1.0 - alpha) * (q - x)
    }
}

/// Weighted quantile loss averaged over `alphas`: for each level,
/// `2 Σ QL_α(q, x) / Σ |x|` pooled over all points.
pub fn wql(preds: &QuantilePredictions, truth: &[f64], alphas: &[f64]) -> Result<f64> {
    if alphas.is_empty() {
        return Err(invalid("no quantile levels to score"));
    }
    let scale: f64 = truth.iter().map(|x| x.abs()).sum();
    if scale == 0.0 || scale.is_nan() {
        return Err(Error::UndefinedScale);
    }
    let mut total = 0.0;
    for &alpha in alphas {
        let (_, q) = preds
            .iter()
            .find(|(a, _)| (a - alpha).abs() < 1e-12)
            .ok_or_else(|| invalid(format!("missing predictions for level {alpha}")))?;
        if q.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: truth.len(),
                right: q.len(),
            });
        }
        let loss: f64 = q
            .iter()
            .zip(truth)
            .map(|(&q, &x)| quantile_loss(q, x, alpha))
            .sum();
        total += 2.0 * loss / scale;
    }
    Ok(total / alphas.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Dataset,
    Imputer,
    Scenario,
}

/// Unweighted mean over a group of records. Keys not grouped on are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: Option<String>,
    pub imputer_id: Option<String>,
    pub scenario_label: Option<String>,
    pub n_records: usize,
    pub mae: f64,
    /// Present only when every record of the group carries a WQL.
    pub wql: Option<f64>,
}

type GroupId = (Option<String>, Option<String>, Option<String>);

fn group_id(r: &ScoreRecord, keys: &[GroupKey]) -> GroupId {
    let pick = |k: GroupKey, v: &str| keys.contains(&k).then(|| v.to_string());
    (
        pick(GroupKey::Dataset, &r.dataset),
        pick(GroupKey::Imputer, &r.imputer_id),
        pick(GroupKey::Scenario, &r.scenario_label),
    )
}

struct Acc {
    n: usize,
    mae: f64,
    wql: Option<f64>,
}

fn summarize(groups: BTreeMap<GroupId, Acc>) -> Vec<SummaryRow> {
    groups
        .into_iter()
        .map(|((dataset, imputer_id, scenario_label), a)| SummaryRow {
            dataset,
            imputer_id,
            scenario_label,
            n_records: a.n,
            mae: a.mae / a.n as f64,
            wql: a.wql.map(|w| w / a.n as f64),
        })
        .collect()
}

fn accumulate<'a>(
    items: impl IntoIterator<Item = (GroupId, f64, Option<f64>)> + 'a,
) -> BTreeMap<GroupId, Acc> {
    let mut groups: BTreeMap<GroupId, Acc> = BTreeMap::new();
    for (id, mae, wql) in items {
        let acc = groups.entry(id).or_insert(Acc {
            n: 0,
            mae: 0.0,
            wql: Some(0.0),
        });
        acc.n += 1;
        acc.mae += mae;
        acc.wql = match (acc.wql, wql) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
    }
    groups
}

/// Mean MAE (and WQL) within each group, groups in lexicographic order.
pub fn aggregate(records: &[ScoreRecord], group_by: &[GroupKey]) -> Vec<SummaryRow> {
    summarize(accumulate(
        records
            .iter()
            .map(|r| (group_id(r, group_by), r.mae, r.wql)),
    ))
}

/// Per (dataset, imputer): the mean over scenarios of the per-scenario means,
/// so every scenario weighs the same regardless of its segment count.
pub fn scenario_average(records: &[ScoreRecord]) -> Vec<SummaryRow> {
    let cells = aggregate(
        records,
        &[GroupKey::Dataset, GroupKey::Imputer, GroupKey::Scenario],
    );
    summarize(accumulate(
        cells
            .into_iter()
            .map(|c| ((c.dataset, c.imputer_id, None), c.mae, c.wql)),
    ))
}

/// Per imputer: the mean over datasets of [`scenario_average`], each dataset
/// weighing the same.
pub fn overall_average(records: &[ScoreRecord]) -> Vec<SummaryRow> {
    summarize(accumulate(
        scenario_average(records)
            .into_iter()
            .map(|c| ((None, c.imputer_id, None), c.mae, c.wql)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMetric {
    #[default]
    Mae,
    Wql,
}

/// Scores of every imputer on one (dataset, scenario) task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScores {
    pub dataset: String,
    pub scenario_label: String,
    pub scores: BTreeMap<String, f64>,
    pub ranks: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub metric: RankMetric,
    pub n_tasks: usize,
    pub mean_ranks: BTreeMap<String, f64>,
    pub rank_sums: BTreeMap<String, f64>,
    pub tasks: Vec<TaskScores>,
}

/// Ranks of `scores` in ascending order (1 = best); tied values share the
/// mean of the ranks they span.
pub fn mid_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Mean rank of every imputer across (dataset, scenario) tasks. Several
/// records for the same cell (one per segment) are averaged first.
pub fn average_ranks(records: &[ScoreRecord], metric: RankMetric) -> Result<RankTable> {
    let cells = aggregate(
        records,
        &[GroupKey::Dataset, GroupKey::Scenario, GroupKey::Imputer],
    );
    let imputers: BTreeSet<String> = cells.iter().filter_map(|c| c.imputer_id.clone()).collect();
    let mut by_task: BTreeMap<(String, String), BTreeMap<String, f64>> = BTreeMap::new();
    for c in cells {
        let value = match metric {
            RankMetric::Mae => c.mae,
            RankMetric::Wql => c.wql.ok_or(Error::IncompleteScoreMatrix)?,
        };
        by_task
            .entry((
                c.dataset.unwrap_or_default(),
                c.scenario_label.unwrap_or_default(),
            ))
            .or_default()
            .insert(c.imputer_id.unwrap_or_default(), value);
    }

    let mut rank_sums: BTreeMap<String, f64> = imputers.iter().map(|i| (i.clone(), 0.0)).collect();
    let mut tasks = Vec::with_capacity(by_task.len());
    for ((dataset, scenario_label), scores) in by_task {
        if scores.len() != imputers.len() {
            return Err(Error::IncompleteScoreMatrix);
        }
        let values: Vec<f64> = scores.values().copied().collect();
        let ranks: BTreeMap<String, f64> = scores.keys().cloned().zip(mid_ranks(&values)).collect();
        for (id, r) in &ranks {
            *rank_sums.get_mut(id).expect("known imputer") += r;
        }
        tasks.push(TaskScores {
            dataset,
            scenario_label,
            scores,
            ranks,
        });
    }
    let n_tasks = tasks.len();
    let mean_ranks = rank_sums
        .iter()
        .map(|(id, s)| (id.clone(), s / n_tasks.max(1) as f64))
        .collect();
    Ok(RankTable {
        metric,
        n_tasks,
        mean_ranks,
        rank_sums,
        tasks,
    })
}
