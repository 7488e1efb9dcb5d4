//! Time-series data model, normalization, chronological splitting and
//! segment extraction.
//!
//! Timestamps live on a regular integer grid with step 1. Irregularity in the
//! source data is expressed through the observation mask, never through the
//! grid. Values at unobserved positions are stored as `NaN` and no consumer
//! reads them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Floor applied to every standard deviation used for z-normalization.
pub const DEFAULT_STD_FLOOR: f64 = 1e-8;

/// Sampling metadata of a series.
///
/// `steps_per_week` is always derived as seven times `steps_per_day`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FrequencyFields")]
pub struct FrequencySpec {
    steps_per_day: usize,
    seasonal_period: usize,
}

/// Serialized form; the seasonal period defaults to one day.
#[derive(Deserialize)]
struct FrequencyFields {
    steps_per_day: usize,
    #[serde(default)]
    seasonal_period: Option<usize>,
}

impl TryFrom<FrequencyFields> for FrequencySpec {
    type Error = Error;

    fn try_from(f: FrequencyFields) -> Result<Self> {
        FrequencySpec::new(
            f.steps_per_day,
            f.seasonal_period.unwrap_or(f.steps_per_day),
        )
    }
}

impl FrequencySpec {
    pub fn new(steps_per_day: usize, seasonal_period: usize) -> Result<Self> {
        if steps_per_day == 0 {
            return Err(invalid("steps_per_day must be positive"));
        }
        if seasonal_period == 0 {
            return Err(invalid("seasonal_period must be at least 1"));
        }
        Ok(Self {
            steps_per_day,
            seasonal_period,
        })
    }

    /// Hourly sampling with a daily seasonal period.
    pub fn hourly() -> Self {
        Self {
            steps_per_day: 24,
            seasonal_period: 24,
        }
    }

    pub fn steps_per_day(&self) -> usize {
        self.steps_per_day
    }

    pub fn steps_per_week(&self) -> usize {
        7 * self.steps_per_day
    }

    pub fn seasonal_period(&self) -> usize {
        self.seasonal_period
    }
}

/// A named auxiliary channel aligned with the target. `NaN` marks an
/// undefined cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

impl Channel {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub id: String,
    /// Tick of the first sample; sample `i` sits at tick `start + i`.
    pub start: i64,
    pub values: Vec<f64>,
    pub obs_mask: Vec<bool>,
    pub covariates: Vec<Channel>,
    pub freq: FrequencySpec,
}

impl TimeSeries {
    pub fn new(
        id: impl Into<String>,
        start: i64,
        values: Vec<f64>,
        obs_mask: Vec<bool>,
        covariates: Vec<Channel>,
        freq: FrequencySpec,
    ) -> Result<Self> {
        let n = values.len();
        if obs_mask.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: obs_mask.len(),
            });
        }
        for c in &covariates {
            if c.values.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: c.values.len(),
                });
            }
        }
        let values = values
            .into_iter()
            .zip(&obs_mask)
            .map(|(v, &o)| if o && v.is_finite() { v } else { f64::NAN })
            .collect::<Vec<_>>();
        let obs_mask = values.iter().map(|v| v.is_finite()).collect();
        Ok(Self {
            id: id.into(),
            start,
            values,
            obs_mask,
            covariates,
            freq,
        })
    }

    /// A series starting at tick 0 with every position observed. Non-finite
    /// values are treated as missing.
    pub fn fully_observed(id: impl Into<String>, values: Vec<f64>, freq: FrequencySpec) -> Self {
        let mask = vec![true; values.len()];
        Self::new(id, 0, values, mask, Vec::new(), freq).expect("lengths agree")
    }

    pub fn with_covariate(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: values.len(),
            });
        }
        self.covariates.push(Channel::new(name, values));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len() as i64).map(move |i| self.start + i)
    }

    pub fn n_observed(&self) -> usize {
        self.obs_mask.iter().filter(|&&o| o).count()
    }

    /// Contiguous sub-series over index range `from..to`.
    pub fn slice(&self, from: usize, to: usize) -> TimeSeries {
        TimeSeries {
            id: self.id.clone(),
            start: self.start + from as i64,
            values: self.values[from..to].to_vec(),
            obs_mask: self.obs_mask[from..to].to_vec(),
            covariates: self
                .covariates
                .iter()
                .map(|c| Channel::new(c.name.clone(), c.values[from..to].to_vec()))
                .collect(),
            freq: self.freq,
        }
    }
}

/// Mean and (population) standard deviation of a visible context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: f64,
    pub std: f64,
}

impl NormStats {
    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn denormalize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Mean and std of `values` restricted to `mask`, single pass (Welford).
pub fn masked_stats(values: &[f64], mask: &[bool], std_floor: f64) -> Result<NormStats> {
    let mut count = 0usize;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (&v, _) in values.iter().zip(mask).filter(|(_, &m)| m) {
        count += 1;
        let delta = v - mean;
        mean += delta / count as f64;
        m2 += delta * (v - mean);
    }
    if count == 0 {
        return Err(Error::EmptyContext);
    }
    let std = (m2 / count as f64).max(0.0).sqrt();
    Ok(NormStats {
        mean,
        std: std.max(std_floor),
    })
}

/// A contiguous evaluation window cut from a parent series.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub parent_id: String,
    /// Index of the first sample inside the parent series.
    pub start: usize,
    /// Parent values; `NaN` where the parent itself was unobserved.
    pub values: Vec<f64>,
    /// Positions the imputer may read.
    pub obs_mask: Vec<bool>,
    /// Held-out positions to score.
    pub eval_mask: Vec<bool>,
    pub covariates: Vec<Channel>,
    pub freq: FrequencySpec,
    pub norm: NormStats,
}

impl Segment {
    /// Builds a segment and checks its mask invariants. Normalization stats
    /// are computed from the visible positions.
    pub fn new(
        parent_id: impl Into<String>,
        start: usize,
        values: Vec<f64>,
        obs_mask: Vec<bool>,
        eval_mask: Vec<bool>,
        covariates: Vec<Channel>,
        freq: FrequencySpec,
    ) -> Result<Self> {
        let n = values.len();
        for len in [obs_mask.len(), eval_mask.len()]
            .into_iter()
            .chain(covariates.iter().map(|c| c.values.len()))
        {
            if len != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: len,
                });
            }
        }
        for i in 0..n {
            if (obs_mask[i] || eval_mask[i]) && !values[i].is_finite() {
                return Err(invalid(format!(
                    "position {i} is visible or scored but has no observed value"
                )));
            }
            if obs_mask[i] && eval_mask[i] {
                return Err(invalid(format!("position {i} is both visible and scored")));
            }
        }
        let norm = masked_stats(&values, &obs_mask, DEFAULT_STD_FLOOR)?;
        Ok(Self {
            parent_id: parent_id.into(),
            start,
            values,
            obs_mask,
            eval_mask,
            covariates,
            freq,
            norm,
        })
    }

    /// Segment with every finite value visible and nothing held out.
    pub fn fully_visible(values: Vec<f64>, freq: FrequencySpec) -> Result<Self> {
        let obs = values.iter().map(|v| v.is_finite()).collect();
        let eval = vec![false; values.len()];
        Self::new("segment", 0, values, obs, eval, Vec::new(), freq)
    }

    pub fn with_covariate(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: values.len(),
            });
        }
        self.covariates.push(Channel::new(name, values));
        Ok(self)
    }

    /// Same data under new masks; normalization stats are recomputed.
    pub fn with_masks(&self, obs_mask: Vec<bool>, eval_mask: Vec<bool>) -> Result<Self> {
        Segment::new(
            self.parent_id.clone(),
            self.start,
            self.values.clone(),
            obs_mask,
            eval_mask,
            self.covariates.clone(),
            self.freq,
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn visible_indices(&self) -> Vec<usize> {
        mask_indices(&self.obs_mask)
    }

    pub fn eval_indices(&self) -> Vec<usize> {
        mask_indices(&self.eval_mask)
    }

    /// Held-out ground truth in eval-index order.
    pub fn eval_truth(&self) -> Vec<f64> {
        self.eval_indices()
            .iter()
            .map(|&i| self.values[i])
            .collect()
    }

    pub fn n_visible(&self) -> usize {
        self.obs_mask.iter().filter(|&&o| o).count()
    }
}

pub(crate) fn mask_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect()
}

/// Splits a series into three contiguous parts (train, validation, test).
///
/// Boundaries sit at `floor(n * cumulative_fraction)`; the last part takes the
/// remainder.
pub fn chrono_split(
    series: &TimeSeries,
    fractions: [f64; 3],
) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    if fractions.iter().any(|f| f.is_nan() || *f <= 0.0) {
        return Err(invalid("split fractions must be positive"));
    }
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid("split fractions must sum to 1"));
    }
    let n = series.len();
    if n < 3 {
        return Err(Error::SeriesTooShort);
    }
    // Absorb representation error in cumulative sums such as 0.7 + 0.1.
    let eps = 1e-9 + n as f64 * 1e-12;
    let boundary = |cum: f64| (((n as f64) * cum + eps).floor() as usize).min(n);
    let b1 = boundary(fractions[0]);
    let b2 = boundary(fractions[0] + fractions[1]).max(b1);
    Ok((
        series.slice(0, b1),
        series.slice(b1, b2),
        series.slice(b2, n),
    ))
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Cuts sliding windows of `seg_len_days` days, advancing by a random stride
/// drawn uniformly in `[stride_min_days, stride_max_days]` days.
///
/// Windows without a single observed position are skipped but still advance
/// the stride.
pub fn extract_segments(
    series: &TimeSeries,
    seg_len_days: usize,
    stride_min_days: f64,
    stride_max_days: f64,
    seed: u64,
) -> Result<Vec<Segment>> {
    if seg_len_days == 0 {
        return Err(invalid("segment length must be at least one day"));
    }
    if !(stride_min_days > 0.0 && stride_min_days <= stride_max_days) {
        return Err(invalid("stride bounds must satisfy 0 < min <= max"));
    }
    let spd = series.freq.steps_per_day();
    let window = seg_len_days * spd;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments = Vec::new();
    let mut start = 0usize;
    while start + window <= series.len() {
        let part = series.slice(start, start + window);
        if part.n_observed() > 0 {
            segments.push(Segment::new(
                series.id.clone(),
                start,
                part.values,
                part.obs_mask,
                vec![false; window],
                part.covariates,
                series.freq,
            )?);
        }
        let days = if stride_min_days == stride_max_days {
            stride_min_days
        } else {
            rng.random_range(stride_min_days..stride_max_days)
        };
        start += round_half_up(days * spd as f64).max(1);
    }
    Ok(segments)
}

/// Visible-context normalization stats of a segment.
pub fn znorm_stats(segment: &Segment) -> Result<NormStats> {
    masked_stats(&segment.values, &segment.obs_mask, DEFAULT_STD_FLOOR)
}
