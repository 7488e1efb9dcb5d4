//! Contextual representations `H(t)` for every timestamp of a segment.
//!
//! Two bases are available: the handcrafted one (normalized time index plus
//! sine/cosine pairs at fixed periods, daily and weekly by default) and a
//! seeded random Fourier basis that stands in for a learned basis of
//! implicit neural representations. Covariates are appended column-wise.
//!
//! Features never look at target values.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::{masked_stats, FrequencySpec, DEFAULT_STD_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    HandcraftedFourier,
    RandomFourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSpec {
    pub kind: FeatureKind,
    /// Periods in ticks for the handcrafted basis; `None` means daily and
    /// weekly periods taken from the series frequency.
    pub periods: Option<Vec<f64>>,
    /// Number of random frequencies.
    pub n_random: usize,
    /// Frequency band of the random basis, in cycles per segment.
    pub freq_range: (f64, f64),
    pub seed: u64,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self::handcrafted()
    }
}

impl FeatureSpec {
    pub fn handcrafted() -> Self {
        Self {
            kind: FeatureKind::HandcraftedFourier,
            periods: None,
            n_random: 64,
            freq_range: (0.5, 400.0),
            seed: 0,
        }
    }

    pub fn random_fourier(n_random: usize, freq_range: (f64, f64), seed: u64) -> Self {
        Self {
            kind: FeatureKind::RandomFourier,
            periods: None,
            n_random,
            freq_range,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            FeatureKind::HandcraftedFourier => match &self.periods {
                Some(p) if p.is_empty() => Err(invalid("periods must be non-empty")),
                Some(p) if p.iter().any(|x| !x.is_finite() || *x <= 0.0) => {
                    Err(invalid("periods must be positive"))
                }
                _ => Ok(()),
            },
            FeatureKind::RandomFourier => {
                let (lo, hi) = self.freq_range;
                if self.n_random == 0 {
                    Err(invalid("n_random must be at least 1"))
                } else if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                    Err(invalid("freq_range must satisfy 0 < min < max"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Builds the basis for the given tick offsets of a segment of
    /// `segment_len` ticks.
    pub fn build(
        &self,
        offsets: &[usize],
        segment_len: usize,
        freq: &FrequencySpec,
    ) -> Result<FeatureMatrix> {
        self.validate()?;
        match self.kind {
            FeatureKind::HandcraftedFourier => {
                let periods = self
                    .periods
                    .clone()
                    .unwrap_or_else(|| default_periods(freq));
                fourier_features(offsets, segment_len, &periods)
            }
            FeatureKind::RandomFourier => random_fourier_basis(offsets, segment_len, self),
        }
    }
}

fn default_periods(freq: &FrequencySpec) -> Vec<f64> {
    vec![freq.steps_per_day() as f64, freq.steps_per_week() as f64]
}

/// Row-major feature matrix, one row per requested timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_rows: usize,
    dim: usize,
    t_norm: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a matrix from explicit rows. `t_norm` defaults to zeros.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            data,
            n_rows: rows.len(),
            dim,
            t_norm: vec![0.0; rows.len()],
        })
    }

    /// `n_rows` rows with no columns.
    pub fn empty(n_rows: usize) -> Self {
        Self {
            data: Vec::new(),
            n_rows,
            dim: 0,
            t_norm: vec![0.0; n_rows],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_norm(&self) -> &[f64] {
        &self.t_norm
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.data[i * self.dim + j])
            .collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            data,
            n_rows: idx.len(),
            dim: self.dim,
            t_norm: idx.iter().map(|&i| self.t_norm[i]).collect(),
        }
    }
}

fn normalized_time(offsets: &[usize], segment_len: usize) -> Result<Vec<f64>> {
    if segment_len < 2 {
        return Err(Error::DegenerateSegment);
    }
    let denom = (segment_len - 1) as f64;
    Ok(offsets.iter().map(|&o| o as f64 / denom).collect())
}

/// `(t_norm, sin(2πo/P_day), cos(2πo/P_day), sin(2πo/P_week), cos(2πo/P_week))`
/// where `o` is the raw tick offset and `t_norm = o / (segment_len - 1)`.
pub fn handcrafted_features(
    offsets: &[usize],
    segment_len: usize,
    freq: &FrequencySpec,
) -> Result<FeatureMatrix> {
    fourier_features(offsets, segment_len, &default_periods(freq))
}

/// Normalized time index followed by one sine/cosine pair per period.
pub fn fourier_features(
    offsets: &[usize],
    segment_len: usize,
    periods: &[f64],
) -> Result<FeatureMatrix> {
    let t_norm = normalized_time(offsets, segment_len)?;
    let dim = 1 + 2 * periods.len();
    let mut data = Vec::with_capacity(offsets.len() * dim);
    for (&o, &t) in offsets.iter().zip(&t_norm) {
        data.push(t);
        for &p in periods {
            let angle = 2.0 * PI * o as f64 / p;
            data.push(angle.sin());
            data.push(angle.cos());
        }
    }
    Ok(FeatureMatrix {
        data,
        n_rows: offsets.len(),
        dim,
        t_norm,
    })
}

/// `[t_norm] ++ [sin(2π f_i t_norm + φ_i), cos(2π f_i t_norm + φ_i)]` with
/// log-uniform frequencies and uniform phases drawn from `spec.seed`.
pub fn random_fourier_basis(
    offsets: &[usize],
    segment_len: usize,
    spec: &FeatureSpec,
) -> Result<FeatureMatrix> {
    if spec.kind != FeatureKind::RandomFourier {
        return Err(invalid(
            "random_fourier_basis requires a RandomFourier spec",
        ));
    }
    spec.validate()?;
    let t_norm = normalized_time(offsets, segment_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (spec.freq_range.0.ln(), spec.freq_range.1.ln());
    let waves: Vec<(f64, f64)> = (0..spec.n_random)
        .map(|_| {
            let f = rng.random_range(lo..hi).exp();
            let phase = rng.random_range(0.0..2.0 * PI);
            (f, phase)
        })
        .collect();
    let dim = 1 + 2 * spec.n_random;
    let mut data = Vec::with_capacity(offsets.len() * dim);
    for &t in &t_norm {
        data.push(t);
        for &(f, phase) in &waves {
            let angle = 2.0 * PI * f * t + phase;
            data.push(angle.sin());
            data.push(angle.cos());
        }
    }
    Ok(FeatureMatrix {
        data,
        n_rows: offsets.len(),
        dim,
        t_norm,
    })
}

/// Appends each covariate channel, z-normalized with its statistics over the
/// rows flagged in `context`.
///
/// Every channel must be defined on every row.
pub fn stack_covariates(
    base: &FeatureMatrix,
    covariates: &[&[f64]],
    context: &[bool],
) -> Result<FeatureMatrix> {
    if covariates.is_empty() {
        return Ok(base.clone());
    }
    if context.len() != base.n_rows {
        return Err(Error::LengthMismatch {
            left: base.n_rows,
            right: context.len(),
        });
    }
    let mut scaled = Vec::with_capacity(covariates.len());
    for ch in covariates {
        if ch.len() != base.n_rows {
            return Err(Error::LengthMismatch {
                left: base.n_rows,
                right: ch.len(),
            });
        }
        if ch.iter().any(|v| !v.is_finite()) {
            return Err(Error::CovariateNotObserved);
        }
        let stats = masked_stats(ch, context, DEFAULT_STD_FLOOR)?;
        scaled.push(ch.iter().map(|&v| stats.normalize(v)).collect::<Vec<_>>());
    }
    let dim = base.dim + covariates.len();
    let mut data = Vec::with_capacity(base.n_rows * dim);
    for i in 0..base.n_rows {
        data.extend_from_slice(base.row(i));
        data.extend(scaled.iter().map(|c| c[i]));
    }
    Ok(FeatureMatrix {
        data,
        n_rows: base.n_rows,
        dim,
        t_norm: base.t_norm.clone(),
    })
}
