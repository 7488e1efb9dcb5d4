//! Imputation strategies behind one interface.
//!
//! Local baselines (linear interpolation, LOCF, seasonal naive) only look at
//! the visible values of the segment. The time-indexed imputer builds `H(t)`
//! for every position, fits a linear head on the visible positions and
//! evaluates it at the held-out ones. The covariate ridge baseline regresses
//! the target on the covariate channels alone.
//!
//! Registry ids: `linear`, `locf`, `seasonal_naive`, `tix_fourier`,
//! `tix_random_basis`, `covar_ridge`, plus `_q` variants of the last three
//! which also emit quantiles.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::features::{stack_covariates, FeatureKind, FeatureMatrix, FeatureSpec};
use crate::regress::{
    enforce_noncrossing, pinball_fit, predict, ridge_fit, QuantilePredictions, DEFAULT_LAMBDA,
};
use crate::series::Segment;

/// Quantile levels 0.1, 0.2, ..., 0.9.
pub fn default_quantile_levels() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// Output of an imputer, aligned with `segment.eval_indices()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputation {
    pub point: Vec<f64>,
    pub quantiles: Option<QuantilePredictions>,
    pub imputer_id: String,
    pub config_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputerKind {
    Linear,
    Locf,
    SeasonalNaive,
    TimeIndexed,
    CovariateRidge,
}

/// A registry id together with its parameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputerConfig {
    pub id: String,
    pub kind: ImputerKind,
    pub lambda: f64,
    pub features: FeatureSpec,
    pub use_covariates: bool,
    pub quantile_levels: Option<Vec<f64>>,
    /// Overrides the dataset's seasonal period for `seasonal_naive`.
    pub seasonal_period: Option<usize>,
}

impl ImputerConfig {
    pub fn from_id(id: &str) -> Result<Self> {
        let (base, quantile) = match id.strip_suffix("_q") {
            Some(b) => (b, true),
            None => (id, false),
        };
        let (kind, features) = match base {
            "linear" => (ImputerKind::Linear, FeatureSpec::handcrafted()),
            "locf" => (ImputerKind::Locf, FeatureSpec::handcrafted()),
            "seasonal_naive" => (ImputerKind::SeasonalNaive, FeatureSpec::handcrafted()),
            "tix_fourier" => (ImputerKind::TimeIndexed, FeatureSpec::handcrafted()),
            "tix_random_basis" => (
                ImputerKind::TimeIndexed,
                FeatureSpec::random_fourier(64, (0.5, 400.0), 0),
            ),
            "covar_ridge" => (ImputerKind::CovariateRidge, FeatureSpec::handcrafted()),
            _ => return Err(Error::UnknownImputer(id.to_string())),
        };
        let local = matches!(
            kind,
            ImputerKind::Linear | ImputerKind::Locf | ImputerKind::SeasonalNaive
        );
        if quantile && local {
            return Err(Error::UnknownImputer(id.to_string()));
        }
        Ok(Self {
            id: id.to_string(),
            kind,
            lambda: DEFAULT_LAMBDA,
            features,
            use_covariates: false,
            quantile_levels: quantile.then(default_quantile_levels),
            seasonal_period: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda must be a finite non-negative number"));
        }
        self.features.validate()?;
        if let Some(levels) = &self.quantile_levels {
            if levels.is_empty() || levels.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                return Err(invalid(
                    "quantile levels must be non-empty and inside (0, 1)",
                ));
            }
        }
        if self.seasonal_period == Some(0) {
            return Err(invalid("seasonal period must be at least 1"));
        }
        Ok(())
    }

    /// Short stable hash of the full configuration.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    pub fn build(self) -> Imputer {
        let digest = self.digest();
        Imputer {
            config: self,
            digest,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Imputer {
    config: ImputerConfig,
    digest: String,
}

impl Imputer {
    pub fn id(&self) -> &str {
        &self.config.id
    }

    pub fn config(&self) -> &ImputerConfig {
        &self.config
    }

    pub fn impute(&self, segment: &Segment) -> Result<Imputation> {
        self.config.validate()?;
        let c = &self.config;
        let (point, quantiles) = match c.kind {
            ImputerKind::Linear => (linear_fill(segment), None),
            ImputerKind::Locf => (locf_fill(segment), None),
            ImputerKind::SeasonalNaive => {
                let s = c.seasonal_period.unwrap_or(segment.freq.seasonal_period());
                (seasonal_naive_fill(segment, s), None)
            }
            ImputerKind::TimeIndexed => time_indexed_fill(
                segment,
                &c.features,
                c.lambda,
                c.use_covariates,
                c.quantile_levels.as_deref(),
            )?,
            ImputerKind::CovariateRidge => {
                covariate_ridge_fill(segment, c.lambda, c.quantile_levels.as_deref())?
            }
        };
        Ok(Imputation {
            point,
            quantiles,
            imputer_id: c.id.clone(),
            config_digest: self.digest.clone(),
        })
    }
}

fn local_imputation(id: &str, point: Vec<f64>) -> Imputation {
    let digest = ImputerConfig::from_id(id).expect("registered id").digest();
    Imputation {
        point,
        quantiles: None,
        imputer_id: id.to_string(),
        config_digest: digest,
    }
}

/// Nearest visible index strictly before and strictly after every position.
fn anchors(obs: &[bool]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let n = obs.len();
    let mut prev = vec![None; n];
    let mut next = vec![None; n];
    let mut last = None;
    for i in 0..n {
        prev[i] = last;
        if obs[i] {
            last = Some(i);
        }
    }
    last = None;
    for i in (0..n).rev() {
        next[i] = last;
        if obs[i] {
            last = Some(i);
        }
    }
    (prev, next)
}

fn linear_fill(segment: &Segment) -> Vec<f64> {
    let (prev, next) = anchors(&segment.obs_mask);
    let v = &segment.values;
    segment
        .eval_indices()
        .into_iter()
        .map(|t| match (prev[t], next[t]) {
            (Some(a), Some(b)) => {
                let w = (t - a) as f64 / (b - a) as f64;
                v[a] + w * (v[b] - v[a])
            }
            (None, Some(b)) => v[b],
            (Some(a), None) => v[a],
            (None, None) => unreachable!("segments keep at least one visible point"),
        })
        .collect()
}

fn locf_value(segment: &Segment, prev: &[Option<usize>], next: &[Option<usize>], t: usize) -> f64 {
    let anchor = prev[t]
        .or(next[t])
        .expect("segments keep at least one visible point");
    segment.values[anchor]
}

fn locf_fill(segment: &Segment) -> Vec<f64> {
    let (prev, next) = anchors(&segment.obs_mask);
    segment
        .eval_indices()
        .into_iter()
        .map(|t| locf_value(segment, &prev, &next, t))
        .collect()
}

fn seasonal_naive_fill(segment: &Segment, period: usize) -> Vec<f64> {
    let n = segment.len() as i64;
    let s = period as i64;
    let (prev, next) = anchors(&segment.obs_mask);
    let visible = |i: i64| (0..n).contains(&i) && segment.obs_mask[i as usize];
    segment
        .eval_indices()
        .into_iter()
        .map(|t| {
            let ti = t as i64;
            let mut k = 1;
            // Probe t−S, t+S, t−2S, t+2S, ... while either side is in range.
            while ti - k * s >= 0 || ti + k * s < n {
                for cand in [ti - k * s, ti + k * s] {
                    if visible(cand) {
                        return segment.values[cand as usize];
                    }
                }
                k += 1;
            }
            locf_value(segment, &prev, &next, t)
        })
        .collect()
}

/// Linear interpolation between the surrounding visible anchors; a leading
/// gap copies the first visible value backward and a trailing gap carries
/// the last one forward.
pub fn impute_linear(segment: &Segment) -> Imputation {
    local_imputation("linear", linear_fill(segment))
}

/// Last visible value carried forward, with a single backward fill for a
/// leading gap.
pub fn impute_locf(segment: &Segment) -> Imputation {
    local_imputation("locf", locf_fill(segment))
}

/// Value one season away, probing `t−S, t+S, t−2S, t+2S, …` within the
/// segment, falling back to LOCF when every probe is hidden.
pub fn impute_seasonal_naive(segment: &Segment, period: usize) -> Result<Imputation> {
    if period == 0 {
        return Err(invalid("seasonal period must be at least 1"));
    }
    let mut out = local_imputation("seasonal_naive", seasonal_naive_fill(segment, period));
    if period != segment.freq.seasonal_period() {
        let mut cfg = ImputerConfig::from_id("seasonal_naive")?;
        cfg.seasonal_period = Some(period);
        out.config_digest = cfg.digest();
    }
    Ok(out)
}

fn covariate_channels(segment: &Segment) -> Vec<&[f64]> {
    segment
        .covariates
        .iter()
        .map(|c| c.values.as_slice())
        .collect()
}

/// Fits the point head (and optional quantile heads) on the z-normalized
/// visible target and returns denormalized predictions at eval positions.
fn fit_and_predict(
    segment: &Segment,
    features: &FeatureMatrix,
    lambda: f64,
    quantile_levels: Option<&[f64]>,
) -> Result<(Vec<f64>, Option<QuantilePredictions>)> {
    let visible = segment.visible_indices();
    let eval = segment.eval_indices();
    let norm = segment.norm;
    let x_fit = features.select_rows(&visible);
    let y_fit: Vec<f64> = visible
        .iter()
        .map(|&i| norm.normalize(segment.values[i]))
        .collect();
    let x_eval = features.select_rows(&eval);

    let head = ridge_fit(&x_fit, &y_fit, lambda)?;
    let point = predict(&head, &x_eval)?
        .into_iter()
        .map(|z| norm.denormalize(z))
        .collect();

    let quantiles = match quantile_levels {
        None => None,
        Some(levels) => {
            let mut preds = Vec::with_capacity(levels.len());
            for &alpha in levels {
                let head = pinball_fit(&x_fit, &y_fit, alpha, lambda)?;
                let q = predict(&head, &x_eval)?
                    .into_iter()
                    .map(|z| norm.denormalize(z))
                    .collect();
                preds.push((alpha, q));
            }
            Some(enforce_noncrossing(preds))
        }
    };
    Ok((point, quantiles))
}

fn time_indexed_fill(
    segment: &Segment,
    fspec: &FeatureSpec,
    lambda: f64,
    use_covariates: bool,
    quantile_levels: Option<&[f64]>,
) -> Result<(Vec<f64>, Option<QuantilePredictions>)> {
    if segment.n_visible() < 2 {
        return Err(Error::EmptyContext);
    }
    let offsets: Vec<usize> = (0..segment.len()).collect();
    let mut features = fspec.build(&offsets, segment.len(), &segment.freq)?;
    if use_covariates {
        if segment.covariates.is_empty() {
            return Err(Error::CovariateRequired);
        }
        features = stack_covariates(&features, &covariate_channels(segment), &segment.obs_mask)?;
    }
    fit_and_predict(segment, &features, lambda, quantile_levels)
}

fn covariate_ridge_fill(
    segment: &Segment,
    lambda: f64,
    quantile_levels: Option<&[f64]>,
) -> Result<(Vec<f64>, Option<QuantilePredictions>)> {
    if segment.covariates.is_empty() {
        return Err(Error::CovariateRequired);
    }
    let base = FeatureMatrix::empty(segment.len());
    let features = stack_covariates(&base, &covariate_channels(segment), &segment.obs_mask)?;
    fit_and_predict(segment, &features, lambda, quantile_levels)
}

/// Time-indexed imputation: `H(t)` from `fspec` (optionally stacked with the
/// segment's covariates), a ridge head fitted in context, and optionally one
/// pinball head per quantile level.
pub fn impute_time_indexed(
    segment: &Segment,
    fspec: &FeatureSpec,
    lambda: f64,
    use_covariates: bool,
    quantile_levels: Option<&[f64]>,
) -> Result<Imputation> {
    let base = match fspec.kind {
        FeatureKind::HandcraftedFourier => "tix_fourier",
        FeatureKind::RandomFourier => "tix_random_basis",
    };
    let id = match quantile_levels {
        Some(_) => format!("{base}_q"),
        None => base.to_string(),
    };
    let mut cfg = ImputerConfig::from_id(&id)?;
    cfg.features = fspec.clone();
    cfg.lambda = lambda;
    cfg.use_covariates = use_covariates;
    cfg.quantile_levels = quantile_levels.map(<[f64]>::to_vec);
    cfg.build().impute(segment)
}

/// Ridge regression of the target on the covariate channels only.
pub fn impute_covariate_ridge(segment: &Segment, lambda: f64) -> Result<Imputation> {
    let mut cfg = ImputerConfig::from_id("covar_ridge")?;
    cfg.lambda = lambda;
    cfg.build().impute(segment)
}
