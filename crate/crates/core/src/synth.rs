//! Synthetic datasets: sums of seasonal, trend, noise and covariate-driven
//! components on an hourly (or any) grid.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::series::{FrequencySpec, TimeSeries};

/// Lag-one autocorrelation of the latent covariate process.
pub const COVARIATE_AR: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Constant offset `amplitude`.
    Level,
    /// `amplitude · sin(2π t / period_ticks + phase)`.
    Sine,
    /// `amplitude · t`, i.e. `amplitude` is the slope per tick.
    Trend,
    /// Gaussian white noise with standard deviation `noise_std`.
    Noise,
    /// Emits a covariate channel `c(t) = amplitude · u(t)` where `u` is a
    /// unit-variance AR(1) process, and adds `covariate_gain · c(t)`.
    CovariateLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub kind: ComponentKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Defaults to one day.
    #[serde(default)]
    pub period_ticks: Option<f64>,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub noise_std: Option<f64>,
    #[serde(default)]
    pub covariate_gain: Option<f64>,
    /// Covariate channel name; defaults to `cov<index>`.
    #[serde(default)]
    pub name: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl Component {
    fn base(kind: ComponentKind, amplitude: f64) -> Self {
        Self {
            kind,
            amplitude,
            period_ticks: None,
            phase: 0.0,
            noise_std: None,
            covariate_gain: None,
            name: None,
        }
    }

    pub fn level(value: f64) -> Self {
        Self::base(ComponentKind::Level, value)
    }

    pub fn sine(amplitude: f64, period_ticks: f64) -> Self {
        Self {
            period_ticks: Some(period_ticks),
            ..Self::base(ComponentKind::Sine, amplitude)
        }
    }

    pub fn cosine(amplitude: f64, period_ticks: f64) -> Self {
        Self {
            phase: PI / 2.0,
            ..Self::sine(amplitude, period_ticks)
        }
    }

    pub fn trend(slope: f64) -> Self {
        Self::base(ComponentKind::Trend, slope)
    }

    pub fn noise(std: f64) -> Self {
        Self {
            noise_std: Some(std),
            ..Self::base(ComponentKind::Noise, 1.0)
        }
    }

    pub fn covariate(amplitude: f64, gain: f64) -> Self {
        Self {
            covariate_gain: Some(gain),
            ..Self::base(ComponentKind::CovariateLinear, amplitude)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default = "default_id")]
    pub id: String,
    pub length_days: usize,
    #[serde(flatten)]
    pub freq: FrequencySpec,
    pub components: Vec<Component>,
    #[serde(default)]
    pub seed: u64,
}

fn default_id() -> String {
    "synth".to_string()
}

impl SynthSpec {
    pub fn new(id: impl Into<String>, length_days: usize, freq: FrequencySpec, seed: u64) -> Self {
        Self {
            id: id.into(),
            length_days,
            freq,
            components: Vec::new(),
            seed,
        }
    }

    pub fn with(mut self, component: Component) -> Self {
        self.components.push(component);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.length_days < 28 {
            return Err(invalid("synthetic series must span at least 28 days"));
        }
        if self.components.is_empty() {
            return Err(invalid("synthetic series needs at least one component"));
        }
        for c in &self.components {
            if !c.amplitude.is_finite() || !c.phase.is_finite() {
                return Err(invalid("component parameters must be finite"));
            }
            if matches!(c.period_ticks, Some(p) if p.is_nan() || p <= 0.0) {
                return Err(invalid("period_ticks must be positive"));
            }
            if matches!(c.noise_std, Some(s) if s.is_nan() || s < 0.0) {
                return Err(invalid("noise_std must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Sums the components tick by tick. Every component draws from its own
/// stream of the seeded generator, so the series is bitwise reproducible.
pub fn generate(spec: &SynthSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let n = spec.length_days * spec.freq.steps_per_day();
    let mut values = vec![0.0; n];
    let mut covariates = Vec::new();
    for (k, c) in spec.components.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64);
        match c.kind {
            ComponentKind::Level => values.iter_mut().for_each(|v| *v += c.amplitude),
            ComponentKind::Sine => {
                let period = c.period_ticks.unwrap_or(spec.freq.steps_per_day() as f64);
                for (t, v) in values.iter_mut().enumerate() {
                    *v += c.amplitude * (2.0 * PI * t as f64 / period + c.phase).sin();
                }
            }
            ComponentKind::Trend => {
                for (t, v) in values.iter_mut().enumerate() {
                    *v += c.amplitude * t as f64;
                }
            }
            ComponentKind::Noise => {
                let std = c.noise_std.unwrap_or(c.amplitude);
                if std > 0.0 {
                    let normal = Normal::new(0.0, std).map_err(|e| invalid(e.to_string()))?;
                    for v in values.iter_mut() {
                        *v += normal.sample(&mut rng);
                    }
                }
            }
            ComponentKind::CovariateLinear => {
                let innovation = Normal::new(0.0, (1.0 - COVARIATE_AR * COVARIATE_AR).sqrt())
                    .expect("valid std");
                let mut state: f64 = Normal::new(0.0, 1.0).expect("valid std").sample(&mut rng);
                let gain = c.covariate_gain.unwrap_or(1.0);
                let mut channel = Vec::with_capacity(n);
                for v in values.iter_mut() {
                    let cv = c.amplitude * state;
                    channel.push(cv);
                    *v += gain * cv;
                    state = COVARIATE_AR * state + innovation.sample(&mut rng);
                }
                let name = c.name.clone().unwrap_or_else(|| format!("cov{k}"));
                covariates.push(crate::series::Channel::new(name, channel));
            }
        }
    }
    let mask = vec![true; n];
    TimeSeries::new(spec.id.clone(), 0, values, mask, covariates, spec.freq)
}
