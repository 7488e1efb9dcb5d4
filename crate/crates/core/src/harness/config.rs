//! Run configuration, read from a TOML file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::FeatureSpec;
use crate::imputers::ImputerConfig;
use crate::masking::Scenario;
use crate::metrics::RankMetric;
use crate::series::FrequencySpec;
use crate::synth::{Component, SynthSpec};

fn default_splits() -> [f64; 3] {
    [0.7, 0.1, 0.2]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    #[serde(default = "SegmentConfig::default_len")]
    pub len_days: usize,
    #[serde(default = "SegmentConfig::default_stride")]
    pub stride: [f64; 2],
}

impl SegmentConfig {
    fn default_len() -> usize {
        28
    }

    fn default_stride() -> [f64; 2] {
        [0.5, 2.0]
    }
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            len_days: Self::default_len(),
            stride: Self::default_stride(),
        }
    }
}

/// Synthetic series description inside a dataset entry; the frequency and
/// id come from the entry itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthBody {
    pub length_days: usize,
    #[serde(default)]
    pub seed: u64,
    pub components: Vec<Component>,
}

fn default_time_column() -> String {
    "timestamp".to_string()
}

fn default_value_column() -> String {
    "value".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub id: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<SynthBody>,
    pub steps_per_day: usize,
    #[serde(default)]
    pub seasonal_period: Option<usize>,
    #[serde(default)]
    pub covariates: Vec<String>,
    #[serde(default = "default_time_column")]
    pub time_column: String,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    /// Segments whose visible standard deviation falls below this value are
    /// dropped before masking.
    #[serde(default)]
    pub min_std_filter: Option<f64>,
}

impl DatasetConfig {
    pub fn freq(&self) -> Result<FrequencySpec> {
        FrequencySpec::new(
            self.steps_per_day,
            self.seasonal_period.unwrap_or(self.steps_per_day),
        )
    }

    pub fn synth_spec(&self) -> Result<Option<SynthSpec>> {
        let Some(body) = &self.synth else {
            return Ok(None);
        };
        Ok(Some(SynthSpec {
            id: self.id.clone(),
            length_days: body.length_days,
            freq: self.freq()?,
            components: body.components.clone(),
            seed: body.seed,
        }))
    }
}

/// One imputer of the run: a registry id plus optional overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImputerEntry {
    pub id: String,
    /// Name used in reports; defaults to `id`.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub features: Option<FeatureSpec>,
    #[serde(default)]
    pub use_covariates: Option<bool>,
    #[serde(default)]
    pub quantile_levels: Option<Vec<f64>>,
    #[serde(default)]
    pub seasonal_period: Option<usize>,
}

impl ImputerEntry {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.id)
    }

    pub fn resolve(&self) -> Result<ImputerConfig> {
        let mut cfg = ImputerConfig::from_id(&self.id)?;
        cfg.id = self.label().to_string();
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(f) = &self.features {
            cfg.features = f.clone();
        }
        if let Some(u) = self.use_covariates {
            cfg.use_covariates = u;
        }
        if self.quantile_levels.is_some() {
            cfg.quantile_levels = self.quantile_levels.clone();
        }
        if self.seasonal_period.is_some() {
            cfg.seasonal_period = self.seasonal_period;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_splits")]
    pub splits: [f64; 3],
    #[serde(default)]
    pub segment: SegmentConfig,
    /// Empty means the four default scenarios.
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub rank_metric: RankMetric,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub datasets: Vec<DatasetConfig>,
    pub imputers: Vec<ImputerEntry>,
}

impl RunConfig {
    pub fn new(datasets: Vec<DatasetConfig>, imputers: Vec<ImputerEntry>) -> Self {
        Self {
            seed: 0,
            splits: default_splits(),
            segment: SegmentConfig::default(),
            scenarios: Vec::new(),
            rank_metric: RankMetric::Mae,
            output_dir: default_output_dir(),
            datasets,
            imputers,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative dataset paths and the output directory
    /// are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.datasets {
            if let Some(p) = &d.path {
                if p.is_relative() {
                    d.path = Some(base.join(p));
                }
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        if self.scenarios.is_empty() {
            Scenario::defaults()
        } else {
            self.scenarios.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("at least one dataset is required".into()));
        }
        if self.imputers.is_empty() {
            return Err(Error::Config("at least one imputer is required".into()));
        }
        let mut labels = HashSet::new();
        for s in self.scenarios() {
            s.validate()?;
            if !labels.insert(s.label.clone()) {
                return Err(Error::Config(format!(
                    "duplicate scenario label `{}`",
                    s.label
                )));
            }
        }
        let mut ids = HashSet::new();
        for d in &self.datasets {
            if !ids.insert(d.id.as_str()) {
                return Err(Error::Config(format!("duplicate dataset id `{}`", d.id)));
            }
            if d.path.is_some() == d.synth.is_some() {
                return Err(Error::Config(format!(
                    "dataset `{}` needs exactly one of `path` or `synth`",
                    d.id
                )));
            }
            d.freq()?;
        }
        let mut names = HashSet::new();
        for i in &self.imputers {
            i.resolve()?;
            if !names.insert(i.label()) {
                return Err(Error::Config(format!(
                    "duplicate imputer label `{}`",
                    i.label()
                )));
            }
        }
        if self.segment.len_days == 0 {
            return Err(Error::Config("segment.len_days must be positive".into()));
        }
        let [lo, hi] = self.segment.stride;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::Config(
                "segment.stride must satisfy 0 < min <= max".into(),
            ));
        }
        Ok(())
    }

    /// Hash of everything that influences results. The output directory is
    /// left out so the same run written elsewhere keeps its digest.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.scenarios = self.scenarios();
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
