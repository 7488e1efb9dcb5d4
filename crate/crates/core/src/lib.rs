//! Zero-shot time-series imputation with time-indexed models.
//!
//! Every timestamp of a segment is mapped to a contextual representation
//! (a normalized time index plus Fourier terms, optionally stacked with
//! covariates), a linear head is fitted on the observed points of that very
//! segment, and the head is evaluated at the missing timestamps. The crate
//! also ships the local baselines, the missingness scenarios, the metrics and
//! a benchmark harness used to compare imputers.
//!
//! ```
//! use tix::prelude::*;
//!
//! let freq = FrequencySpec::new(24, 24).unwrap();
//! let values: Vec<f64> = (0..24 * 28)
//!     .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 24.0).sin())
//!     .collect();
//! let series = TimeSeries::fully_observed("demo", values, freq);
//! let segments = extract_segments(&series, 28, 0.5, 2.0, 0).unwrap();
//! let masked = apply_scenario(&segments[0], &Scenario::blocks(2, "blocks1").unwrap(), 1).unwrap();
//!
//! let imputer = ImputerConfig::from_id("tix_fourier").unwrap().build();
//! let out = imputer.impute(&masked).unwrap();
//! let mae = znorm_mae(&masked.eval_truth(), &out.point, masked.norm).unwrap();
//! assert!(mae < 1e-3);
//! ```

pub mod error;
pub mod features;
pub mod harness;
pub mod imputers;
pub mod masking;
pub mod metrics;
pub mod regress;
pub mod series;
pub mod synth;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::features::{
        handcrafted_features, random_fourier_basis, stack_covariates, FeatureKind, FeatureMatrix,
        FeatureSpec,
    };
    pub use crate::imputers::{Imputation, Imputer, ImputerConfig};
    pub use crate::masking::{apply_scenario, Scenario, ScenarioKind};
    pub use crate::metrics::{average_ranks, quantile_loss, wql, znorm_mae, ScoreRecord};
    pub use crate::regress::{enforce_noncrossing, pinball_fit, predict, ridge_fit, LinearModel};
    pub use crate::series::{
        chrono_split, extract_segments, znorm_stats, FrequencySpec, NormStats, Segment, TimeSeries,
    };
    pub use crate::synth::{generate, Component, ComponentKind, SynthSpec};
}

// The guide's code listings compile and run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data-model.md")]
    mod data_model {}
    #[doc = include_str!("../../../book/src/missingness.md")]
    mod missingness {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/regression.md")]
    mod regression {}
    #[doc = include_str!("../../../book/src/imputers.md")]
    mod imputers {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
