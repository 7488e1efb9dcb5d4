//! Missingness scenarios: pointwise removal of a fraction of the visible
//! points, or removal of whole day-aligned blocks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::Segment;

const MAX_BLOCK_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Pointwise,
    Blocks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Fraction removed (pointwise) or number of whole days (blocks).
    pub param: f64,
    pub label: String,
}

impl Scenario {
    pub fn pointwise(fraction: f64, label: impl Into<String>) -> Result<Self> {
        let s = Scenario {
            kind: ScenarioKind::Pointwise,
            param: fraction,
            label: label.into(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn blocks(days: usize, label: impl Into<String>) -> Result<Self> {
        let s = Scenario {
            kind: ScenarioKind::Blocks,
            param: days as f64,
            label: label.into(),
        };
        s.validate()?;
        Ok(s)
    }

    /// 50% and 70% pointwise removal, two and four missing days.
    pub fn defaults() -> Vec<Scenario> {
        vec![
            Scenario::pointwise(0.5, "pointwise1").unwrap(),
            Scenario::pointwise(0.7, "pointwise2").unwrap(),
            Scenario::blocks(2, "blocks1").unwrap(),
            Scenario::blocks(4, "blocks2").unwrap(),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ScenarioKind::Pointwise if !(self.param > 0.0 && self.param < 1.0) => Err(invalid(
                "pointwise fraction must lie strictly inside (0, 1)",
            )),
            ScenarioKind::Blocks if !(self.param >= 1.0 && self.param.fract() == 0.0) => Err(
                invalid("block count must be a positive whole number of days"),
            ),
            _ => Ok(()),
        }
    }
}

/// Applies `scenario` to the visible positions of `segment`, moving the
/// removed positions into the evaluation mask.
pub fn apply_scenario(segment: &Segment, scenario: &Scenario, seed: u64) -> Result<Segment> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let removed = match scenario.kind {
        ScenarioKind::Pointwise => pointwise_positions(segment, scenario.param, &mut rng),
        ScenarioKind::Blocks => block_positions(segment, scenario.param as usize, &mut rng)?,
    };
    let mut obs = segment.obs_mask.clone();
    let mut eval = segment.eval_mask.clone();
    for i in removed {
        obs[i] = false;
        eval[i] = true;
    }
    segment.with_masks(obs, eval)
}

fn pointwise_positions(segment: &Segment, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let visible = segment.visible_indices();
    let n_obs = visible.len();
    // At least one visible point must survive.
    let count = ((fraction * n_obs as f64 + 0.5).floor() as usize).min(n_obs.saturating_sub(1));
    let mut picked: Vec<usize> = sample(rng, n_obs, count)
        .into_iter()
        .map(|k| visible[k])
        .collect();
    picked.sort_unstable();
    picked
}

fn block_positions(segment: &Segment, days: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let spd = segment.freq.steps_per_day();
    let n_slots = segment.len() / spd;
    if days >= n_slots {
        return Err(Error::InfeasibleBlocks);
    }
    let slot_visible = |d: usize| {
        (d * spd..(d + 1) * spd)
            .filter(|&i| segment.obs_mask[i])
            .count()
    };
    let feasible: Vec<bool> = (0..n_slots).map(|d| slot_visible(d) > 0).collect();
    if feasible.iter().filter(|&&f| f).count() < days {
        return Err(Error::InfeasibleBlocks);
    }

    let mut chosen = vec![false; n_slots];
    let mut n_chosen = 0;
    let mut rejections = 0;
    while n_chosen < days && rejections < MAX_BLOCK_REJECTIONS {
        let d = rng.random_range(0..n_slots);
        if feasible[d] && !chosen[d] {
            chosen[d] = true;
            n_chosen += 1;
        } else {
            rejections += 1;
        }
    }
    for d in 0..n_slots {
        if n_chosen == days {
            break;
        }
        if feasible[d] && !chosen[d] {
            chosen[d] = true;
            n_chosen += 1;
        }
    }

    let removed: Vec<usize> = (0..n_slots)
        .filter(|&d| chosen[d])
        .flat_map(|d| d * spd..(d + 1) * spd)
        .filter(|&i| segment.obs_mask[i])
        .collect();
    if removed.len() >= segment.n_visible() {
        return Err(Error::InfeasibleBlocks);
    }
    Ok(removed)
}
