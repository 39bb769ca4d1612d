//! Skew random walk approximation of skew Brownian motion with drift.
//!
//! The walk lives on the lattice `hℤ`, `h = 1/√n`, and moves every `1/n`
//! time units. Away from 0 it steps `±h` with probabilities `(1 ± v h)/2`;
//! from 0 it steps up with probability `α`. Local time is `h` times the
//! number of visits to 0 and occupation time counts the steps spent above 0.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_finite, check_time, Error, Result};
use crate::rng::RngStream;

/// Smallest admissible number of steps per unit time.
pub const MIN_STEPS_PER_UNIT: u32 = 100;

/// Drift `v` of the walk and the derived coupling `γ = (2α − 1)v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftSpec {
    pub v: f64,
    pub gamma: f64,
}

impl DriftSpec {
    pub fn new(v: f64, alpha: f64) -> Self {
        Self { v, gamma: (2.0 * alpha - 1.0) * v }
    }

    pub fn none() -> Self {
        Self { v: 0.0, gamma: 0.0 }
    }
}

/// How steps taken from site 0 enter the occupation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    /// A step from 0 counts with weight `α`, the probability it goes up.
    #[default]
    Split,
    /// Only steps from sites strictly above 0 count.
    StrictlyPositive,
}

/// Walk parameters. Unlike [`crate::SkewParams`], `alpha` may be 0 or 1
/// (reflection at the interface).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub x: f64,
    pub t: f64,
    pub alpha: f64,
    pub drift: DriftSpec,
    pub steps_per_unit: u32,
    pub tie_rule: TieRule,
}

impl WalkConfig {
    pub fn new(x: f64, t: f64, alpha: f64, v: f64, steps_per_unit: u32) -> Result<Self> {
        let cfg = Self {
            x,
            t,
            alpha,
            drift: DriftSpec::new(v, alpha),
            steps_per_unit,
            tie_rule: TieRule::Split,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tie_rule(mut self, rule: TieRule) -> Self {
        self.tie_rule = rule;
        self
    }

    /// Lattice spacing `1/√n`.
    pub fn space_step(&self) -> f64 {
        1.0 / (self.steps_per_unit as f64).sqrt()
    }

    /// Total number of steps, `round(n t)`.
    pub fn total_steps(&self) -> u64 {
        (self.steps_per_unit as f64 * self.t).round() as u64
    }

    /// Lattice index of the start, `x` rounded to the nearest site.
    pub fn start_site(&self) -> i64 {
        (self.x / self.space_step()).round() as i64
    }

    fn validate(&self) -> Result<()> {
        check_time(self.t)?;
        check_finite("start position", self.x)?;
        check_finite("drift", self.drift.v)?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!("skewness must lie in [0, 1], got {}", self.alpha)));
        }
        if self.steps_per_unit < MIN_STEPS_PER_UNIT {
            return Err(Error::Parameter(format!(
                "at least {MIN_STEPS_PER_UNIT} steps per unit time required, got {}",
                self.steps_per_unit
            )));
        }
        let bias = self.drift.v.abs() * self.space_step();
        if bias >= 1.0 {
            return Err(Error::Parameter(format!(
                "drift bias |v|·h = {bias} must be below 1; increase the steps per unit time"
            )));
        }
        if self.total_steps() == 0 {
            return Err(Error::Parameter(format!(
                "horizon t = {} is shorter than one step of 1/{}",
                self.t, self.steps_per_unit
            )));
        }
        Ok(())
    }
}

/// Summary of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRecord {
    pub terminal: f64,
    pub local_time: f64,
    pub occupation_pos: f64,
    pub n_steps: u64,
}

struct Counters {
    site: i64,
    visits: u64,
    /// Steps above 0, plus tie-rule weight for steps from 0, in units of steps.
    above: f64,
}

/// Simulates one path of `m` steps. Visits to 0 are counted at every time
/// `0..=m`; occupation is counted per step from its starting site.
pub fn simulate_path(cfg: &WalkConfig, rng: &mut RngStream) -> Result<PathRecord> {
    cfg.validate()?;
    let m = cfg.total_steps();
    let tie = match cfg.tie_rule {
        TieRule::Split => cfg.alpha,
        TieRule::StrictlyPositive => 0.0,
    };
    let c = if cfg.drift.v == 0.0 {
        walk_symmetric(cfg.start_site(), m, cfg.alpha, tie, rng)
    } else {
        let p_up = 0.5 * (1.0 + cfg.drift.v * cfg.space_step());
        walk_biased(cfg.start_site(), m, cfg.alpha, p_up, tie, rng)
    };
    let visits = c.visits + u64::from(c.site == 0);
    let h = cfg.space_step();
    Ok(PathRecord {
        terminal: c.site as f64 * h,
        local_time: visits as f64 * h,
        occupation_pos: (c.above / m as f64 * cfg.t).clamp(0.0, cfg.t),
        n_steps: m,
    })
}

#[inline]
fn step_from_zero(alpha: f64, rng: &mut RngStream) -> i64 {
    if rng.uniform() < alpha {
        1
    } else {
        -1
    }
}

/// Unbiased walk: one random bit per step, and whole 64-step blocks at once
/// when the walk is too far from 0 to reach it within the block.
fn walk_symmetric(start: i64, m: u64, alpha: f64, tie: f64, rng: &mut RngStream) -> Counters {
    let mut c = Counters { site: start, visits: 0, above: 0.0 };
    let mut k = 0u64;
    let mut bits = 0u64;
    let mut nbits = 0u32;
    while k < m {
        if c.site == 0 {
            c.visits += 1;
            c.above += tie;
            c.site += step_from_zero(alpha, rng);
            k += 1;
        } else if c.site.abs() >= 64 && m - k >= 64 {
            let word = rng.next_u64();
            if c.site > 0 {
                c.above += 64.0;
            }
            c.site += 2 * i64::from(word.count_ones()) - 64;
            k += 64;
        } else {
            if nbits == 0 {
                bits = rng.next_u64();
                nbits = 64;
            }
            if c.site > 0 {
                c.above += 1.0;
            }
            c.site += if bits & 1 == 1 { 1 } else { -1 };
            bits >>= 1;
            nbits -= 1;
            k += 1;
        }
    }
    c
}

fn walk_biased(start: i64, m: u64, alpha: f64, p_up: f64, tie: f64, rng: &mut RngStream) -> Counters {
    let mut c = Counters { site: start, visits: 0, above: 0.0 };
    for _ in 0..m {
        if c.site == 0 {
            c.visits += 1;
            c.above += tie;
            c.site += step_from_zero(alpha, rng);
        } else {
            if c.site > 0 {
                c.above += 1.0;
            }
            c.site += if rng.uniform() < p_up { 1 } else { -1 };
        }
    }
    c
}

/// `count` independent paths; path `i` uses stream `base_stream + i`, so the
/// batch is identical however the work is scheduled.
pub fn simulate_batch(
    cfg: &WalkConfig,
    count: usize,
    seed: u64,
    base_stream: u64,
) -> Result<Vec<PathRecord>> {
    if count == 0 {
        return Err(Error::Parameter("path count must be at least 1".into()));
    }
    cfg.validate()?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate_path(cfg, &mut RngStream::new(seed, base_stream.wrapping_add(i))))
        .collect()
}
