//! Check runner tying the samplers and the random walk to the closed forms.
//!
//! A run takes a list of [`CheckSpec`]s, executes them independently and
//! returns a [`VerificationReport`]. Every check reports a statistic and a
//! threshold and passes iff `statistic ≤ threshold`: algebraic checks compare
//! a maximal discrepancy with a tolerance, KS and chi-square checks compare
//! the test statistic with its critical value at the requested significance,
//! and z-checks compare `|z|` with a number of standard errors.

mod checks;
pub mod histogram;
mod suite;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use histogram::{histogram2d, BinSpec, Histogram2d, JointObservation};
pub use suite::default_suite;

/// Smallest sample size accepted by statistical checks.
pub const MIN_STATISTICAL_SAMPLES: usize = 1_000;

/// What a check compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Normalization,
    FluxJump,
    Symmetry,
    MarginalConsistency,
    Ks1d,
    Chisq2d,
    AtomFraction,
    Scaling,
    Mean,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::Normalization,
        CheckKind::FluxJump,
        CheckKind::Symmetry,
        CheckKind::MarginalConsistency,
        CheckKind::Ks1d,
        CheckKind::Chisq2d,
        CheckKind::AtomFraction,
        CheckKind::Scaling,
        CheckKind::Mean,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckKind::Normalization => "normalization",
            CheckKind::FluxJump => "flux-jump",
            CheckKind::Symmetry => "symmetry",
            CheckKind::MarginalConsistency => "marginal-consistency",
            CheckKind::Ks1d => "ks-1d",
            CheckKind::Chisq2d => "chisq-2d",
            CheckKind::AtomFraction => "atom-fraction",
            CheckKind::Scaling => "scaling",
            CheckKind::Mean => "mean",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown check kind '{s}'")))
    }
}

/// Where the data under test comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// The closed forms themselves (algebraic checks).
    #[default]
    Density,
    /// Exact joint draws.
    Sampler,
    /// Skew random walk paths.
    Path,
}

/// Which scalar of a draw or path is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    #[default]
    Terminal,
    LocalTime,
    Occupation,
    /// Terminal position of draws from the `ℓ = 0` atom.
    AtomY,
    /// Indicator of a positive terminal position.
    Positive,
}

/// Numerical parameters of a check. Unused fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckParams {
    pub x: f64,
    pub t: f64,
    pub alpha: f64,
    pub v: f64,
    pub y: f64,
    pub ell: f64,
    /// Sample or path count; for algebraic checks, the number of random
    /// tuples (0 means the single point given by `x, t, y, ell, alpha`).
    pub n_samples: usize,
    /// Random-walk steps per unit time.
    pub steps: u32,
    /// Bins per axis (chi-square) or grid points per axis (marginal consistency).
    pub bins: usize,
    /// Overrides the kind's default threshold for non-statistical comparisons.
    pub tolerance: Option<f64>,
    pub significance: f64,
    pub source: Source,
    pub observable: Observable,
}

impl Default for CheckParams {
    fn default() -> Self {
        Self {
            x: 0.0,
            t: 1.0,
            alpha: 0.5,
            v: 0.0,
            y: 0.5,
            ell: 0.7,
            n_samples: 0,
            steps: 10_000,
            bins: 8,
            tolerance: None,
            significance: 0.01,
            source: Source::Density,
            observable: Observable::Terminal,
        }
    }
}

/// One named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub params: CheckParams,
    #[serde(default)]
    pub seed: u64,
}

impl CheckSpec {
    pub fn new(name: impl Into<String>, kind: CheckKind, params: CheckParams, seed: u64) -> Self {
        Self { name: name.into(), kind: kind.as_str().to_string(), params, seed }
    }

    fn is_statistical(&self, kind: CheckKind) -> bool {
        match kind {
            CheckKind::Ks1d | CheckKind::Chisq2d | CheckKind::AtomFraction | CheckKind::Mean => true,
            CheckKind::Symmetry => self.params.source == Source::Path,
            _ => false,
        }
    }

    /// Parses the kind and checks the parameters that make the check meaningful.
    pub fn validate(&self) -> Result<CheckKind> {
        let kind: CheckKind = self.kind.parse()?;
        let p = &self.params;
        let fail = |msg: String| Err(Error::Config(format!("check '{}': {msg}", self.name)));
        if self.name.trim().is_empty() {
            return Err(Error::Config("check names must be non-empty".into()));
        }
        if !(p.significance > 0.0 && p.significance < 1.0) {
            return fail(format!("significance must lie in (0, 1), got {}", p.significance));
        }
        if let Some(tol) = p.tolerance {
            if !(tol > 0.0) {
                return fail(format!("tolerance must be positive, got {tol}"));
            }
        }
        if self.is_statistical(kind) && p.n_samples < MIN_STATISTICAL_SAMPLES {
            return fail(format!(
                "statistical checks need at least {MIN_STATISTICAL_SAMPLES} samples, got {}",
                p.n_samples
            ));
        }
        let stochastic = matches!(p.source, Source::Sampler | Source::Path);
        match kind {
            CheckKind::Normalization
            | CheckKind::FluxJump
            | CheckKind::MarginalConsistency
            | CheckKind::Scaling
                if p.source != Source::Density =>
            {
                return fail(format!("{kind} checks evaluate the closed forms; source must be 'density'"));
            }
            CheckKind::Symmetry if p.source == Source::Sampler => {
                return fail("symmetry checks use source 'density' or 'path'".into());
            }
            CheckKind::Ks1d | CheckKind::Chisq2d | CheckKind::AtomFraction | CheckKind::Mean
                if !stochastic =>
            {
                return fail(format!("{kind} checks need source 'sampler' or 'path'"));
            }
            _ => {}
        }
        if p.source == Source::Path && kind != CheckKind::Symmetry && p.v != 0.0 {
            return fail("closed-form comparators exist for driftless walks only; set v = 0".into());
        }
        match (kind, p.source, p.observable) {
            (CheckKind::Ks1d, Source::Sampler, Observable::Occupation | Observable::Positive)
            | (CheckKind::Ks1d, Source::Path, Observable::AtomY | Observable::Positive) => {
                return fail(format!("observable {:?} has no KS comparator for this source", p.observable));
            }
            (CheckKind::Ks1d, Source::Path, Observable::Occupation)
                if !(p.alpha == 0.5 && p.x == 0.0) =>
            {
                return fail("the arcsine comparator needs alpha = 0.5 and x = 0".into());
            }
            (CheckKind::Mean, _, Observable::LocalTime | Observable::Positive) => {}
            (CheckKind::Mean, _, other) => {
                return fail(format!("observable {other:?} has no closed-form mean"));
            }
            (CheckKind::MarginalConsistency, _, _) if p.bins < 1 => {
                return fail("grid must have at least one point per axis".into());
            }
            (CheckKind::Chisq2d, _, _) if p.bins < 2 => {
                return fail("chi-square needs at least two bins per axis".into());
            }
            _ => {}
        }
        Ok(kind)
    }
}

/// Result of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: String,
    /// `None` when the check could not be evaluated.
    pub statistic: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
    pub n_samples: usize,
    pub millis: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Outcome of a run: per-check results plus the conjunction of their passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub overall_pass: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    /// The report with every wall-clock field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.millis = 0;
        }
        r
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs every check. Configuration problems abort the run; failures inside
/// a check are recorded on that check.
pub fn run_checks(seed: u64, specs: &[CheckSpec]) -> Result<VerificationReport> {
    if specs.is_empty() {
        return Err(Error::Config("no checks to run".into()));
    }
    let mut names = std::collections::HashSet::new();
    let kinds = specs
        .iter()
        .map(|s| {
            if !names.insert(s.name.as_str()) {
                return Err(Error::Config(format!("duplicate check name '{}'", s.name)));
            }
            s.validate()
        })
        .collect::<Result<Vec<_>>>()?;

    let checks: Vec<CheckOutcome> = specs
        .par_iter()
        .zip(kinds.par_iter())
        .map(|(spec, &kind)| {
            let start = Instant::now();
            let mut outcome = checks::execute(spec, kind);
            outcome.millis = start.elapsed().as_millis() as u64;
            outcome
        })
        .collect();
    let overall_pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        checks,
        overall_pass,
    })
}
