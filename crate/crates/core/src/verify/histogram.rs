//! Two-dimensional `(y, ℓ)` histograms with expected cell masses integrated
//! from the closed-form law.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::density::{atom_unchecked, continuous_on_side, truncation_radius, SkewParams, Side};
use crate::error::{check_time, Error, Result};
use crate::path_sim::PathRecord;
use crate::quadrature::{integrate, integrate_rect, QuadratureSpec};
use crate::samplers::JointSample;

/// Expected masses must add up to one within this tolerance.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Anything that carries a terminal position, a local time and a hit flag.
pub trait JointObservation {
    fn y(&self) -> f64;
    fn ell(&self) -> f64;
    fn hit(&self) -> bool;
}

impl JointObservation for JointSample {
    fn y(&self) -> f64 {
        self.y
    }
    fn ell(&self) -> f64 {
        self.ell
    }
    fn hit(&self) -> bool {
        self.hit
    }
}

impl JointObservation for PathRecord {
    fn y(&self) -> f64 {
        self.terminal
    }
    fn ell(&self) -> f64 {
        self.local_time
    }
    fn hit(&self) -> bool {
        self.local_time > 0.0
    }
}

/// Interior cut points of the `y` and `ℓ` axes.
///
/// The outermost `y` bins and the last `ℓ` bin are open-ended; the first `ℓ`
/// bin starts at 0. `y` cuts must include 0 so that no bin straddles the
/// interface.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSpec {
    y_cuts: Vec<f64>,
    ell_cuts: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|c| c.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

impl BinSpec {
    pub fn new(y_cuts: Vec<f64>, ell_cuts: Vec<f64>) -> Result<Self> {
        if y_cuts.is_empty() || ell_cuts.is_empty() {
            return Err(Error::Config("at least two bins per axis are required".into()));
        }
        if !strictly_increasing(&y_cuts) || !strictly_increasing(&ell_cuts) {
            return Err(Error::Config("bin cuts must be finite and strictly increasing".into()));
        }
        if !y_cuts.contains(&0.0) {
            return Err(Error::Config("y cuts must include 0; bins may not straddle the interface".into()));
        }
        if ell_cuts[0] <= 0.0 {
            return Err(Error::Config("local-time cuts must be positive".into()));
        }
        Ok(Self { y_cuts, ell_cuts })
    }

    /// `bins` cells per axis at half-normal quantiles scaled by `√t`.
    ///
    /// `y` gets `bins/2` cells below 0 and the rest above; the grid does not
    /// depend on `x` or `α`.
    pub fn quantile_grid(t: f64, bins: usize) -> Result<Self> {
        check_time(t)?;
        if bins < 2 {
            return Err(Error::Config("at least two bins per axis are required".into()));
        }
        let normal = Normal::standard();
        let st = t.sqrt();
        let half_normal = |j: usize, k: usize| st * normal.inverse_cdf(0.5 + 0.5 * j as f64 / k as f64);
        let below = bins / 2;
        let above = bins - below;
        let mut y_cuts: Vec<f64> = (1..below).rev().map(|j| -half_normal(j, below)).collect();
        y_cuts.push(0.0);
        y_cuts.extend((1..above).map(|j| half_normal(j, above)));
        let ell_cuts = (1..bins).map(|j| half_normal(j, bins)).collect();
        Self::new(y_cuts, ell_cuts)
    }

    pub fn y_bins(&self) -> usize {
        self.y_cuts.len() + 1
    }

    pub fn ell_bins(&self) -> usize {
        self.ell_cuts.len() + 1
    }

    fn y_bounds(&self, j: usize, r: f64) -> (f64, f64) {
        let lo = if j == 0 { -r } else { self.y_cuts[j - 1] };
        let hi = if j == self.y_cuts.len() { r } else { self.y_cuts[j] };
        (lo.max(-r), hi.min(r))
    }

    fn ell_bounds(&self, i: usize, r: f64) -> (f64, f64) {
        let lo = if i == 0 { 0.0 } else { self.ell_cuts[i - 1] };
        let hi = if i == self.ell_cuts.len() { r } else { self.ell_cuts[i] };
        (lo.min(r), hi.min(r))
    }

    fn y_index(&self, y: f64) -> usize {
        self.y_cuts.partition_point(|&c| c <= y)
    }

    fn ell_index(&self, ell: f64) -> usize {
        self.ell_cuts.partition_point(|&c| c <= ell)
    }
}

/// Observed counts and expected probabilities, continuous cells plus an
/// `ℓ = 0` atom row.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub bins: BinSpec,
    /// Row-major `[ell_bin][y_bin]`.
    pub counts: Vec<u64>,
    pub atom_counts: Vec<u64>,
    pub expected: Vec<f64>,
    pub atom_expected: Vec<f64>,
    pub n: u64,
}

impl Histogram2d {
    pub fn expected_total(&self) -> f64 {
        self.expected.iter().chain(&self.atom_expected).sum()
    }

    /// All cells, continuous then atom row, as `(observed, probability)`.
    pub fn cells(&self) -> (Vec<u64>, Vec<f64>) {
        let obs = self.counts.iter().chain(&self.atom_counts).copied().collect();
        let exp = self.expected.iter().chain(&self.atom_expected).copied().collect();
        (obs, exp)
    }
}

/// Expected cell probabilities for a start at `x`.
pub fn expected_masses(
    bins: &BinSpec,
    x: f64,
    t: f64,
    s: &SkewParams,
    spec: &QuadratureSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_time(t)?;
    let r = truncation_radius(x, t, spec);
    let alpha = s.alpha();
    let cell_spec = QuadratureSpec { abs_tol: 1e-12, ..*spec };
    let mut expected = Vec::with_capacity(bins.y_bins() * bins.ell_bins());
    for i in 0..bins.ell_bins() {
        let (l0, l1) = bins.ell_bounds(i, r);
        for j in 0..bins.y_bins() {
            let (y0, y1) = bins.y_bounds(j, r);
            if y1 <= y0 || l1 <= l0 {
                expected.push(0.0);
                continue;
            }
            let side = if y0 >= 0.0 { Side::Above } else { Side::Below };
            let est = integrate_rect(
                |y, ell| continuous_on_side(x, y, ell, t, alpha, side),
                (y0, y1),
                (l0, l1),
                &cell_spec,
            )?;
            expected.push(est.value.max(0.0));
        }
    }
    let mut atom_expected = Vec::with_capacity(bins.y_bins());
    for j in 0..bins.y_bins() {
        let (y0, y1) = bins.y_bounds(j, r);
        let on_start_side = (x > 0.0 && y0 >= 0.0) || (x < 0.0 && y1 <= 0.0);
        if !on_start_side || y1 <= y0 {
            atom_expected.push(0.0);
            continue;
        }
        let est = integrate(|y| atom_unchecked(x, y, t), y0, y1, &cell_spec)?;
        atom_expected.push(est.value.max(0.0));
    }
    let total: f64 = expected.iter().chain(&atom_expected).sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::Quadrature(format!("expected bin masses sum to {total}, not 1")));
    }
    Ok((expected, atom_expected))
}

/// Bins `samples` and attaches the expected probabilities for a start at `x`.
pub fn histogram2d<O: JointObservation>(
    samples: &[O],
    bins: &BinSpec,
    x: f64,
    t: f64,
    s: &SkewParams,
    spec: &QuadratureSpec,
) -> Result<Histogram2d> {
    if samples.is_empty() {
        return Err(Error::Config("histogram needs at least one sample".into()));
    }
    let mut counts = vec![0u64; bins.y_bins() * bins.ell_bins()];
    let mut atom_counts = vec![0u64; bins.y_bins()];
    for o in samples {
        let j = bins.y_index(o.y());
        if o.hit() {
            counts[bins.ell_index(o.ell()) * bins.y_bins() + j] += 1;
        } else {
            atom_counts[j] += 1;
        }
    }
    let (expected, atom_expected) = expected_masses(bins, x, t, s, spec)?;
    Ok(Histogram2d {
        bins: bins.clone(),
        counts,
        atom_counts,
        expected,
        atom_expected,
        n: samples.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::samplers::sample_joint_many;

    #[test]
    fn bin_spec_validation() {
        assert!(BinSpec::new(vec![], vec![1.0]).is_err());
        assert!(BinSpec::new(vec![0.0], vec![]).is_err());
        assert!(BinSpec::new(vec![-1.0, 1.0], vec![1.0]).is_err());
        assert!(BinSpec::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(BinSpec::new(vec![0.0], vec![0.0]).is_err());
        assert!(BinSpec::new(vec![0.0], vec![0.5]).is_ok());
        assert!(BinSpec::quantile_grid(1.0, 1).is_err());
        let g = BinSpec::quantile_grid(1.0, 8).unwrap();
        assert_eq!((g.y_bins(), g.ell_bins()), (8, 8));
    }

    #[test]
    fn indices() {
        let b = BinSpec::new(vec![-1.0, 0.0, 1.0], vec![0.5]).unwrap();
        assert_eq!(b.y_index(-5.0), 0);
        assert_eq!(b.y_index(-0.5), 1);
        assert_eq!(b.y_index(0.0), 2);
        assert_eq!(b.y_index(3.0), 3);
        assert_eq!(b.ell_index(0.2), 0);
        assert_eq!(b.ell_index(0.5), 1);
    }

    #[test]
    fn empty_samples_rejected() {
        let b = BinSpec::quantile_grid(1.0, 4).unwrap();
        let none: Vec<JointSample> = vec![];
        let s = SkewParams::new(0.5).unwrap();
        assert!(histogram2d(&none, &b, 0.0, 1.0, &s, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn counts_and_masses_add_up() {
        let s = SkewParams::new(0.3).unwrap();
        let b = BinSpec::quantile_grid(1.0, 8).unwrap();
        let mut rng = RngStream::new(4, 0);
        let draws = sample_joint_many(1.0, 1.0, &s, 2_000, &mut rng).unwrap();
        let h = histogram2d(&draws, &b, 1.0, 1.0, &s, &QuadratureSpec::default()).unwrap();
        let total: u64 = h.counts.iter().chain(&h.atom_counts).sum();
        assert_eq!(total, 2_000);
        assert!((h.expected_total() - 1.0).abs() < MASS_TOLERANCE);
        // No atom mass on the far side of the start.
        for j in 0..b.y_bins() / 2 {
            assert_eq!(h.atom_expected[j], 0.0);
        }
    }

    #[test]
    fn symmetric_grid_at_half() {
        let s = SkewParams::new(0.5).unwrap();
        let b = BinSpec::quantile_grid(1.0, 8).unwrap();
        let (e, atom) = expected_masses(&b, 0.0, 1.0, &s, &QuadratureSpec::default()).unwrap();
        assert!(atom.iter().all(|&m| m == 0.0));
        let ny = b.y_bins();
        for i in 0..b.ell_bins() {
            for j in 0..ny {
                let a = e[i * ny + j];
                let m = e[i * ny + (ny - 1 - j)];
                assert!((a - m).abs() < 1e-12, "row {i} col {j}: {a} vs {m}");
            }
        }
    }
}
