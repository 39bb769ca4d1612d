//! Exact draws of `(B_t, ℓ_t)` without simulating paths.
//!
//! The continuous part of the joint law is constant in shape along each level
//! set `u = ℓ + |y| + |x|`: the mass on a level is `2(u − |x|)(u/t)φ_t(u)`,
//! split `α : 1 − α` between the two sides and spread uniformly along the
//! segment `|y| + ℓ = u − |x|`. A draw therefore picks the atom with the
//! survival probability, and otherwise a level, a side and a point on the
//! segment.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::density::{survival_probability, SkewParams};
use crate::error::{check_finite, check_time, Error, Result};
use crate::rng::RngStream;

/// Iteration cap of every rejection loop.
pub const REJECTION_CAP: u64 = 1_000_000;

/// One draw from the joint law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointSample {
    pub y: f64,
    pub ell: f64,
    /// `false` iff the draw came from the `ℓ = 0` atom (the path never hit 0).
    pub hit: bool,
}

/// A draw together with the level it was generated from (`NaN` for atom draws).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LeveledSample {
    pub sample: JointSample,
    pub level: f64,
}

/// `|Z|` for a standard normal `Z` conditioned on `|Z| > c`.
///
/// Plain rejection for small `c`; above 1, the tail proposal
/// `x = √(c² − 2 ln U)` (density `∝ x φ(x)` on `(c, ∞)`) accepted with
/// probability `c/x`.
fn normal_beyond(c: f64, rng: &mut RngStream) -> Result<f64> {
    for _ in 0..REJECTION_CAP {
        if c < 1.0 {
            let z: f64 = StandardNormal.sample(rng);
            if z.abs() > c {
                return Ok(z.abs());
            }
        } else {
            let x = (c * c - 2.0 * rng.uniform_open_closed().ln()).sqrt();
            if rng.uniform() * x < c {
                return Ok(x);
            }
        }
    }
    Err(Error::IterationCap { cap: REJECTION_CAP, context: format!("normal tail beyond {c}") })
}

/// Level `u > x_abs` with density proportional to `(u − x_abs) · u · φ_t(u)`.
///
/// Drawn through the path decomposition behind that density: the first
/// hitting time of 0 from `x_abs`, conditioned to fall before `t`, is
/// `τ = x_abs²/Z²` with `|Z| > x_abs/√t`; after it `ℓ + |y|` evolves as
/// `2M − W` for a Brownian motion `W`, i.e. as a three-dimensional Bessel
/// process, so `u − x_abs` is the norm of a centred Gaussian vector in `ℝ³`
/// with variance `t − τ` per coordinate.
pub fn sample_u_given_hit(x_abs: f64, t: f64, rng: &mut RngStream) -> Result<f64> {
    check_time(t)?;
    if !(x_abs >= 0.0 && x_abs.is_finite()) {
        return Err(Error::Domain(format!("|x| must be finite and non-negative, got {x_abs}")));
    }
    let remaining = if x_abs > 0.0 {
        let z = normal_beyond(x_abs / t.sqrt(), rng)?;
        (t - x_abs * x_abs / (z * z)).max(0.0)
    } else {
        t
    };
    let mut r2 = 0.0;
    for _ in 0..3 {
        let g: f64 = StandardNormal.sample(rng);
        r2 += g * g;
    }
    Ok(x_abs + (remaining * r2).sqrt())
}

/// Terminal position of a path that never reached 0, on the side of `x`.
///
/// Gaussian proposal `N(|x|, t)` restricted to `(0, ∞)`, accepted with
/// probability `1 − exp(−2|x|y/t)`.
fn sample_atom_position(x_abs: f64, t: f64, rng: &mut RngStream) -> Result<f64> {
    let st = t.sqrt();
    for _ in 0..REJECTION_CAP {
        let z: f64 = StandardNormal.sample(rng);
        let y = x_abs + st * z;
        if y <= 0.0 {
            continue;
        }
        if rng.uniform() < -(-2.0 * x_abs * y / t).exp_m1() {
            return Ok(y);
        }
    }
    Err(Error::IterationCap {
        cap: REJECTION_CAP,
        context: format!("atom position with |x| = {x_abs}, t = {t}"),
    })
}

pub(crate) fn draw(x: f64, t: f64, s: &SkewParams, rng: &mut RngStream) -> Result<LeveledSample> {
    check_time(t)?;
    check_finite("start position", x)?;
    // Work from a non-negative start; a negative start is the mirror image.
    let a = x.abs();
    let (alpha, flip) = if x < 0.0 { (1.0 - s.alpha(), -1.0) } else { (s.alpha(), 1.0) };

    if a > 0.0 && rng.uniform() < survival_probability(a, t)? {
        let y = sample_atom_position(a, t, rng)?;
        return Ok(LeveledSample {
            sample: JointSample { y: flip * y, ell: 0.0, hit: false },
            level: f64::NAN,
        });
    }

    let u = sample_u_given_hit(a, t, rng)?;
    let positive = rng.uniform() < alpha;
    let span = u - a;
    let magnitude = rng.uniform() * span;
    let ell = span - magnitude;
    let y = if positive { magnitude } else { -magnitude };
    Ok(LeveledSample { sample: JointSample { y: flip * y, ell, hit: true }, level: u })
}

/// One exact draw of `(B_t, ℓ_t)` started at `x`.
pub fn sample_joint(x: f64, t: f64, s: &SkewParams, rng: &mut RngStream) -> Result<JointSample> {
    draw(x, t, s, rng).map(|d| d.sample)
}

/// `count` consecutive draws from one stream.
pub fn sample_joint_many(
    x: f64,
    t: f64,
    s: &SkewParams,
    count: usize,
    rng: &mut RngStream,
) -> Result<Vec<JointSample>> {
    (0..count).map(|_| sample_joint(x, t, s, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{atom_weight, heat};
    use libm::erf;

    fn sp(a: f64) -> SkewParams {
        SkewParams::new(a).unwrap()
    }

    /// Moments of (u − a)·u·φ_t(u) on (a, ∞) by a plain midpoint rule.
    fn level_moments(a: f64, t: f64) -> (f64, f64) {
        let hi = a + 14.0 * t.sqrt();
        let n = 400_000;
        let h = (hi - a) / n as f64;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let u = a + (i as f64 + 0.5) * h;
            let w = (u - a) * u * heat(u, t);
            m0 += w;
            m1 += w * u;
            m2 += w * u * u;
        }
        let mean = m1 / m0;
        (mean, m2 / m0 - mean * mean)
    }

    #[test]
    fn level_mean_matches_quadrature() {
        let (mean, var) = level_moments(0.0, 1.0);
        // E[u] for u²φ(u) on (0, ∞) is 2√(2/π).
        assert!((mean - 1.595_769_121_605_730_7).abs() < 1e-6);
        let n = 100_000;
        let mut rng = RngStream::new(11, 0);
        let draws: Vec<f64> = (0..n).map(|_| sample_u_given_hit(0.0, 1.0, &mut rng).unwrap()).collect();
        let sample_mean = draws.iter().sum::<f64>() / n as f64;
        let se = (var / n as f64).sqrt();
        assert!((sample_mean - mean).abs() < 3.0 * se, "{sample_mean} vs {mean} ± {se}");
    }

    #[test]
    fn level_mean_shifted_start() {
        let (a, t) = (0.8, 0.5);
        let (mean, var) = level_moments(a, t);
        let n = 50_000;
        let mut rng = RngStream::new(12, 0);
        let sum: f64 = (0..n).map(|_| sample_u_given_hit(a, t, &mut rng).unwrap()).sum();
        let se = (var / n as f64).sqrt();
        assert!((sum / n as f64 - mean).abs() < 3.0 * se);
    }

    #[test]
    fn level_support() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..2_000 {
            assert!(sample_u_given_hit(5.0, 0.01, &mut rng).unwrap() > 5.0);
        }
    }

    #[test]
    fn level_repeatable() {
        let mut a = RngStream::new(99, 4);
        let mut b = RngStream::new(99, 4);
        for _ in 0..500 {
            assert_eq!(
                sample_u_given_hit(0.3, 2.0, &mut a).unwrap(),
                sample_u_given_hit(0.3, 2.0, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn domain_errors() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_joint(0.0, 0.0, &sp(0.5), &mut rng).is_err());
        assert!(sample_joint(0.0, -1.0, &sp(0.5), &mut rng).is_err());
        assert!(sample_u_given_hit(-1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn level_identity_and_flags() {
        let mut rng = RngStream::new(5, 0);
        for &x in &[0.0, 0.7, -1.2] {
            for _ in 0..5_000 {
                let d = draw(x, 1.0, &sp(0.3), &mut rng).unwrap();
                let s = d.sample;
                assert!(s.ell >= 0.0);
                if s.hit {
                    let u = s.ell + s.y.abs() + x.abs();
                    assert!((u - d.level).abs() <= 1e-12 * d.level.max(1.0));
                } else {
                    assert_eq!(s.ell, 0.0);
                    assert!(x != 0.0 && s.y * x > 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_start_always_hits() {
        let mut rng = RngStream::new(8, 0);
        let v = sample_joint_many(0.0, 1.0, &sp(0.6), 10_000, &mut rng).unwrap();
        assert!(v.iter().all(|s| s.hit && s.ell > 0.0));
    }

    #[test]
    fn positive_fraction_is_alpha() {
        let n = 100_000;
        let mut rng = RngStream::new(21, 0);
        let pos = sample_joint_many(0.0, 1.0, &sp(0.75), n, &mut rng)
            .unwrap()
            .iter()
            .filter(|s| s.y > 0.0)
            .count() as f64;
        let sigma = (0.75 * 0.25 / n as f64).sqrt();
        assert!((pos / n as f64 - 0.75).abs() < 3.0 * sigma);
    }

    #[test]
    fn far_start_mostly_survives() {
        let n = 100_000;
        let p = erf(3.0 / 0.5_f64.sqrt());
        let mut rng = RngStream::new(22, 0);
        let surv = sample_joint_many(3.0, 0.25, &sp(0.5), n, &mut rng)
            .unwrap()
            .iter()
            .filter(|s| !s.hit)
            .count() as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
        assert!((surv / n as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn atom_positions_follow_killed_kernel() {
        // Mean of the conditional atom law vs midpoint quadrature of atom_weight.
        let (x, t) = (0.6, 1.0);
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let h = 1e-4;
        for i in 0..120_000 {
            let y = (i as f64 + 0.5) * h;
            let w = atom_weight(x, y, t).unwrap();
            m0 += w;
            m1 += w * y;
            m2 += w * y * y;
        }
        let mean = m1 / m0;
        let var = m2 / m0 - mean * mean;
        let mut rng = RngStream::new(31, 0);
        let n = 50_000;
        let sum: f64 = (0..n).map(|_| sample_atom_position(x, t, &mut rng).unwrap()).sum();
        assert!((sum / n as f64 - mean).abs() < 3.0 * (var / n as f64).sqrt());
    }
}
