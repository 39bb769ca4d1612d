//! Closed-form joint law of skew Brownian motion and its local time at the
//! interface, with the marginals and total-mass identities that follow from
//! it.
//!
//! Started at `x`, the pair `(B_t, ℓ_t)` has a continuous part on
//! `{ℓ > 0}` that depends on the point only through the level
//! `u = ℓ + |y| + |x|`:
//!
//! ```text
//! f(y, ℓ) = 2w · u / √(2πt³) · exp(−u²/2t),   w = α for y > 0, 1 − α for y < 0
//! ```
//!
//! and an atom on `{ℓ = 0}` carried by paths that never reach 0, with weight
//! `φ_t(y − x) − φ_t(y + x)` per `dy` on the starting side. The local time is
//! the symmetric one: at `α = 1/2, x = 0` the law reduces to Lévy's
//! `(B_t, L_t)` law and `ℓ_t` is distributed as `|B_t|`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{erf, erfc};

use crate::error::{check_finite, check_time, Error, Result};
use crate::quadrature::{integrate, integrate_rect, QuadratureSpec};

/// Below this exponent the kernel is assembled in log space.
const LOG_SPACE_EXPONENT: f64 = -700.0;

/// Skewness `α ∈ (0, 1)`: the probability that an excursion from 0 is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewParams {
    alpha: f64,
}

impl SkewParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self { alpha })
        } else {
            Err(Error::Domain(format!("skewness must lie strictly inside (0, 1), got {alpha}")))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Parameters of the mirror image process `−B`.
    pub fn mirrored(&self) -> Self {
        Self { alpha: 1.0 - self.alpha }
    }
}

/// Start `x`, elapsed time `t`, terminal position `y` and local-time level `ell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryPoint {
    pub x: f64,
    pub t: f64,
    pub y: f64,
    pub ell: f64,
}

impl QueryPoint {
    pub fn new(x: f64, t: f64, y: f64, ell: f64) -> Result<Self> {
        let p = Self { x, t, y, ell };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        check_time(self.t)?;
        check_finite("start position", self.x)?;
        check_finite("terminal position", self.y)?;
        if !(self.ell >= 0.0 && self.ell.is_finite()) {
            return Err(Error::Domain(format!(
                "local-time level must be finite and non-negative, got {}",
                self.ell
            )));
        }
        Ok(())
    }
}

/// Which one-sided limit to take at `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Above,
    Below,
}

/// How the continuous density is evaluated when `y` is exactly 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfacePolicy {
    /// `y = 0` is an error.
    Reject,
    /// `y = 0` means the given one-sided limit.
    Side(Side),
    /// `y = 0` gives `α f(0⁻) + (1 − α) f(0⁺)`.
    Average,
}

/// Both parts of the law at a query point.
///
/// `continuous` is per `dy dℓ`; `atom` is the coefficient of `δ₀(dℓ) dy` at
/// `y` and does not depend on `ell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub continuous: f64,
    pub atom: f64,
}

/// Heat kernel `exp(−z²/2t) / √(2πt)`.
pub fn gauss_kernel(z: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(heat(z, t))
}

#[inline]
pub(crate) fn heat(z: f64, t: f64) -> f64 {
    (-z * z / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// `u/√(2πt³) · exp(−u²/2t)` for `u ≥ 0`.
#[inline]
fn level_kernel(u: f64, t: f64) -> f64 {
    let exponent = -u * u / (2.0 * t);
    if exponent < LOG_SPACE_EXPONENT {
        if u <= 0.0 {
            return 0.0;
        }
        (u.ln() + exponent - 0.5 * (2.0 * PI).ln() - 1.5 * t.ln()).exp()
    } else {
        u * exponent.exp() / (2.0 * PI * t * t * t).sqrt()
    }
}

/// Weight of the `y ≤ 0` branch for a start at `x ≤ 0`.
///
/// Printed in the source as `2(α − 1)`, which is negative on `(0, 1)`; the
/// non-negative `2(1 − α)` restores the mirror symmetry with the `x ≥ 0`,
/// `y ≤ 0` branch.
#[inline]
fn lower_branch_weight(alpha: f64) -> f64 {
    2.0 * (1.0 - alpha)
}

/// Branches for a start at `x ≥ 0`. `y` must be on `side` (or 0).
#[inline]
fn from_nonnegative_start(x: f64, y: f64, ell: f64, t: f64, alpha: f64, side: Side) -> f64 {
    match side {
        Side::Below => 2.0 * (1.0 - alpha) * level_kernel(ell - y + x, t),
        Side::Above => 2.0 * alpha * level_kernel(ell + y + x, t),
    }
}

/// Branches for a start at `x ≤ 0`. `y` must be on `side` (or 0).
#[inline]
fn from_nonpositive_start(x: f64, y: f64, ell: f64, t: f64, alpha: f64, side: Side) -> f64 {
    match side {
        Side::Above => 2.0 * alpha * level_kernel(ell + y - x, t),
        Side::Below => lower_branch_weight(alpha) * level_kernel(ell - y - x, t),
    }
}

/// Unchecked continuous density on a given side of the interface.
#[inline]
pub(crate) fn continuous_on_side(x: f64, y: f64, ell: f64, t: f64, alpha: f64, side: Side) -> f64 {
    if x >= 0.0 {
        from_nonnegative_start(x, y, ell, t, alpha, side)
    } else {
        from_nonpositive_start(x, y, ell, t, alpha, side)
    }
}

fn side_of(y: f64) -> Option<Side> {
    if y > 0.0 {
        Some(Side::Above)
    } else if y < 0.0 {
        Some(Side::Below)
    } else {
        None
    }
}

/// Continuous part of the joint density at a point with `y ≠ 0`.
///
/// At `y = 0` the density jumps (unless `α = 1/2`) and this returns
/// [`Error::InterfaceSide`]; use [`joint_density_sided`] or
/// [`joint_density_averaged`] there.
pub fn joint_density_continuous(p: &QueryPoint, s: &SkewParams) -> Result<f64> {
    p.validate()?;
    let side = side_of(p.y).ok_or(Error::InterfaceSide)?;
    Ok(continuous_on_side(p.x, p.y, p.ell, p.t, s.alpha, side))
}

/// Continuous part evaluated on an explicit side; `y` may be 0 or on `side`.
pub fn joint_density_sided(p: &QueryPoint, s: &SkewParams, side: Side) -> Result<f64> {
    p.validate()?;
    match (side_of(p.y), side) {
        (None, _) | (Some(Side::Above), Side::Above) | (Some(Side::Below), Side::Below) => {
            Ok(continuous_on_side(p.x, p.y, p.ell, p.t, s.alpha, side))
        }
        _ => Err(Error::Domain(format!("y = {} is not on the {side:?} side", p.y))),
    }
}

/// `α f(0⁻) + (1 − α) f(0⁺)` at `y = 0`; the ordinary value elsewhere.
pub fn joint_density_averaged(p: &QueryPoint, s: &SkewParams) -> Result<f64> {
    p.validate()?;
    match side_of(p.y) {
        Some(side) => Ok(continuous_on_side(p.x, p.y, p.ell, p.t, s.alpha, side)),
        None => {
            let below = continuous_on_side(p.x, 0.0, p.ell, p.t, s.alpha, Side::Below);
            let above = continuous_on_side(p.x, 0.0, p.ell, p.t, s.alpha, Side::Above);
            Ok(s.alpha * below + (1.0 - s.alpha) * above)
        }
    }
}

/// Continuous part and atom coefficient at `p` under the given `y = 0` policy.
pub fn density(p: &QueryPoint, s: &SkewParams, policy: InterfacePolicy) -> Result<DensityValue> {
    let continuous = match policy {
        InterfacePolicy::Reject => joint_density_continuous(p, s)?,
        InterfacePolicy::Side(side) if p.y == 0.0 => joint_density_sided(p, s, side)?,
        InterfacePolicy::Side(_) => joint_density_continuous(p, s)?,
        InterfacePolicy::Average => joint_density_averaged(p, s)?,
    };
    Ok(DensityValue { continuous, atom: atom_weight(p.x, p.y, p.t)? })
}

#[inline]
pub(crate) fn atom_unchecked(x: f64, y: f64, t: f64) -> f64 {
    if x * y < 0.0 {
        return 0.0;
    }
    let (a, b) = (x.abs(), y.abs());
    // φ(b − a) − φ(b + a) = φ(b − a)(1 − e^{−2ab/t})
    heat(b - a, t) * -(-2.0 * a * b / t).exp_m1()
}

/// Coefficient of `δ₀(dℓ) dy`: the killed-at-0 heat kernel on the starting side.
pub fn atom_weight(x: f64, y: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    check_finite("start position", x)?;
    check_finite("terminal position", y)?;
    Ok(atom_unchecked(x, y, t))
}

/// `P_x(τ₀ > t) = erf(|x|/√(2t))`, the total mass of the atom.
pub fn survival_probability(x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    check_finite("start position", x)?;
    Ok(erf(x.abs() / (2.0 * t).sqrt()))
}

/// Upper tail of the standard normal.
#[inline]
pub(crate) fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

#[inline]
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Transition density of skew Brownian motion for `y ≠ 0`.
///
/// Obtained by integrating the joint law over `ℓ`, atom included.
pub fn skew_marginal_density(x: f64, y: f64, t: f64, s: &SkewParams) -> Result<f64> {
    check_time(t)?;
    check_finite("start position", x)?;
    check_finite("terminal position", y)?;
    let side = side_of(y).ok_or(Error::InterfaceSide)?;
    Ok(marginal_on_side(x, y, t, s.alpha, side))
}

/// One-sided transition density; `y` may be 0 or on `side`.
pub fn skew_marginal_density_sided(x: f64, y: f64, t: f64, s: &SkewParams, side: Side) -> Result<f64> {
    check_time(t)?;
    check_finite("start position", x)?;
    match (side_of(y), side) {
        (None, _) | (Some(Side::Above), Side::Above) | (Some(Side::Below), Side::Below) => {
            Ok(marginal_on_side(x, y, t, s.alpha, side))
        }
        _ => Err(Error::Domain(format!("y = {y} is not on the {side:?} side"))),
    }
}

fn marginal_on_side(x: f64, y: f64, t: f64, alpha: f64, side: Side) -> f64 {
    let same_side = match side {
        Side::Above => x >= 0.0,
        Side::Below => x <= 0.0,
    };
    if same_side {
        let sgn = if side == Side::Above { 1.0 } else { -1.0 };
        heat(y - x, t) + sgn * (2.0 * alpha - 1.0) * heat(y.abs() + x.abs(), t)
    } else {
        let w = if side == Side::Above { alpha } else { 1.0 - alpha };
        2.0 * w * heat(y - x, t)
    }
}

/// `P_x(B_t ≤ y)` for skew Brownian motion.
pub fn skew_marginal_cdf(x: f64, y: f64, t: f64, s: &SkewParams) -> Result<f64> {
    check_time(t)?;
    check_finite("start position", x)?;
    if y.is_nan() {
        return Err(Error::Domain("terminal position is NaN".into()));
    }
    if x < 0.0 {
        // Mirror: P_x(B ≤ y) = 1 − P_{−x}(B' < −y) with α' = 1 − α.
        return Ok(1.0 - cdf_nonnegative_start(-x, -y, t, 1.0 - s.alpha));
    }
    Ok(cdf_nonnegative_start(x, y, t, s.alpha))
}

fn cdf_nonnegative_start(x: f64, y: f64, t: f64, alpha: f64) -> f64 {
    let st = t.sqrt();
    let below = 2.0 * (1.0 - alpha) * normal_cdf((y.min(0.0) - x) / st);
    if y <= 0.0 {
        return below;
    }
    // ∫₀^y φ(z − x) dz + (2α − 1) ∫₀^y φ(z + x) dz
    let direct = normal_cdf((y - x) / st) - normal_cdf(-x / st);
    let reflected = normal_sf(x / st) - normal_sf((y + x) / st);
    (below + direct + (2.0 * alpha - 1.0) * reflected).clamp(0.0, 1.0)
}

/// Density of the continuous part of the local-time law, `2 φ_t(ℓ + |x|)`.
///
/// Independent of the skewness. The full law adds the atom
/// `survival_probability(x, t) · δ₀(dℓ)`.
pub fn local_time_marginal_density(x: f64, t: f64, ell: f64) -> Result<f64> {
    QueryPoint::new(x, t, 0.0, ell)?;
    Ok(2.0 * heat(ell + x.abs(), t))
}

/// `P_x(ℓ_t ≤ ell)`, atom at 0 included.
pub fn local_time_cdf(x: f64, t: f64, ell: f64) -> Result<f64> {
    QueryPoint::new(x, t, 0.0, ell)?;
    let st = t.sqrt();
    let a = x.abs();
    let survival = erf(a / (2.0 * t).sqrt());
    Ok((survival + 2.0 * (normal_sf(a / st) - normal_sf((ell + a) / st))).min(1.0))
}

/// Mass of the continuous part on `{ℓ + |y| + |x| > r}`, for `r ≥ |x|`.
pub(crate) fn level_tail_mass(x: f64, t: f64, r: f64) -> f64 {
    let a = x.abs();
    2.0 * ((r - a) * heat(r, t) + normal_sf(r / t.sqrt()))
}

/// Half-width of the truncated integration domain, `|x| + k√t`.
pub(crate) fn truncation_radius(x: f64, t: f64, spec: &QuadratureSpec) -> f64 {
    x.abs() + spec.truncation_sigmas * t.sqrt()
}

/// Parts of the total probability mass computed by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassBreakdown {
    /// `∫∫` of the continuous part over both half-planes.
    pub continuous: f64,
    /// `∫` of the atom coefficient over `y`.
    pub atom: f64,
    /// Analytic bound on the mass outside the truncated domain.
    pub tail_bound: f64,
    /// Summed quadrature error estimates.
    pub error: f64,
}

impl MassBreakdown {
    pub fn total(&self) -> f64 {
        self.continuous + self.atom
    }
}

/// Total mass of the joint law by adaptive quadrature over the truncated
/// domain `|y|, ℓ ≤ |x| + k√t`.
pub fn normalization_mass(
    x: f64,
    t: f64,
    s: &SkewParams,
    spec: &QuadratureSpec,
) -> Result<MassBreakdown> {
    check_time(t)?;
    check_finite("start position", x)?;
    let r = truncation_radius(x, t, spec);
    let a = x.abs();
    // Outside the square, ℓ + |y| > r − |x|, hence the level exceeds r.
    let tail_bound = level_tail_mass(x, t, r) + normal_sf((r - a) / t.sqrt());
    if tail_bound > spec.tail_tolerance {
        return Err(Error::Quadrature(format!(
            "truncation at {} σ leaves tail mass up to {tail_bound:e} (> {:e})",
            spec.truncation_sigmas, spec.tail_tolerance
        )));
    }
    let alpha = s.alpha;
    let above = integrate_rect(
        |y, ell| continuous_on_side(x, y, ell, t, alpha, Side::Above),
        (0.0, r),
        (0.0, r),
        spec,
    )?;
    let below = integrate_rect(
        |y, ell| continuous_on_side(x, y, ell, t, alpha, Side::Below),
        (-r, 0.0),
        (0.0, r),
        spec,
    )?;
    let atom = if x > 0.0 {
        integrate(|y| atom_unchecked(x, y, t), 0.0, r, spec)?
    } else if x < 0.0 {
        integrate(|y| atom_unchecked(x, y, t), -r, 0.0, spec)?
    } else {
        crate::quadrature::Estimate { value: 0.0, error: 0.0, evaluations: 0 }
    };
    Ok(MassBreakdown {
        continuous: above.value + below.value,
        atom: atom.value,
        tail_bound,
        error: above.error + below.error + atom.error,
    })
}
