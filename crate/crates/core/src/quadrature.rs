//! Adaptive Gauss–Kronrod (G7/K15) integration on finite intervals and
//! rectangles.
//!
//! Infinite domains are handled by the callers through explicit truncation
//! together with an analytic tail bound, see [`QuadratureSpec`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Accuracy and truncation settings shared by every quadrature-based operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Half-width of the truncated domain in units of √t, added to |x|.
    pub truncation_sigmas: f64,
    /// Absolute error target for each adaptive integral.
    pub abs_tol: f64,
    /// Relative error target for each adaptive integral.
    pub rel_tol: f64,
    /// Subdivision budget for one adaptive integral.
    pub max_intervals: usize,
    /// Largest admissible analytic bound on the mass discarded by truncation.
    pub tail_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            truncation_sigmas: 10.0,
            abs_tol: 1e-11,
            rel_tol: 1e-10,
            max_intervals: 500,
            tail_tolerance: 1e-9,
        }
    }
}

/// Value and error estimate of an adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&node, &weight)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * node;
        let pair = f(center - dx) + f(center + dx);
        kronrod += weight * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` by globally adaptive bisection.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if a > b {
        let est = integrate(f, b, a, spec)?;
        return Ok(Estimate { value: -est.value, ..est });
    }

    let (value, error) = kronrod_panel(&mut f, a, b);
    let mut evaluations = 15;
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });

    while total_err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if heap.len() >= spec.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {} panels (error estimate {total_err:e})",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let (lv, le) = kronrod_panel(&mut f, worst.a, mid);
        let (rv, re) = kronrod_panel(&mut f, mid, worst.b);
        evaluations += 30;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Panel { a: mid, b: worst.b, value: rv, error: re });
    }

    // Re-sum to shed the drift of incremental updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    if !value.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")));
    }
    Ok(Estimate { value, error, evaluations })
}

/// Integrates `f(y, ell)` over `[y0, y1] × [l0, l1]`, outer variable `ell`.
pub fn integrate_rect<F: Fn(f64, f64) -> f64>(
    f: F,
    (y0, y1): (f64, f64),
    (l0, l1): (f64, f64),
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let mut inner_err = 0.0_f64;
    let mut evaluations = 0;
    let mut failure = None;
    let outer = integrate(
        |ell| match integrate(|y| f(y, ell), y0, y1, spec) {
            Ok(est) => {
                inner_err = inner_err.max(est.error);
                evaluations += est.evaluations;
                est.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        l0,
        l1,
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Estimate {
        value: outer.value,
        error: outer.error + inner_err * (l1 - l0).abs(),
        evaluations,
    })
}
