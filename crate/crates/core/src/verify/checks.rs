use std::f64::consts::PI;

use crate::density::{
    self, atom_weight, heat, joint_density_sided, local_time_cdf, normal_cdf, normal_sf,
    skew_marginal_cdf, skew_marginal_density, survival_probability, InterfacePolicy, QueryPoint,
    Side, SkewParams,
};
use crate::error::{Error, Result};
use crate::path_sim::{simulate_batch, PathRecord, WalkConfig};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::rng::RngStream;
use crate::samplers::{sample_joint_many, JointSample};
use crate::stats::{
    binomial_z, chi_square, ks_one_sample, ks_one_sample_lattice, ks_two_sample, mean_z, KsOutcome,
};

use super::histogram::{histogram2d, BinSpec};
use super::{CheckKind, CheckOutcome, CheckSpec, CheckParams, Observable, Source};

const ALGEBRAIC_TOLERANCE: f64 = 1e-12;
const QUADRATURE_TOLERANCE: f64 = 1e-6;
const Z_TOLERANCE: f64 = 3.0;
/// Scale factor used by a single-point scaling check.
const DEFAULT_SCALING: f64 = 4.0;
/// Stream id reserved for de-quantizing lattice records.
const JITTER_STREAM: u64 = u64::MAX;

struct Measured {
    statistic: f64,
    threshold: f64,
    n_samples: usize,
    p_value: Option<f64>,
}

pub(super) fn execute(spec: &CheckSpec, kind: CheckKind) -> CheckOutcome {
    let p = &spec.params;
    let result = match kind {
        CheckKind::Normalization => normalization(p),
        CheckKind::FluxJump => flux_jump(p, spec.seed),
        CheckKind::Symmetry => match p.source {
            Source::Path => drift_mirror(p, spec.seed),
            _ => reflection(p, spec.seed),
        },
        CheckKind::MarginalConsistency => marginal_consistency(p),
        CheckKind::Ks1d => ks_1d(p, spec.seed),
        CheckKind::Chisq2d => chisq_2d(p, spec.seed),
        CheckKind::AtomFraction => atom_fraction(p, spec.seed),
        CheckKind::Scaling => scaling(p, spec.seed),
        CheckKind::Mean => mean(p, spec.seed),
    };
    let base = CheckOutcome {
        name: spec.name.clone(),
        kind: kind.as_str().to_string(),
        statistic: None,
        threshold: None,
        pass: false,
        n_samples: p.n_samples,
        millis: 0,
        p_value: None,
        diagnostic: None,
    };
    match result {
        Ok(m) => CheckOutcome {
            statistic: Some(m.statistic),
            threshold: Some(m.threshold),
            pass: m.statistic.is_finite() && m.statistic <= m.threshold,
            n_samples: m.n_samples,
            p_value: m.p_value,
            ..base
        },
        Err(e) => CheckOutcome { diagnostic: Some(e.to_string()), ..base },
    }
}

fn tolerance(p: &CheckParams, default: f64) -> f64 {
    p.tolerance.unwrap_or(default)
}

fn ks_measure(ks: KsOutcome, p: &CheckParams, n_samples: usize) -> Measured {
    Measured {
        statistic: ks.statistic,
        threshold: ks.critical(p.significance),
        n_samples,
        p_value: Some(ks.p_value()),
    }
}

#[derive(Clone, Copy)]
struct Tuple {
    x: f64,
    t: f64,
    y: f64,
    ell: f64,
    alpha: f64,
    lambda: f64,
}

/// The point in `p`, or `p.n_samples` random tuples drawn from `seed`.
fn tuples(p: &CheckParams, seed: u64) -> Vec<Tuple> {
    if p.n_samples == 0 {
        return vec![Tuple { x: p.x, t: p.t, y: p.y, ell: p.ell, alpha: p.alpha, lambda: DEFAULT_SCALING }];
    }
    let mut rng = RngStream::new(seed, 0);
    let mut between = |lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
    (0..p.n_samples)
        .map(|_| Tuple {
            x: between(-3.0, 3.0),
            t: between(0.05, 5.0),
            y: between(-3.0, 3.0),
            ell: between(0.0, 3.0),
            alpha: between(0.01, 0.99),
            lambda: 10f64.powf(between(-1.0, 1.0)),
        })
        .collect()
}

fn normalization(p: &CheckParams) -> Result<Measured> {
    let s = SkewParams::new(p.alpha)?;
    let mass = density::normalization_mass(p.x, p.t, &s, &QuadratureSpec::default())?;
    Ok(Measured {
        statistic: (mass.total() - 1.0).abs(),
        threshold: tolerance(p, QUADRATURE_TOLERANCE),
        n_samples: 0,
        p_value: None,
    })
}

fn flux_jump(p: &CheckParams, seed: u64) -> Result<Measured> {
    let pts = tuples(p, seed);
    let mut worst = 0.0_f64;
    for q in &pts {
        let s = SkewParams::new(q.alpha)?;
        let at = QueryPoint::new(q.x, q.t, 0.0, q.ell)?;
        let above = joint_density_sided(&at, &s, Side::Above)?;
        let below = joint_density_sided(&at, &s, Side::Below)?;
        worst = worst.max(((1.0 - q.alpha) * above - q.alpha * below).abs());
    }
    Ok(Measured {
        statistic: worst,
        threshold: tolerance(p, ALGEBRAIC_TOLERANCE),
        n_samples: pts.len(),
        p_value: None,
    })
}

fn mirror_policy(y: f64) -> (InterfacePolicy, InterfacePolicy) {
    // At y = 0 the mirror of the upper limit is the lower one.
    if y == 0.0 {
        (InterfacePolicy::Side(Side::Above), InterfacePolicy::Side(Side::Below))
    } else {
        (InterfacePolicy::Reject, InterfacePolicy::Reject)
    }
}

fn reflection(p: &CheckParams, seed: u64) -> Result<Measured> {
    let pts = tuples(p, seed);
    let mut worst = 0.0_f64;
    for q in &pts {
        let s = SkewParams::new(q.alpha)?;
        let (here, there) = mirror_policy(q.y);
        let a = density::density(&QueryPoint::new(q.x, q.t, q.y, q.ell)?, &s, here)?;
        let b = density::density(&QueryPoint::new(-q.x, q.t, -q.y, q.ell)?, &s.mirrored(), there)?;
        worst = worst.max((a.continuous - b.continuous).abs()).max((a.atom - b.atom).abs());
    }
    Ok(Measured {
        statistic: worst,
        threshold: tolerance(p, ALGEBRAIC_TOLERANCE),
        n_samples: pts.len(),
        p_value: None,
    })
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale.max(1e-200)
    }
}

fn scaling(p: &CheckParams, seed: u64) -> Result<Measured> {
    let pts = tuples(p, seed);
    let mut worst = 0.0_f64;
    for q in &pts {
        let s = SkewParams::new(q.alpha)?;
        let c = q.lambda.sqrt();
        let (policy, _) = mirror_policy(q.y);
        let big = density::density(&QueryPoint::new(q.x, q.t, q.y, q.ell)?, &s, policy)?;
        let small = density::density(
            &QueryPoint::new(q.x / c, q.t / q.lambda, q.y / c, q.ell / c)?,
            &s,
            policy,
        )?;
        // The joint density scales like 1/λ, the atom (per dy) like 1/√λ.
        worst = worst
            .max(relative_gap(big.continuous, small.continuous / q.lambda))
            .max(relative_gap(big.atom, small.atom / c));
    }
    Ok(Measured {
        statistic: worst,
        threshold: tolerance(p, ALGEBRAIC_TOLERANCE),
        n_samples: pts.len(),
        p_value: None,
    })
}

/// Points of an `n`-point grid over `[lo, hi]`.
fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// `∫₀^U f(y, ℓ) dℓ + atom(y)` with `U = 10√t + |x| + |y|`.
pub(crate) fn integrated_marginal(x: f64, y: f64, t: f64, s: &SkewParams, spec: &QuadratureSpec) -> Result<f64> {
    let upper = 10.0 * t.sqrt() + x.abs() + y.abs();
    let side = if y >= 0.0 { Side::Above } else { Side::Below };
    let alpha = s.alpha();
    let cont = integrate(|ell| density::continuous_on_side(x, y, ell, t, alpha, side), 0.0, upper, spec)?;
    Ok(cont.value + atom_weight(x, y, t)?)
}

fn marginal_consistency(p: &CheckParams) -> Result<Measured> {
    let s = SkewParams::new(p.alpha)?;
    let spec = QuadratureSpec::default();
    let mut worst = 0.0_f64;
    let mut count = 0;
    for x in linspace(-2.0, 2.0, p.bins) {
        for y in linspace(-3.0, 3.0, p.bins) {
            if y == 0.0 {
                continue;
            }
            let closed = skew_marginal_density(x, y, p.t, &s)?;
            let integrated = integrated_marginal(x, y, p.t, &s, &spec)?;
            worst = worst.max((closed - integrated).abs());
            count += 1;
        }
    }
    Ok(Measured {
        statistic: worst,
        threshold: tolerance(p, QUADRATURE_TOLERANCE),
        n_samples: count,
        p_value: None,
    })
}

fn draws(p: &CheckParams, seed: u64) -> Result<Vec<JointSample>> {
    let s = SkewParams::new(p.alpha)?;
    sample_joint_many(p.x, p.t, &s, p.n_samples, &mut RngStream::new(seed, 0))
}

fn walk(p: &CheckParams) -> Result<WalkConfig> {
    WalkConfig::new(p.x, p.t, p.alpha, p.v, p.steps)
}

fn paths(p: &CheckParams, seed: u64) -> Result<(WalkConfig, Vec<PathRecord>)> {
    let cfg = walk(p)?;
    let records = simulate_batch(&cfg, p.n_samples, seed, 0)?;
    Ok((cfg, records))
}

/// `P(ℓ ≤ v | ℓ > 0)`.
fn hit_local_time_cdf(x: f64, t: f64) -> Result<impl Fn(f64) -> f64> {
    let survival = survival_probability(x, t)?;
    if survival >= 1.0 {
        return Err(Error::Parameter("the interface is unreachable at this horizon".into()));
    }
    Ok(move |v: f64| {
        if v <= 0.0 {
            0.0
        } else {
            (local_time_cdf(x, t, v).unwrap_or(1.0) - survival) / (1.0 - survival)
        }
    })
}

/// CDF of `|y|` for paths that never hit 0, started at distance `a`.
fn atom_abs_cdf(a: f64, t: f64) -> Result<impl Fn(f64) -> f64> {
    let survival = survival_probability(a, t)?;
    if survival <= 0.0 {
        return Err(Error::Parameter("no atom mass: the walk starts on the interface".into()));
    }
    let st = t.sqrt();
    Ok(move |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let direct = normal_cdf((y - a) / st) - normal_cdf(-a / st);
        let reflected = normal_sf(a / st) - normal_sf((y + a) / st);
        ((direct - reflected) / survival).clamp(0.0, 1.0)
    })
}

fn arcsine_cdf(u: f64) -> f64 {
    2.0 / PI * u.clamp(0.0, 1.0).sqrt().asin()
}

fn ks_1d(p: &CheckParams, seed: u64) -> Result<Measured> {
    let need = |v: &Vec<f64>, what: &str| {
        if v.is_empty() {
            Err(Error::Parameter(format!("no {what} in the sample")))
        } else {
            Ok(())
        }
    };
    match p.source {
        Source::Sampler => {
            let s = SkewParams::new(p.alpha)?;
            let d = draws(p, seed)?;
            let ks = match p.observable {
                Observable::Terminal => {
                    let ys: Vec<f64> = d.iter().map(|o| o.y).collect();
                    ks_one_sample(&ys, |y| skew_marginal_cdf(p.x, y, p.t, &s).unwrap_or(f64::NAN))?
                }
                Observable::LocalTime => {
                    let ls: Vec<f64> = d.iter().filter(|o| o.hit).map(|o| o.ell).collect();
                    need(&ls, "draws that reach the interface")?;
                    ks_one_sample(&ls, hit_local_time_cdf(p.x, p.t)?)?
                }
                Observable::AtomY => {
                    let ys: Vec<f64> = d.iter().filter(|o| !o.hit).map(|o| o.y.abs()).collect();
                    need(&ys, "atom draws")?;
                    ks_one_sample(&ys, atom_abs_cdf(p.x.abs(), p.t)?)?
                }
                other => return Err(Error::Config(format!("no sampler KS comparator for {other:?}"))),
            };
            Ok(ks_measure(ks, p, d.len()))
        }
        Source::Path => {
            let (cfg, recs) = paths(p, seed)?;
            let h = cfg.space_step();
            let ks = match p.observable {
                Observable::Terminal => {
                    let s = SkewParams::new(p.alpha)?;
                    let ys: Vec<f64> = recs.iter().map(|r| r.terminal).collect();
                    // Terminal sites share one parity, spaced 2h apart.
                    ks_one_sample_lattice(&ys, |y| skew_marginal_cdf(p.x, y, p.t, &s).unwrap_or(f64::NAN), 2.0 * h)?
                }
                Observable::LocalTime => {
                    let ls: Vec<f64> = recs.iter().filter(|r| r.local_time > 0.0).map(|r| r.local_time).collect();
                    need(&ls, "paths that reach the interface")?;
                    ks_one_sample_lattice(&ls, hit_local_time_cdf(p.x, p.t)?, h)?
                }
                Observable::Occupation => {
                    let us: Vec<f64> = recs.iter().map(|r| r.occupation_pos / p.t).collect();
                    ks_one_sample(&us, arcsine_cdf)?
                }
                other => return Err(Error::Config(format!("no path KS comparator for {other:?}"))),
            };
            Ok(ks_measure(ks, p, recs.len()))
        }
        Source::Density => Err(Error::Config("ks-1d needs a stochastic source".into())),
    }
}

/// Spreads lattice records uniformly over their cells: `2h` wide for the
/// terminal site (one parity), `h` wide for the local time.
fn dequantize(records: &[PathRecord], h: f64, seed: u64) -> Vec<JointSample> {
    let mut rng = RngStream::new(seed, JITTER_STREAM);
    records
        .iter()
        .map(|r| {
            let y = r.terminal + (2.0 * rng.uniform() - 1.0) * h;
            let hit = r.local_time > 0.0;
            let ell = if hit { r.local_time + (rng.uniform() - 0.5) * h } else { 0.0 };
            JointSample { y, ell, hit }
        })
        .collect()
}

fn chisq_2d(p: &CheckParams, seed: u64) -> Result<Measured> {
    let s = SkewParams::new(p.alpha)?;
    let samples = match p.source {
        Source::Sampler => draws(p, seed)?,
        Source::Path => {
            let (cfg, recs) = paths(p, seed)?;
            dequantize(&recs, cfg.space_step(), seed)
        }
        Source::Density => return Err(Error::Config("chisq-2d needs a stochastic source".into())),
    };
    let bins = BinSpec::quantile_grid(p.t, p.bins)?;
    let hist = histogram2d(&samples, &bins, p.x, p.t, &s, &QuadratureSpec::default())?;
    let (obs, exp) = hist.cells();
    let chi = chi_square(&obs, &exp)?;
    Ok(Measured {
        statistic: chi.statistic,
        threshold: chi.critical(p.significance),
        n_samples: samples.len(),
        p_value: Some(chi.p_value()),
    })
}

fn atom_fraction(p: &CheckParams, seed: u64) -> Result<Measured> {
    let survival = survival_probability(p.x, p.t)?;
    let (misses, n) = match p.source {
        Source::Sampler => {
            let d = draws(p, seed)?;
            (d.iter().filter(|o| !o.hit).count(), d.len())
        }
        _ => {
            let (_, recs) = paths(p, seed)?;
            (recs.iter().filter(|r| r.local_time == 0.0).count(), recs.len())
        }
    };
    Ok(Measured {
        statistic: binomial_z(misses as f64, n as u64, survival).abs(),
        threshold: tolerance(p, Z_TOLERANCE),
        n_samples: n,
        p_value: None,
    })
}

/// `E_x[ℓ_t] = 2(t φ_t(|x|) − |x| Φ̄(|x|/√t))`.
pub(crate) fn local_time_mean(x: f64, t: f64) -> f64 {
    let a = x.abs();
    2.0 * (t * heat(a, t) - a * normal_sf(a / t.sqrt()))
}

fn mean(p: &CheckParams, seed: u64) -> Result<Measured> {
    let s = SkewParams::new(p.alpha)?;
    let (ys, ls): (Vec<f64>, Vec<f64>) = match p.source {
        Source::Sampler => draws(p, seed)?.iter().map(|o| (o.y, o.ell)).unzip(),
        _ => paths(p, seed)?.1.iter().map(|r| (r.terminal, r.local_time)).unzip(),
    };
    let z = match p.observable {
        Observable::LocalTime => mean_z(&ls, local_time_mean(p.x, p.t))?,
        Observable::Positive => {
            let target = 1.0 - skew_marginal_cdf(p.x, 0.0, p.t, &s)?;
            // A walk ending on site 0 stands for the cell around it, of
            // which the fraction α lies above the interface.
            let positives: f64 = ys
                .iter()
                .map(|&y| if y > 0.0 { 1.0 } else if y == 0.0 { p.alpha } else { 0.0 })
                .sum();
            binomial_z(positives, ys.len() as u64, target)
        }
        other => return Err(Error::Config(format!("no closed-form mean for {other:?}"))),
    };
    Ok(Measured {
        statistic: z.abs(),
        threshold: tolerance(p, Z_TOLERANCE),
        n_samples: ys.len(),
        p_value: None,
    })
}

/// Two-sample KS between `B` under `(α, v, x)` and `−B` under `(1 − α, −v, −x)`.
fn drift_mirror(p: &CheckParams, seed: u64) -> Result<Measured> {
    let direct = walk(p)?;
    let mirrored = WalkConfig::new(-p.x, p.t, 1.0 - p.alpha, -p.v, p.steps)?;
    let n = p.n_samples;
    let a: Vec<f64> = simulate_batch(&direct, n, seed, 0)?.iter().map(|r| r.terminal).collect();
    let b: Vec<f64> = simulate_batch(&mirrored, n, seed, n as u64)?
        .iter()
        .map(|r| -r.terminal)
        .collect();
    Ok(ks_measure(ks_two_sample(&a, &b)?, p, 2 * n))
}
