//! Goodness-of-fit statistics: Kolmogorov–Smirnov (one and two sample),
//! Pearson chi-square with pooling of sparse cells, and normal z-scores.

use std::f64::consts::PI;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Cells expected to hold fewer counts than this are pooled.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // P(K ≤ λ) = √(2π)/λ Σ_{k≥1} exp(−(2k−1)²π²/(8λ²)), fast for small λ.
        let mut cdf = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            cdf += (-j * j * PI * PI / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sf += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sf).clamp(0.0, 1.0)
    }
}

/// The `λ` at which [`kolmogorov_sf`] equals `p`.
pub fn kolmogorov_isf(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A KS distance together with its effective sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub n_eff: f64,
}

impl KsOutcome {
    fn scale(&self) -> f64 {
        let r = self.n_eff.sqrt();
        r + 0.12 + 0.11 / r
    }

    /// Asymptotic p-value with Stephens' small-sample correction.
    pub fn p_value(&self) -> f64 {
        kolmogorov_sf(self.scale() * self.statistic)
    }

    /// Largest distance accepted at the given significance.
    pub fn critical(&self, significance: f64) -> f64 {
        kolmogorov_isf(significance) / self.scale()
    }
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Config("KS test needs at least one sample".into()));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("KS sample contains NaN".into()));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Calls `f(value, F_N(value⁻), F_N(value))` once per distinct value.
fn for_each_distinct(v: &[f64], mut f: impl FnMut(f64, f64, f64)) {
    let n = v.len() as f64;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        f(v[i], i as f64 / n, j as f64 / n);
        i = j;
    }
}

/// One-sample KS distance against a continuous CDF. Ties are handled by
/// comparing both one-sided limits of the empirical CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome> {
    let v = sorted(samples)?;
    let mut d = 0.0_f64;
    for_each_distinct(&v, |x, below, at| {
        let f = cdf(x);
        d = d.max((f - below).abs()).max((at - f).abs());
    });
    Ok(KsOutcome { statistic: d, n_eff: v.len() as f64 })
}

/// One-sample KS distance for data supported on a lattice of the given
/// spacing: each lattice value stands for the cell of width `spacing` around
/// it, so `F_N(v)` is compared with `F(v + spacing/2)` and `F_N(v⁻)` with
/// `F(v − spacing/2)`.
pub fn ks_one_sample_lattice(
    samples: &[f64],
    cdf: impl Fn(f64) -> f64,
    spacing: f64,
) -> Result<KsOutcome> {
    if !(spacing > 0.0) {
        return Err(Error::Domain(format!("lattice spacing must be positive, got {spacing}")));
    }
    let v = sorted(samples)?;
    let half = 0.5 * spacing;
    let mut d = 0.0_f64;
    for_each_distinct(&v, |x, below, at| {
        d = d.max((cdf(x - half) - below).abs()).max((at - cdf(x + half)).abs());
    });
    Ok(KsOutcome { statistic: d, n_eff: v.len() as f64 })
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsOutcome> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsOutcome { statistic: d, n_eff: na * nb / (na + nb) })
}

/// Pearson statistic and its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub df: usize,
    /// Number of cells after pooling.
    pub cells: usize,
}

impl ChiSquareOutcome {
    pub fn p_value(&self) -> f64 {
        if !self.statistic.is_finite() {
            return 0.0;
        }
        ChiSquared::new(self.df as f64)
            .map(|d| d.sf(self.statistic))
            .unwrap_or(0.0)
    }

    /// Largest statistic accepted at the given significance.
    pub fn critical(&self, significance: f64) -> f64 {
        ChiSquared::new(self.df as f64)
            .map(|d| d.inverse_cdf(1.0 - significance))
            .unwrap_or(f64::NAN)
    }
}

/// Chi-square goodness of fit of `observed` counts against cell
/// probabilities.
///
/// Cells with zero probability must be empty (otherwise the statistic is
/// infinite). Cells expected to hold fewer than [`MIN_EXPECTED_COUNT`] are
/// pooled into one; if the pool is still sparse it joins the smallest
/// regular cell. Fewer than two remaining cells is a configuration error.
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> Result<ChiSquareOutcome> {
    if observed.len() != probabilities.len() {
        return Err(Error::Config("observed and expected grids differ in size".into()));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::Config("chi-square needs at least one observation".into()));
    }
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    let mut impossible = false;
    for (&o, &p) in observed.iter().zip(probabilities) {
        let e = p * nf;
        if p <= 0.0 {
            impossible |= o > 0;
        } else if e < MIN_EXPECTED_COUNT {
            pool_obs += o as f64;
            pool_exp += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool_exp > 0.0 {
        if pool_exp >= MIN_EXPECTED_COUNT || cells.is_empty() {
            cells.push((pool_obs, pool_exp));
        } else {
            let smallest = cells
                .iter_mut()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            smallest.0 += pool_obs;
            smallest.1 += pool_exp;
        }
    }
    if cells.len() < 2 {
        return Err(Error::Config(
            "all expected mass falls in a single cell; chi-square is undefined".into(),
        ));
    }
    let statistic = if impossible {
        f64::INFINITY
    } else {
        cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum()
    };
    Ok(ChiSquareOutcome { statistic, df: cells.len() - 1, cells: cells.len() })
}

/// `(k − Np)/√(Np(1 − p))`; zero-variance cases give 0 on a match and ∞ otherwise.
///
/// `successes` may be fractional when ties are split between outcomes.
pub fn binomial_z(successes: f64, trials: u64, p: f64) -> f64 {
    let n = trials as f64;
    let mean = n * p;
    let sd = (n * p * (1.0 - p)).sqrt();
    let diff = successes - mean;
    if sd > 0.0 {
        diff / sd
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `(mean − μ)/(s/√N)` with the sample standard deviation `s`.
pub fn mean_z(samples: &[f64], mu: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Config("mean test needs at least two samples".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    Ok(if se > 0.0 {
        (mean - mu) / se
    } else if mean == mu {
        0.0
    } else {
        f64::INFINITY
    })
}
