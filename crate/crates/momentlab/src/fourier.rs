//! Fourier transforms `ν̂_j(ξ)` of the curve-pushforward measures, the
//! interval-level martingale increments, and frequency-domain sampling
//! (annulus suprema and `L^p` ball integrals).
//!
//! The transform of a level measure is a sum of oscillatory integrals over
//! its surviving intervals; the quadrature tolerance budget is divided
//! equally among the intervals so the total error stays linear in the
//! request.

use crate::cascade::{CantorMeasure, CascadeLevel};
use crate::error::{Error, Result};
use crate::quad::{osc_integral, IntegralValue};
use crate::stream::Stream;
use num_complex::Complex64;

/// Transform values of one frequency across a range of levels.
#[derive(Clone, Debug)]
pub struct FreqSample {
    pub xi: Vec<f64>,
    pub values: Vec<Complex64>,
    pub errs: Vec<f64>,
}

/// Compensated (Kahan) accumulator; order-independent up to rounding.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// `β · Σ ∫ e(−⟨γ(t),ξ⟩) dt` over an explicit interval list.
pub fn transform_over_intervals(
    beta: f64,
    intervals: &[(f64, f64)],
    xi: &[f64],
    tol: f64,
) -> Result<IntegralValue> {
    if intervals.is_empty() {
        return Ok(IntegralValue::zero());
    }
    let per_interval_tol = tol / intervals.len() as f64;
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for &(a, b) in intervals {
        let v = osc_integral(xi, (a, b), per_interval_tol)?;
        value += v.value;
        err += v.err;
    }
    Ok(IntegralValue {
        value: value * beta,
        err: err * beta,
    })
}

/// `ν̂` of a single cascade level.
pub fn nu_hat_level(level: &CascadeLevel, xi: &[f64], tol: f64) -> Result<IntegralValue> {
    let intervals: Vec<(f64, f64)> = level.interval_bounds().collect();
    transform_over_intervals(level.beta_f64(), &intervals, xi, tol)
}

/// `ν̂_j(ξ)` for a level of the measure.
pub fn nu_hat(measure: &CantorMeasure, j: usize, xi: &[f64], tol: f64) -> Result<IntegralValue> {
    nu_hat_level(measure.level(j)?, xi, tol)
}

/// Transform values across levels `0..=j_max` at one frequency.
pub fn freq_sample(
    measure: &CantorMeasure,
    j_max: usize,
    xi: &[f64],
    tol: f64,
) -> Result<FreqSample> {
    let mut values = Vec::with_capacity(j_max + 1);
    let mut errs = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let v = nu_hat(measure, j, xi, tol)?;
        values.push(v.value);
        errs.push(v.err);
    }
    Ok(FreqSample {
        xi: xi.to_vec(),
        values,
        errs,
    })
}

/// Children of parent offset `a` inside a child level, as unit intervals.
fn child_intervals(child: &CascadeLevel, m: u64, a: u64) -> Vec<(f64, f64)> {
    let lo = child.intervals.partition_point(|&c| c < m * a);
    let hi = child.intervals.partition_point(|&c| c < m * (a + 1));
    let denom = child.m_j as f64;
    child.intervals[lo..hi]
        .iter()
        .map(|&c| (c as f64 / denom, (c + 1) as f64 / denom))
        .collect()
}

/// Martingale increment `X_{I_j}`: the level-`(j+1)` contribution of the
/// level-`j` interval with offset `a`.
pub fn x_increment(
    measure: &CantorMeasure,
    j: usize,
    a: u64,
    xi: &[f64],
    tol: f64,
) -> Result<Complex64> {
    let parent = measure.level(j)?;
    let child = measure.level(j + 1)?;
    if parent.intervals.binary_search(&a).is_err() {
        return Err(Error::NotALevelInterval(a));
    }
    let kids = child_intervals(child, measure.params.m, a);
    Ok(transform_over_intervals(child.beta_f64(), &kids, xi, tol)?.value)
}

/// `ν̂_{j+1}(ξ) − ν̂_j(ξ)`.
pub fn martingale_difference(
    measure: &CantorMeasure,
    j: usize,
    xi: &[f64],
    tol: f64,
) -> Result<Complex64> {
    let hi = nu_hat(measure, j + 1, xi, tol)?;
    let lo = nu_hat(measure, j, xi, tol)?;
    Ok(hi.value - lo.value)
}

/// `Σ_{I_j} |X_{I_j}|²` over the level-`j` intervals.
pub fn sq_sum_increments(
    measure: &CantorMeasure,
    j: usize,
    xi: &[f64],
    tol: f64,
) -> Result<f64> {
    sq_sum_increments_with_child(measure, j, measure.level(j + 1)?, xi, tol)
}

/// Same as [`sq_sum_increments`] but against an explicit child level
/// (e.g. a resample).
pub fn sq_sum_increments_with_child(
    measure: &CantorMeasure,
    j: usize,
    child: &CascadeLevel,
    xi: &[f64],
    tol: f64,
) -> Result<f64> {
    let parent = measure.level(j)?;
    let beta = child.beta_f64();
    let mut acc = KahanSum::default();
    for &a in &parent.intervals {
        let kids = child_intervals(child, measure.params.m, a);
        let x = transform_over_intervals(beta, &kids, xi, tol)?.value;
        acc.add(x.norm_sqr());
    }
    Ok(acc.value())
}

/// Frequency uniform in the annulus `R ≤ |ξ| ≤ 2R` from a stream keyed by
/// `(seed, bits(R), index)`.
pub fn annulus_point(d: usize, r_inner: f64, seed: u64, index: u64) -> Vec<f64> {
    let mut stream = Stream::keyed(seed, &[r_inner.to_bits(), index]);
    let dir = stream.unit_vector(d);
    let u = stream.uniform();
    // radius density ∝ r^{d-1} on [R, 2R]
    let radius = r_inner * (1.0 + u * (2f64.powi(d as i32) - 1.0)).powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * radius).collect()
}

/// Max of `|ν̂_j|` over `n_samples` frequencies uniform in `R ≤ |ξ| ≤ 2R`.
pub fn annulus_sup(
    measure: &CantorMeasure,
    j: usize,
    r: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<f64> {
    let d = measure.params.d;
    let mut sup = 0.0f64;
    for i in 0..n_samples {
        let xi = annulus_point(d, r, seed, i as u64);
        let v = nu_hat(measure, j, &xi, tol)?;
        sup = sup.max(v.value.norm());
    }
    Ok(sup)
}

/// Monte Carlo estimate of `∫_{|ξ|≤R} |ν̂_j|^p dξ` by stratified sampling
/// over dyadic annuli (equal samples per annulus, weight = annulus volume).
pub fn lp_ball_integral(
    measure: &CantorMeasure,
    j: usize,
    p: f64,
    r_max: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut estimate = KahanSum::default();
    let mut variance = KahanSum::default();
    for (_, _, contrib, se) in lp_annulus_contributions(measure, j, p, r_max, n_samples, seed, tol)?
    {
        estimate.add(contrib);
        variance.add(se * se);
    }
    Ok((estimate.value(), variance.value().sqrt()))
}

/// Per-annulus contributions `(R_lo, R_hi, contribution, std_error)` to the
/// `L^p` ball integral, dyadic from the unit ball out to `r_max`.
pub fn lp_annulus_contributions(
    measure: &CantorMeasure,
    j: usize,
    p: f64,
    r_max: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<(f64, f64, f64, f64)>> {
    let d = measure.params.d;
    let unit_ball = unit_ball_volume(d);
    let mut out = Vec::new();

    // inner ball |ξ| ≤ 1, sampled uniformly by radius cdf r^d
    {
        let mut mean = KahanSum::default();
        let mut mean_sq = KahanSum::default();
        for i in 0..n_samples {
            let mut stream = Stream::keyed(seed, &[0, i as u64]);
            let dir = stream.unit_vector(d);
            let radius = stream.uniform().powf(1.0 / d as f64);
            let xi: Vec<f64> = dir.into_iter().map(|x| x * radius).collect();
            let v = nu_hat(measure, j, &xi, tol)?.value.norm().powf(p);
            mean.add(v);
            mean_sq.add(v * v);
        }
        let n = n_samples as f64;
        let mu = mean.value() / n;
        let var = ((mean_sq.value() / n - mu * mu) / n).max(0.0);
        out.push((0.0, 1.0, unit_ball * mu, unit_ball * var.sqrt()));
    }

    let mut r_lo = 1.0f64;
    while r_lo < r_max {
        let r_hi = (2.0 * r_lo).min(r_max);
        let volume = unit_ball * (r_hi.powi(d as i32) - r_lo.powi(d as i32));
        let mut mean = KahanSum::default();
        let mut mean_sq = KahanSum::default();
        for i in 0..n_samples {
            let xi = annulus_point(d, r_lo, seed, i as u64);
            let v = nu_hat(measure, j, &xi, tol)?.value.norm().powf(p);
            mean.add(v);
            mean_sq.add(v * v);
        }
        let n = n_samples as f64;
        let mu = mean.value() / n;
        let var = ((mean_sq.value() / n - mu * mu) / n).max(0.0);
        out.push((r_lo, r_hi, volume * mu, volume * var.sqrt()));
        r_lo = r_hi;
    }
    Ok(out)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // Γ(d/2 + 1) for integer and half-integer arguments
    let gamma = |mut x: f64| -> f64 {
        let mut acc = 1.0;
        while x > 1.0 {
            x -= 1.0;
            acc *= x;
        }
        if (x - 0.5).abs() < 1e-12 {
            acc * std::f64::consts::PI.sqrt()
        } else {
            acc // x == 1
        }
    };
    std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)
}
