//! Experiment drivers: threshold formulas, Fourier-decay fits, `L^p`
//! convergence scans, Knapp-box scaling, frequency-cell volume comparisons,
//! and martingale concentration checks.
//!
//! Every driver is a pure function of its inputs and seed, and emits
//! [`ScanRow`] records (keyed numeric columns) ready for CSV serialization.

use crate::cascade::CantorMeasure;
use crate::error::{Error, Result};
use crate::fourier::{
    annulus_sup, lp_annulus_contributions, nu_hat, nu_hat_level, sq_sum_increments,
    sq_sum_increments_with_child, transform_over_intervals, KahanSum,
};
use crate::freq::{
    c_bound, estimate_omega_volume, in_omega_s1s2, omega_volume_bound, CellVariant,
};
use crate::curve::MomentCurve;
use crate::stream::Stream;
use num_complex::Complex64;

/// Least-squares fit of `log sup` against `log R` over annuli.
#[derive(Clone, Debug)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    pub residual: f64,
    pub annuli: Vec<(f64, f64)>,
}

/// A keyed numeric record destined for one CSV row. Keys are unique and
/// insertion-ordered.
#[derive(Clone, Debug, Default)]
pub struct ScanRow {
    columns: Vec<(String, f64)>,
}

impl ScanRow {
    pub fn new() -> Self {
        ScanRow::default()
    }

    pub fn push(&mut self, key: &str, value: f64) {
        debug_assert!(
            self.columns.iter().all(|(k, _)| k != key),
            "duplicate column {key}"
        );
        self.columns.push((key.to_string(), value));
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.push(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.columns
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    pub fn columns(&self) -> &[(String, f64)] {
        &self.columns
    }
}

/// Critical exponent `p_α`: `(d²+d+2α)/(2α)` for `d ≥ 3`, `4/α` for `d = 2`.
pub fn p_alpha(d: usize, alpha: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionOutOfRange(d));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if d == 2 {
        Ok(4.0 / alpha)
    } else {
        let df = d as f64;
        Ok((df * df + df + 2.0 * alpha) / (2.0 * alpha))
    }
}

/// Knapp necessity threshold `q′·d(d+1)/(2α)` with `q′ = q/(q−1)` and
/// `q′ = 1` at `q = ∞`.
pub fn restriction_boundary(d: usize, alpha: f64, q: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionOutOfRange(d));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if q < 1.0 || q.is_nan() {
        return Err(Error::BadLebesgueExponent(q));
    }
    let q_conj = if q.is_infinite() {
        1.0
    } else if q == 1.0 {
        f64::INFINITY
    } else {
        q / (q - 1.0)
    };
    let df = d as f64;
    Ok(q_conj * df * (df + 1.0) / (2.0 * alpha))
}

/// Ordinary least squares `y ≈ slope·x + intercept`; returns
/// `(slope, intercept, rms residual)`.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateFit(n));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(n));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Ok((slope, intercept, (rss / nf).sqrt()))
}

/// Fit the decay exponent of `sup_{R ≤ |ξ| ≤ 2R} |ν̂_j|` across
/// geometrically spaced `R ∈ [r_min, r_max]`.
#[allow(clippy::too_many_arguments)]
pub fn decay_fit(
    measure: &CantorMeasure,
    j: usize,
    r_min: f64,
    r_max: f64,
    annuli_count: usize,
    samples_per_annulus: usize,
    seed: u64,
    tol: f64,
) -> Result<DecayFit> {
    if annuli_count < 2 {
        return Err(Error::DegenerateFit(annuli_count));
    }
    if !(r_min >= 1.0 && r_min < r_max) {
        return Err(Error::BadInterval(r_min, r_max));
    }
    let ratio = (r_max / r_min).powf(1.0 / (annuli_count as f64 - 1.0));
    let mut annuli = Vec::with_capacity(annuli_count);
    for i in 0..annuli_count {
        let r = r_min * ratio.powi(i as i32);
        let sup = annulus_sup(measure, j, r, samples_per_annulus, seed, tol)?;
        annuli.push((r, sup));
    }
    let pts: Vec<(f64, f64)> = annuli
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .map(|&(r, s)| (r.ln(), s.ln()))
        .collect();
    let (exponent, intercept, residual) = ols_fit(&pts)?;
    Ok(DecayFit {
        exponent,
        intercept,
        residual,
        annuli,
    })
}

/// Per-(`p`, dyadic annulus) `L^p` contribution estimates plus a fitted
/// log-slope of contribution against log radius for each `p`.
pub fn lp_convergence_scan(
    measure: &CantorMeasure,
    j: usize,
    p_list: &[f64],
    r_max: f64,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for &p in p_list {
        let contributions = lp_annulus_contributions(measure, j, p, r_max, samples, seed, tol)?;
        let mut fit_pts = Vec::new();
        let mut total = KahanSum::default();
        for &(r_lo, r_hi, contrib, se) in &contributions {
            total.add(contrib);
            rows.push(
                ScanRow::new()
                    .with("p", p)
                    .with("r_lo", r_lo)
                    .with("r_hi", r_hi)
                    .with("contribution", contrib)
                    .with("std_error", se)
                    .with("is_fit_row", 0.0),
            );
            if r_lo >= 1.0 && contrib > 0.0 {
                fit_pts.push((r_lo.ln(), contrib.ln()));
            }
        }
        let (slope, intercept, residual) = ols_fit(&fit_pts)?;
        rows.push(
            ScanRow::new()
                .with("p", p)
                .with("r_lo", 1.0)
                .with("r_hi", r_max)
                .with("contribution", total.value())
                .with("std_error", 0.0)
                .with("is_fit_row", 1.0)
                .with("slope", slope)
                .with("intercept", intercept)
                .with("residual", residual),
        );
    }
    Ok(rows)
}

/// `e(p) = e^{2πip}`.
fn e_of(p: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * p).sin_cos();
    Complex64::new(c, s)
}

/// Parameter window `{t : |γ(t) − γ(t*)| ≤ r}` around `t*`, found by
/// bisection on each side (the distance is monotone in `|t − t*|`).
fn curve_ball_window(curve: &MomentCurve, t_star: f64, r: f64) -> (f64, f64) {
    let center = curve.evaluate(t_star);
    let dist = |t: f64| (curve.evaluate(t) - &center).norm();
    let solve = |mut inside: f64, mut outside: f64| -> f64 {
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if dist(mid) <= r {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    // |γ(t) − γ(t*)| ≥ |t − t*|, so the window is inside [t*−r, t*+r]
    let hi_probe = (t_star + r).min(1.0);
    let hi = if dist(hi_probe) <= r {
        hi_probe
    } else {
        solve(t_star, hi_probe)
    };
    let lo_probe = (t_star - r).max(0.0);
    let lo = if dist(lo_probe) <= r {
        lo_probe
    } else {
        solve(t_star, lo_probe)
    };
    (lo, hi)
}

/// Knapp-box scaling experiment.
///
/// For each level `k`: restrict the deepest-level measure to the ball
/// `B(γ(t*), r_k)` with `t*` the leftmost surviving level-`k` point and
/// `r_k = M_k^{-1}`, then estimate `∫ |(1_B dμ)^(ξ)|^p dξ` over the dual of
/// the isotropic curve box at `t*`, shrunk by `dual_scale`. The transform
/// is phase-centered at `γ(t*)` so coherence is visible in the real part.
/// Emits one row per level plus a final fit row with the log-log slope.
#[allow(clippy::too_many_arguments)]
pub fn knapp_experiment(
    measure: &CantorMeasure,
    p: f64,
    q: f64,
    level_list: &[usize],
    dual_scale: f64,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<ScanRow>> {
    debug_assert!(dual_scale > 0.0 && dual_scale <= 1.0);
    let curve = MomentCurve::new(measure.params.d)?;
    let top = measure.level(measure.top_level())?;
    let beta = top.beta_f64();
    let mut rows = Vec::new();
    let mut fit_pts = Vec::new();
    for &k in level_list {
        let level_k = measure.level(k)?;
        let &first = level_k
            .intervals
            .first()
            .ok_or(Error::EmptyLevel(k))?;
        let t_star = first as f64 / level_k.m_j as f64;
        let r_k = 1.0 / level_k.m_j as f64;
        let (w_lo, w_hi) = curve_ball_window(&curve, t_star, r_k);
        // deepest-level intervals clipped to the parameter window
        let intervals: Vec<(f64, f64)> = top
            .interval_bounds()
            .filter_map(|(a, b)| {
                let (lo, hi) = (a.max(w_lo), b.min(w_hi));
                (lo < hi).then_some((lo, hi))
            })
            .collect();
        if intervals.is_empty() {
            return Err(Error::EmptyLevel(k));
        }
        let mass = beta * intervals.iter().map(|(a, b)| b - a).sum::<f64>();
        let dual = curve.isotropic_box(t_star, r_k)?.dual();
        let dual_volume = dual.volume() * dual_scale.powi(curve.dim() as i32);
        let gamma_star = curve.evaluate(t_star);

        let mut mean = KahanSum::default();
        let mut mean_sq = KahanSum::default();
        let mut min_re_ratio = f64::INFINITY;
        for i in 0..samples {
            let mut stream = Stream::keyed(seed, &[k as u64, i as u64]);
            let u: Vec<f64> = (0..curve.dim())
                .map(|_| stream.uniform_in(-1.0, 1.0))
                .collect();
            let xi_vec = dual.point_at(&u, dual_scale);
            let xi: Vec<f64> = xi_vec.iter().copied().collect();
            let raw = transform_over_intervals(beta, &intervals, &xi, tol)?.value;
            // recenter the phase at γ(t*)
            let centered = raw * e_of(gamma_star.dot(&xi_vec));
            min_re_ratio = min_re_ratio.min(centered.re / mass);
            let v = centered.norm().powf(p);
            mean.add(v);
            mean_sq.add(v * v);
        }
        let n = samples as f64;
        let mu = mean.value() / n;
        let var = ((mean_sq.value() / n - mu * mu) / n).max(0.0);
        let integral = dual_volume * mu;
        fit_pts.push((r_k.ln(), integral.ln()));
        rows.push(
            ScanRow::new()
                .with("level", k as f64)
                .with("r_k", r_k)
                .with("integral", integral)
                .with("std_error", dual_volume * var.sqrt())
                .with("mass", mass)
                .with("norm_q", mass.powf(1.0 / q))
                .with("min_re_ratio", min_re_ratio)
                .with("is_fit_row", 0.0),
        );
    }
    let (slope, intercept, residual) = ols_fit(&fit_pts)?;
    rows.push(
        ScanRow::new()
            .with("level", f64::NAN)
            .with("r_k", f64::NAN)
            .with("integral", f64::NAN)
            .with("std_error", f64::NAN)
            .with("mass", f64::NAN)
            .with("norm_q", f64::NAN)
            .with("min_re_ratio", f64::NAN)
            .with("is_fit_row", 1.0)
            .with("slope", slope)
            .with("intercept", intercept)
            .with("residual", residual),
    );
    Ok(rows)
}

/// Thresholds used by [`concentration_check`].
pub const CONCENTRATION_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Resample the next level repeatedly and compare the empirical tails of
/// `|ν̂_{j+1} − ν̂_j|` against the Hoeffding reference `2·exp(−2λ²)` at
/// thresholds `λ·√(4·C)`, with `C` the realized max of `Σ|X_I|²`. Real and
/// imaginary parts are treated separately.
pub fn concentration_check(
    measure: &CantorMeasure,
    j: usize,
    xi: &[f64],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<ScanRow> {
    debug_assert!(trials >= 100);
    let base = nu_hat(measure, j, xi, tol)?.value;
    let mut diffs = Vec::with_capacity(trials);
    let mut sq_sum_bound = 0.0f64;
    for trial in 0..trials {
        let seed2 = Stream::keyed(seed, &[j as u64, trial as u64]).next_u64();
        let child = measure.resample_children(j, seed2)?;
        let hat = nu_hat_level(&child, xi, tol)?.value;
        diffs.push(hat - base);
        let sq = sq_sum_increments_with_child(measure, j, &child, xi, tol)?;
        sq_sum_bound = sq_sum_bound.max(sq);
    }
    let mut row = ScanRow::new()
        .with("j", j as f64)
        .with("trials", trials as f64)
        .with("sq_sum_bound", sq_sum_bound);
    for (i, &x) in xi.iter().enumerate() {
        row.push(&format!("xi_{}", i + 1), x);
    }
    let scale = (4.0 * sq_sum_bound).sqrt();
    for &lambda in &CONCENTRATION_LAMBDAS {
        let t = lambda * scale;
        let tail_re = diffs.iter().filter(|d| d.re.abs() > t).count() as f64 / trials as f64;
        let tail_im = diffs.iter().filter(|d| d.im.abs() > t).count() as f64 / trials as f64;
        let reference = 2.0 * (-2.0 * lambda * lambda).exp();
        let tag = format!("{lambda:.1}").replace('.', "_");
        row.push(&format!("tail_re_{tag}"), tail_re);
        row.push(&format!("tail_im_{tag}"), tail_im);
        row.push(&format!("hoeffding_{tag}"), reference);
    }
    Ok(row)
}

/// Per-cell volume-estimate vs bound comparison over the `(s1, s2)` grid,
/// with a `Σ|X|²`-vs-`c_bound` check on up to 20 sampled member
/// frequencies per cell.
#[allow(clippy::too_many_arguments)]
pub fn omega_scan(
    measure: &CantorMeasure,
    j: usize,
    s1_max: u32,
    s2_max: u32,
    variant: CellVariant,
    samples: usize,
    eps: f64,
    seed: u64,
    tol: f64,
) -> Result<Vec<ScanRow>> {
    let level = measure.level(j)?;
    let m_j = level.m_j;
    let alpha = measure.params.alpha_eff()?;
    let d = measure.params.d;
    let mut rows = Vec::new();
    for s1 in 0..=s1_max {
        for s2 in 0..=s2_max {
            if 2f64.powi(s2 as i32) > m_j as f64 * 2f64.powi(s1 as i32) {
                continue; // outside the admissible cell range
            }
            let (estimate, std_error) =
                estimate_omega_volume(measure, j, s1, s2, variant, samples, seed)?;
            let bound = omega_volume_bound(m_j, s1, s2, alpha, d, eps, variant)?;
            let zero = estimate <= 0.0;
            let ratio = if zero { f64::NAN } else { estimate / bound };

            // sample member frequencies and compare Σ|X|² against c_bound
            let cb = c_bound(m_j, s1, s2, alpha, eps);
            let mut members = 0usize;
            let mut max_sq_ratio = 0.0f64;
            if j < measure.top_level() {
                let mut stream = Stream::keyed(seed, &[s1 as u64, s2 as u64, 0x6d656d]);
                let base = m_j as f64 * 2f64.powi(s1 as i32);
                let mut attempts = 0usize;
                while members < 20 && attempts < 400 {
                    attempts += 1;
                    let xi: Vec<f64> = (1..=d)
                        .map(|k| {
                            let b = base.powi(k as i32);
                            stream.uniform_in(-b, b)
                        })
                        .collect();
                    if in_omega_s1s2(measure, j, s1, s2, &xi, variant)? {
                        members += 1;
                        let sq = sq_sum_increments(measure, j, &xi, tol)?;
                        max_sq_ratio = max_sq_ratio.max(sq / cb);
                    }
                }
            }
            rows.push(
                ScanRow::new()
                    .with("j", j as f64)
                    .with("s1", s1 as f64)
                    .with("s2", s2 as f64)
                    .with("estimate", estimate)
                    .with("std_error", std_error)
                    .with("bound", bound)
                    .with("ratio", ratio)
                    .with("zero_flag", if zero { 1.0 } else { 0.0 })
                    .with("c_bound", cb)
                    .with("members_checked", members as f64)
                    .with("max_sq_over_c", max_sq_ratio),
            );
        }
    }
    Ok(rows)
}
