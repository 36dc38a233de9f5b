//! Certified oscillatory integrals `∫_I e(−⟨γ(t), ξ⟩) dt` for polynomial
//! phases, together with the phase-derivative functional `H_I(ξ)` and the
//! van der Corput–type bound `min{|I|, H_I(ξ)^{-1}}`.
//!
//! The phase `P(t) = Σ_k ξ_k t^k` is an exact polynomial, so panel
//! boundaries can be certified from polynomial range bounds: the interval is
//! first cut at the roots of `P'` into monotone pieces, then each piece is
//! bisected until the phase variation per panel is at most one period.
//! Fixed-order Gauss–Legendre is applied per panel and the error is
//! estimated by node-count doubling.

use crate::error::{Error, Result};
use crate::poly::Poly;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Phase polynomial `P(t) = Σ_{k=1}^d ξ_k t^k = ⟨γ(t), ξ⟩`; the coefficient
/// vector is the frequency `ξ`.
#[derive(Clone, Debug)]
pub struct PhasePolynomial {
    poly: Poly,
}

impl PhasePolynomial {
    /// Build the phase from a frequency vector `ξ = (ξ_1, …, ξ_d)`.
    pub fn from_xi(xi: &[f64]) -> Self {
        let mut coeffs = Vec::with_capacity(xi.len() + 1);
        coeffs.push(0.0);
        coeffs.extend_from_slice(xi);
        PhasePolynomial {
            poly: Poly::new(coeffs),
        }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.poly.eval(t)
    }

    /// `P^{(k)}`.
    pub fn derivative(&self, k: usize) -> Poly {
        self.poly.derivative_n(k)
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }
}

/// Value of an oscillatory integral with an estimated absolute error.
#[derive(Clone, Copy, Debug)]
pub struct IntegralValue {
    pub value: Complex64,
    pub err: f64,
}

impl IntegralValue {
    pub fn zero() -> Self {
        IntegralValue {
            value: Complex64::new(0.0, 0.0),
            err: 0.0,
        }
    }
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // nodes/weights on [-1, 1] by Newton iteration on P_n
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn gl16() -> &'static [(f64, f64)] {
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| gauss_legendre(16))
}

fn gl32() -> &'static [(f64, f64)] {
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| gauss_legendre(32))
}

#[inline]
fn unit_phase(p: f64) -> Complex64 {
    // e(−p) = e^{−2πip}
    let (s, c) = (std::f64::consts::TAU * p).sin_cos();
    Complex64::new(c, -s)
}

fn panel_quad(phase: &PhasePolynomial, a: f64, b: f64, rule: &[(f64, f64)]) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in rule {
        acc += unit_phase(phase.eval(mid + half * x)) * w;
    }
    acc * half
}

fn integrate_panel(
    phase: &PhasePolynomial,
    a: f64,
    b: f64,
    tol_per_len: f64,
    depth: usize,
    out: &mut IntegralValue,
) {
    let coarse = panel_quad(phase, a, b, gl16());
    let fine = panel_quad(phase, a, b, gl32());
    let err = (fine - coarse).norm();
    if err > tol_per_len * (b - a) && depth < 40 {
        let mid = 0.5 * (a + b);
        integrate_panel(phase, a, mid, tol_per_len, depth + 1, out);
        integrate_panel(phase, mid, b, tol_per_len, depth + 1, out);
    } else {
        out.value += fine;
        out.err += err;
    }
}

/// Panels on which the phase variation is at most one period, obtained by
/// cutting at the roots of `P'` and bisecting monotone pieces.
fn phase_panels(phase: &PhasePolynomial, a: f64, b: f64) -> Vec<(f64, f64)> {
    let dp = phase.derivative(1);
    let mut cuts = vec![a];
    cuts.extend(dp.roots_in(a, b).into_iter().filter(|&r| r > a && r < b));
    cuts.push(b);

    let mut panels = Vec::new();
    for w in cuts.windows(2) {
        let mut stack = vec![(w[0], w[1])];
        while let Some((lo, hi)) = stack.pop() {
            let variation = (phase.eval(hi) - phase.eval(lo)).abs();
            if variation > 1.0 && hi - lo > 1e-15 {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi));
                stack.push((lo, mid));
            } else {
                panels.push((lo, hi));
            }
        }
    }
    panels.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    panels
}

/// `∫_I e(−⟨γ(t), ξ⟩) dt` with estimated error at most `tol·|I|`, or the
/// double-precision roundoff floor of the phase evaluation if that is
/// larger; the returned `err` field reflects whichever was achieved.
pub fn osc_integral(xi: &[f64], interval: (f64, f64), tol: f64) -> Result<IntegralValue> {
    let (a, b) = interval;
    if tol <= 0.0 {
        return Err(Error::NonPositiveTol(tol));
    }
    if !(a <= b && a >= 0.0 && b <= 1.0) {
        return Err(Error::BadInterval(a, b));
    }
    if a == b {
        return Ok(IntegralValue::zero());
    }
    let phase = PhasePolynomial::from_xi(xi);
    if xi.iter().all(|&c| c == 0.0) {
        return Ok(IntegralValue {
            value: Complex64::new(b - a, 0.0),
            err: 0.0,
        });
    }
    let mut out = IntegralValue::zero();
    // The two quadrature rules evaluate sin/cos of 2π·P(t) at different
    // nodes, and P(t) itself carries ~|P|·ε roundoff, so their difference
    // never drops below ~2π·max|P|·ε per unit length. Requesting a tighter
    // tolerance than that makes the bisection chase noise, so clamp the
    // per-length target at the attainable floor.
    let coeff_scale: f64 = xi.iter().map(|c| c.abs()).sum();
    let noise_floor = 8.0 * f64::EPSILON * std::f64::consts::TAU * coeff_scale.max(1.0);
    let tol_per_len = tol.max(noise_floor);
    for (lo, hi) in phase_panels(&phase, a, b) {
        integrate_panel(&phase, lo, hi, tol_per_len, 0, &mut out);
    }
    Ok(out)
}

/// `H_I(ξ) = inf_{t∈I} Σ_{k=1}^d |P^{(k)}(t)/k!|^{1/k}`.
///
/// The summand is piecewise smooth with kinks at the roots of the `P^{(k)}`;
/// the infimum is located by a grid scan per smooth piece followed by
/// golden-section refinement.
pub fn h_functional(xi: &[f64], interval: (f64, f64)) -> Result<f64> {
    let (a, b) = interval;
    if !(a <= b && a >= 0.0 && b <= 1.0) {
        return Err(Error::BadInterval(a, b));
    }
    if xi.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let phase = PhasePolynomial::from_xi(xi);
    let d = xi.len();
    let mut fact = 1.0;
    let terms: Vec<(Poly, f64, f64)> = (1..=d)
        .map(|k| {
            fact *= k as f64;
            (phase.derivative(k), fact, 1.0 / k as f64)
        })
        .collect();
    let g = |t: f64| -> f64 {
        terms
            .iter()
            .map(|(p, kfact, inv_k)| (p.eval(t).abs() / kfact).powf(*inv_k))
            .sum()
    };
    if a == b {
        return Ok(g(a));
    }

    // smooth pieces: cut at the roots of every derivative
    let mut cuts = vec![a, b];
    for (p, _, _) in &terms {
        cuts.extend(p.roots_in(a, b));
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);

    let mut best = f64::INFINITY;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        const GRID: usize = 32;
        let mut vals = [0.0f64; GRID + 1];
        for (i, v) in vals.iter_mut().enumerate() {
            let t = lo + (hi - lo) * i as f64 / GRID as f64;
            *v = g(t);
        }
        for i in 0..=GRID {
            best = best.min(vals[i]);
            // refine interior local minima
            if i > 0 && i < GRID && vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
                let step = (hi - lo) / GRID as f64;
                let t = lo + step * i as f64;
                best = best.min(golden_min(&g, t - step, t + step));
            }
        }
        // the boundary cells may hide a minimum too
        let step = (hi - lo) / GRID as f64;
        best = best.min(golden_min(&g, lo, lo + step));
        best = best.min(golden_min(&g, hi - step, hi));
    }
    Ok(best)
}

fn golden_min(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - PHI * (hi - lo);
    let mut x2 = lo + PHI * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..80 {
        if hi - lo < 1e-13 * (1.0 + lo.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - PHI * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + PHI * (hi - lo);
            f2 = g(x2);
        }
    }
    f1.min(f2)
}

/// `min{|I|, H_I(ξ)^{-1}}`, with `1/0 = ∞` so the bound degrades to `|I|`.
pub fn vdc_bound(xi: &[f64], interval: (f64, f64)) -> Result<f64> {
    let h = h_functional(xi, interval)?;
    let len = interval.1 - interval.0;
    if h == 0.0 {
        Ok(len)
    } else {
        Ok(len.min(1.0 / h))
    }
}
