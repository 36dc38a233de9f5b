//! Frequency-cell sets `Ω_j(s1)`, `Ω_j(s1,s2)`, `Ω_{3,j}(s1,s2)` and their
//! disjointified `Ω̃` variants: certified membership, Monte Carlo volume
//! estimation, and the theoretical bound evaluators they are compared
//! against.
//!
//! Membership is exact (up to root-isolation tolerance), not sampled in `t`:
//! each constraint `|⟨γ^{(k)}(t),ξ⟩| ≤ b` is a polynomial sublevel set in
//! `t`, which we compute as a finite union of intervals and intersect with
//! the surviving Cantor intervals. A frequency within `1e-9` of a constraint
//! boundary is classified as inside (the sets are closed).

use crate::cascade::CantorMeasure;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::stream::Stream;
use nalgebra::{DMatrix, DVector};

/// Relative slack applied to constraint bounds: boundary points count as in.
const BOUNDARY_SLACK: f64 = 1e-9;

/// Overlap tolerance when intersecting interval sets with the Cantor set.
const MEET_TOL: f64 = 1e-12;

/// Which family of cells: the general `d ≥ 4` two-witness definition or the
/// `d = 3` single-witness one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellVariant {
    General,
    D3,
}

/// Coordinates of one frequency cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellIndex {
    pub j: usize,
    pub s1: u32,
    pub s2: u32,
    pub variant: CellVariant,
}

impl CellIndex {
    /// Range check `1 ≤ 2^{s2} ≤ M_j·2^{s1}`.
    pub fn validate(&self, m_j: u64) -> Result<()> {
        if 2f64.powi(self.s2 as i32) > m_j as f64 * 2f64.powi(self.s1 as i32) {
            return Err(Error::InvalidRegime(format!(
                "s2 = {} exceeds the cell range for M_j = {m_j}, s1 = {}",
                self.s2, self.s1
            )));
        }
        Ok(())
    }

    /// Diagnostic third-coordinate scale `log2(|ξ_3| / (M_j 2^{s1+s2}))`.
    pub fn s3_diagnostic(&self, xi: &[f64], m_j: u64) -> Option<f64> {
        let xi3 = xi.get(2)?.abs();
        if xi3 == 0.0 {
            return None;
        }
        Some((xi3 / (m_j as f64 * 2f64.powi((self.s1 + self.s2) as i32))).log2())
    }
}

fn phase_poly(xi: &[f64]) -> Poly {
    let mut coeffs = Vec::with_capacity(xi.len() + 1);
    coeffs.push(0.0);
    coeffs.extend_from_slice(xi);
    Poly::new(coeffs)
}

/// Intersection of two sorted lists of disjoint closed intervals.
fn intersect_sets(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut k) = (0, 0);
    while i < a.len() && k < b.len() {
        let lo = a[i].0.max(b[k].0);
        let hi = a[i].1.min(b[k].1);
        if lo <= hi + MEET_TOL {
            out.push((lo, hi.max(lo)));
        }
        if a[i].1 < b[k].1 {
            i += 1;
        } else {
            k += 1;
        }
    }
    out
}

fn meets(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    !intersect_sets(a, b).is_empty()
}

/// `{t ∈ [0,1] : |⟨γ^{(k)}(t), ξ⟩| ≤ bound}` as disjoint closed intervals.
///
/// The phase derivative is a polynomial of degree `d − k`; endpoints are
/// located by root isolation. The bound carries the boundary slack.
pub fn constraint_interval_set(
    measure: &CantorMeasure,
    _j: usize,
    xi: &[f64],
    k: usize,
    bound: f64,
) -> Result<Vec<(f64, f64)>> {
    let d = measure.params.d;
    if k < 1 || k > d {
        return Err(Error::DerivativeOrder { order: k, max: d });
    }
    let slack_bound = bound + BOUNDARY_SLACK * (1.0 + bound);
    Ok(phase_poly(xi).derivative_n(k).sublevel_set(0.0, 1.0, slack_bound))
}

fn cantor_intervals(measure: &CantorMeasure, j: usize) -> Result<Vec<(f64, f64)>> {
    Ok(measure.level(j)?.interval_bounds().collect())
}

/// Intersection over `k ∈ ks` of the sublevel sets with bounds `bounds[k]`,
/// starting from the full interval.
fn constraint_intersection(
    measure: &CantorMeasure,
    j: usize,
    xi: &[f64],
    constraints: &[(usize, f64)],
) -> Result<Vec<(f64, f64)>> {
    let mut acc = vec![(0.0, 1.0)];
    for &(k, bound) in constraints {
        if acc.is_empty() {
            break;
        }
        let set = constraint_interval_set(measure, j, xi, k, bound)?;
        acc = intersect_sets(&acc, &set);
    }
    Ok(acc)
}

/// Bounds for the one-parameter cell: `(M_j 2^{s1})^k` for `k = 1..d`.
fn s1_constraints(d: usize, m_j: u64, s1: u32) -> Vec<(usize, f64)> {
    let base = m_j as f64 * 2f64.powi(s1 as i32);
    (1..=d).map(|k| (k, base.powi(k as i32))).collect()
}

/// Bounds for the second-parameter constraints: `(M_j 2^{s1}) 2^{s2(k−1)}`
/// for `k = 2..d`.
fn s2_constraints(d: usize, m_j: u64, s1: u32, s2: u32) -> Vec<(usize, f64)> {
    let base = m_j as f64 * 2f64.powi(s1 as i32);
    (2..=d)
        .map(|k| (k, base * 2f64.powi((s2 * (k as u32 - 1)) as i32)))
        .collect()
}

/// `ξ ∈ Ω_j(s1)`: some `t` in the level-`j` Cantor set satisfies
/// `|⟨γ^{(k)}(t), ξ⟩| ≤ (M_j 2^{s1})^k` for all `1 ≤ k ≤ d`.
pub fn in_omega_s1(measure: &CantorMeasure, j: usize, s1: u32, xi: &[f64]) -> Result<bool> {
    let level = measure.level(j)?;
    let constraints = s1_constraints(measure.params.d, level.m_j, s1);
    let witness = constraint_intersection(measure, j, xi, &constraints)?;
    Ok(meets(&witness, &cantor_intervals(measure, j)?))
}

/// `ξ ∈ Ω_j(s1, s2)`.
///
/// General variant: `ξ ∈ Ω_j(s1)` and some (possibly different) `t` in the
/// Cantor set meets the `k ≥ 2` constraints. `d3` variant: a single witness
/// `t` satisfies the constraints for `k = 1, 2, 3`.
pub fn in_omega_s1s2(
    measure: &CantorMeasure,
    j: usize,
    s1: u32,
    s2: u32,
    xi: &[f64],
    variant: CellVariant,
) -> Result<bool> {
    let d = measure.params.d;
    let level = measure.level(j)?;
    let m_j = level.m_j;
    match variant {
        CellVariant::D3 => {
            if d != 3 {
                return Err(Error::VariantDimensionMismatch(d));
            }
            let mut constraints = vec![(1, m_j as f64 * 2f64.powi(s1 as i32))];
            constraints.extend(s2_constraints(d, m_j, s1, s2));
            let witness = constraint_intersection(measure, j, xi, &constraints)?;
            Ok(meets(&witness, &cantor_intervals(measure, j)?))
        }
        CellVariant::General => {
            if !in_omega_s1(measure, j, s1, xi)? {
                return Ok(false);
            }
            let constraints = s2_constraints(d, m_j, s1, s2);
            let witness = constraint_intersection(measure, j, xi, &constraints)?;
            Ok(meets(&witness, &cantor_intervals(measure, j)?))
        }
    }
}

/// `ξ ∈ Ω̃_j(s1, s2) = Ω_j(s1,s2) \ (Ω_j(s1,s2−1) ∪ Ω_j(s1−1))`, with the
/// degenerate cases at `s1 = 0` and/or `s2 = 0`.
pub fn in_omega_tilde(
    measure: &CantorMeasure,
    j: usize,
    s1: u32,
    s2: u32,
    xi: &[f64],
    variant: CellVariant,
) -> Result<bool> {
    if !in_omega_s1s2(measure, j, s1, s2, xi, variant)? {
        return Ok(false);
    }
    if s2 > 0 && in_omega_s1s2(measure, j, s1, s2 - 1, xi, variant)? {
        return Ok(false);
    }
    if s1 > 0 && in_omega_s1(measure, j, s1 - 1, xi)? {
        return Ok(false);
    }
    Ok(true)
}

/// Theoretical volume bound for `Ω_j(s1, s2)`, taking the level scale
/// `M_j` directly.
///
/// For the general variant the applicable regime is selected by whether
/// `2^{s2} ≤ (2^{s1} M_j)^{1/(d−1)}`.
pub fn omega_volume_bound(
    m_j: u64,
    s1: u32,
    s2: u32,
    alpha: f64,
    d: usize,
    eps: f64,
    variant: CellVariant,
) -> Result<f64> {
    let m = m_j as f64;
    let s1f = s1 as f64;
    let s2f = s2 as f64;
    let df = d as f64;
    let base = m * 2f64.powi(s1 as i32); // M_j 2^{s1}
    match variant {
        CellVariant::D3 => {
            if d != 3 {
                return Err(Error::VariantDimensionMismatch(d));
            }
            Ok(m.powf(eps)
                * base.powi(3)
                * 2f64.powf(s1f * (1.0 - alpha) + s2f * (3.0 + alpha)))
        }
        CellVariant::General => {
            if d < 4 {
                return Err(Error::InvalidRegime(format!(
                    "general-variant volume bound requires d >= 4 (got {d})"
                )));
            }
            let half = df * (df - 1.0) / 2.0;
            let common = m.powf(eps) * base.powf(df) * 2f64.powf(s1f * (1.0 - alpha) / (df - 1.0));
            if 2f64.powf(s2f) <= base.powf(1.0 / (df - 1.0)) {
                // regime 1; the residual s1 exponent is
                // d(1−α)/(d−1) − (1−α)/(d−1) = 1−α after factoring `common`
                Ok(common * 2f64.powf(s2f * (half + alpha * df)) * 2f64.powf(s1f * (1.0 - alpha)))
            } else {
                // regime 2
                Ok(common
                    * 2f64.powf(s2f * half)
                    * m.powf(alpha)
                    * 2f64.powf(s1f)
                    * (m * 2f64.powf(s1f - s2f)).powf(alpha / (df - 2.0)))
            }
        }
    }
}

/// Evaluates `M_j^{−α+ε} · 2^{−s1(2−α)} · 2^{−s2·α}`.
pub fn c_bound(m_j: u64, s1: u32, s2: u32, alpha: f64, eps: f64) -> f64 {
    (m_j as f64).powf(-alpha + eps)
        * 2f64.powf(-(s1 as f64) * (2.0 - alpha))
        * 2f64.powf(-(s2 as f64) * alpha)
}

/// One inflated anchor parallelotope `{ξ : |A ξ| ≤ half}` with rows
/// `A_k = γ^{(k)}(t̃)`.
#[derive(Clone, Debug)]
pub struct Anchor {
    pub rows: DMatrix<f64>,
    pub half: Vec<f64>,
    pub volume: f64,
}

impl Anchor {
    pub fn new(rows: DMatrix<f64>, half: Vec<f64>) -> Result<Self> {
        let d = half.len();
        debug_assert_eq!(rows.nrows(), d);
        let det = rows.clone().lu().determinant().abs();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularAnchor);
        }
        let volume = half.iter().map(|h| 2.0 * h).product::<f64>() / det;
        Ok(Anchor { rows, half, volume })
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        let v = &self.rows * DVector::from_column_slice(xi);
        v.iter()
            .zip(&self.half)
            .all(|(x, h)| x.abs() <= h * (1.0 + BOUNDARY_SLACK) + BOUNDARY_SLACK)
    }

    /// Map a point of `[−1,1]^d` onto the parallelotope by a linear solve.
    pub fn point(&self, cube: &[f64]) -> Vec<f64> {
        let rhs = DVector::from_iterator(
            self.half.len(),
            cube.iter().zip(&self.half).map(|(u, h)| u * h),
        );
        let sol = self
            .rows
            .clone()
            .lu()
            .solve(&rhs)
            .expect("anchor matrix verified nonsingular");
        sol.iter().copied().collect()
    }
}

/// Unbiased union-volume estimator over a family of anchors: sample from a
/// volume-weighted random anchor, weight by one over the number of anchors
/// containing the sample, and separately track the fraction passing an
/// exact membership predicate.
///
/// Returns `(union-volume estimate × pass fraction, scaled binomial
/// standard error)`.
pub fn estimate_union_volume(
    anchors: &[Anchor],
    pass: impl Fn(&[f64]) -> Result<bool>,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    debug_assert!(n_samples >= 1);
    if anchors.is_empty() {
        return Err(Error::EmptyLevel(0));
    }
    let total: f64 = anchors.iter().map(|a| a.volume).sum();
    let d = anchors[0].half.len();
    let mut weight_sum = 0.0f64;
    let mut weight_sq_sum = 0.0f64;
    let mut passes = 0usize;
    for i in 0..n_samples {
        let mut stream = Stream::keyed(seed, &[0x616e_6368, i as u64]);
        // volume-weighted anchor choice
        let mut pick = stream.uniform() * total;
        let mut idx = 0;
        for (k, a) in anchors.iter().enumerate() {
            if pick < a.volume || k + 1 == anchors.len() {
                idx = k;
                break;
            }
            pick -= a.volume;
        }
        let cube: Vec<f64> = (0..d).map(|_| stream.uniform_in(-1.0, 1.0)).collect();
        let xi = anchors[idx].point(&cube);
        let containing = anchors.iter().filter(|a| a.contains(&xi)).count().max(1);
        let w = 1.0 / containing as f64;
        weight_sum += w;
        weight_sq_sum += w * w;
        if pass(&xi)? {
            passes += 1;
        }
    }
    let n = n_samples as f64;
    let w_mean = weight_sum / n;
    let union_est = total * w_mean;
    let frac = passes as f64 / n;
    // delta-method std error: the weight-overlap variance matters whenever
    // anchors overlap, not just the binomial pass-fraction term
    let w_var = ((weight_sq_sum / n - w_mean * w_mean) / n).max(0.0);
    let union_var = total * total * w_var;
    let frac_var = frac * (1.0 - frac) / n;
    let se = (frac * frac * union_var + union_est * union_est * frac_var).sqrt();
    Ok((union_est * frac, se))
}

/// Build the inflated anchor at curve parameter `t` for the cell bounds.
fn cell_anchor(measure: &CantorMeasure, m_j: u64, s1: u32, s2: u32, t: f64) -> Result<Anchor> {
    let d = measure.params.d;
    let inflate = 100.0 * d as f64;
    let mut rows = DMatrix::zeros(d, d);
    let mut half = Vec::with_capacity(d);
    let base = m_j as f64 * 2f64.powi(s1 as i32);
    for k in 1..=d {
        let g = measure_curve_derivative(d, t, k);
        for (c, v) in g.iter().enumerate() {
            rows[(k - 1, c)] = *v;
        }
        let bound = if k == 1 {
            base
        } else {
            base * 2f64.powi((s2 * (k as u32 - 1)) as i32)
        };
        half.push(inflate * bound);
    }
    Anchor::new(rows, half)
}

fn measure_curve_derivative(d: usize, t: f64, k: usize) -> Vec<f64> {
    crate::curve::MomentCurve::new(d)
        .expect("dimension validated by cascade parameters")
        .derivative(t, k)
        .expect("derivative order within 1..=d")
        .iter()
        .copied()
        .collect()
}

/// Monte Carlo volume of `Ω_j(s1, s2)` via the covering by inflated anchor
/// parallelotopes placed at the left endpoints of the level-`j` intervals.
pub fn estimate_omega_volume(
    measure: &CantorMeasure,
    j: usize,
    s1: u32,
    s2: u32,
    variant: CellVariant,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let level = measure.level(j)?;
    if level.intervals.is_empty() {
        return Err(Error::EmptyLevel(j));
    }
    let m_j = level.m_j;
    let anchors: Vec<Anchor> = level
        .interval_bounds()
        .map(|(lo, _)| cell_anchor(measure, m_j, s1, s2, lo))
        .collect::<Result<_>>()?;
    estimate_union_volume(
        &anchors,
        |xi| in_omega_s1s2(measure, j, s1, s2, xi, variant),
        n_samples,
        seed,
    )
}
