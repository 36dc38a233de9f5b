//! Geometry of the moment curve `γ(t) = (t, t², …, t^d)`: evaluation,
//! derivatives, orthonormal frames from successive derivatives, anisotropic
//! curve-adapted boxes, and dual boxes.

use crate::error::{Error, Result};
use nalgebra::DVector;

/// The moment curve in `R^d`, `2 ≤ d ≤ 6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MomentCurve {
    d: usize,
}

impl MomentCurve {
    pub fn new(d: usize) -> Result<Self> {
        if !(2..=6).contains(&d) {
            return Err(Error::DimensionOutOfRange(d));
        }
        Ok(MomentCurve { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `γ(t) = (t, t², …, t^d)`.
    pub fn evaluate(&self, t: f64) -> DVector<f64> {
        let mut v = DVector::zeros(self.d);
        let mut p = 1.0;
        for j in 0..self.d {
            p *= t;
            v[j] = p;
        }
        v
    }

    /// `γ^{(k)}(t)`; component `j` (1-based) is `j!/(j−k)! · t^{j−k}` for
    /// `j ≥ k`, zero below.
    pub fn derivative(&self, t: f64, k: usize) -> Result<DVector<f64>> {
        if k < 1 || k > self.d {
            return Err(Error::DerivativeOrder {
                order: k,
                max: self.d,
            });
        }
        let mut v = DVector::zeros(self.d);
        for j in k..=self.d {
            // falling factorial j·(j-1)···(j-k+1)
            let mut c = 1.0;
            for i in 0..k {
                c *= (j - i) as f64;
            }
            v[j - 1] = c * t.powi((j - k) as i32);
        }
        Ok(v)
    }

    /// Orthonormal frame from Gram–Schmidt on `(γ'(t), …, γ^{(d)}(t))`,
    /// with `e_k` oriented so that `⟨e_k, γ^{(k)}(t)⟩ > 0`.
    ///
    /// Modified Gram–Schmidt with one re-orthogonalization pass; the
    /// derivative matrix is mildly ill-conditioned near `t = 1` for `d = 6`
    /// and the second pass keeps residuals below `1e-10`.
    pub fn frenet_frame(&self, t: f64) -> Result<CurveFrame> {
        let derivs: Vec<DVector<f64>> = (1..=self.d)
            .map(|k| self.derivative(t, k))
            .collect::<Result<_>>()?;
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(self.d);
        for g in &derivs {
            let mut v = g.clone();
            for e in &basis {
                let proj = e.dot(&v);
                v -= e * proj;
            }
            // re-orthogonalization pass
            for e in &basis {
                let proj = e.dot(&v);
                v -= e * proj;
            }
            let norm = v.norm();
            v /= norm;
            basis.push(v);
        }
        for (k, e) in basis.iter_mut().enumerate() {
            if e.dot(&derivs[k]) < 0.0 {
                *e = -&*e;
            }
        }
        Ok(CurveFrame { t, basis })
    }

    /// Curve-adapted box at `γ(t)`: frame axes, half-lengths
    /// `(ε, ε², …, ε^d)`.
    pub fn isotropic_box(&self, t: f64, eps: f64) -> Result<AnisotropicBox> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::EpsOutOfRange(eps));
        }
        let frame = self.frenet_frame(t)?;
        let half_lengths = (1..=self.d).map(|k| eps.powi(k as i32)).collect();
        Ok(AnisotropicBox {
            center: self.evaluate(t),
            axes: frame.basis,
            half_lengths,
        })
    }
}

/// Ordered orthonormal basis attached to a curve point.
#[derive(Clone, Debug)]
pub struct CurveFrame {
    pub t: f64,
    pub basis: Vec<DVector<f64>>,
}

/// Oriented rectangular box: center, orthonormal axes, per-axis half-lengths.
#[derive(Clone, Debug)]
pub struct AnisotropicBox {
    pub center: DVector<f64>,
    pub axes: Vec<DVector<f64>>,
    pub half_lengths: Vec<f64>,
}

impl AnisotropicBox {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn volume(&self) -> f64 {
        self.half_lengths.iter().map(|h| 2.0 * h).product()
    }

    /// Dual box: origin-centered, same axes, reciprocal half-lengths.
    pub fn dual(&self) -> AnisotropicBox {
        AnisotropicBox {
            center: DVector::zeros(self.dim()),
            axes: self.axes.clone(),
            half_lengths: self.half_lengths.iter().map(|h| 1.0 / h).collect(),
        }
    }

    /// Closed containment test against the box scaled by `scale` about its
    /// center.
    pub fn contains(&self, x: &DVector<f64>, scale: f64) -> bool {
        let rel = x - &self.center;
        self.axes
            .iter()
            .zip(&self.half_lengths)
            .all(|(axis, h)| axis.dot(&rel).abs() <= scale * h)
    }

    /// Point `center + Σ uᵢ·scale·hᵢ·axisᵢ` for coordinates `u ∈ [-1,1]^d`.
    pub fn point_at(&self, u: &[f64], scale: f64) -> DVector<f64> {
        let mut x = self.center.clone();
        for ((axis, &h), &ui) in self.axes.iter().zip(&self.half_lengths).zip(u) {
            x += axis * (ui * scale * h);
        }
        x
    }
}
