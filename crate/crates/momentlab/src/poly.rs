//! Real polynomials of low degree: evaluation, derivatives, root isolation
//! on an interval, and sublevel sets.
//!
//! Root isolation works by recursion on the derivative: the roots of `p'`
//! split the interval into pieces on which `p` is monotone, and a sign
//! change on a monotone piece is bisected to the requested tolerance. For
//! the degrees that occur here (≤ 6) this is exact up to bisection
//! tolerance and has no failure modes.

/// Dense polynomial with ascending coefficients: `coeffs[k]` multiplies `t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

/// Bisection tolerance for isolated roots.
pub const ROOT_TOL: f64 = 1e-12;

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    pub fn degree(&self) -> usize {
        let mut d = self.coeffs.len().saturating_sub(1);
        while d > 0 && self.coeffs[d] == 0.0 {
            d -= 1;
        }
        d
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i as f64 + 1.0))
                .collect(),
        )
    }

    /// k-th derivative.
    pub fn derivative_n(&self, k: usize) -> Poly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.derivative();
        }
        p
    }

    /// Upper bound for `|p|` on `[a, b]` from the triangle inequality on the
    /// Taylor expansion at the midpoint.
    pub fn abs_bound(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut bound = 0.0;
        let mut fact = 1.0;
        let mut p = self.clone();
        for k in 0..self.coeffs.len() {
            if k > 0 {
                p = p.derivative();
                fact *= k as f64;
            }
            bound += p.eval(mid).abs() / fact * h.powi(k as i32);
        }
        bound
    }

    /// All roots of `p` in `[a, b]`, ascending, isolated to [`ROOT_TOL`].
    ///
    /// Roots of even multiplicity where the polynomial touches zero without
    /// a sign change are found through the derivative recursion (they are
    /// roots of `p'` at which `|p|` is below the residual floor).
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        if deg == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            return if r >= a - ROOT_TOL && r <= b + ROOT_TOL {
                vec![r.clamp(a, b)]
            } else {
                Vec::new()
            };
        }
        let crit = self.derivative().roots_in(a, b);
        let mut cuts = Vec::with_capacity(crit.len() + 2);
        cuts.push(a);
        cuts.extend(crit.iter().copied().filter(|&c| c > a && c < b));
        cuts.push(b);

        let scale = self.abs_bound(a, b).max(1.0);
        let mut roots = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo == 0.0 {
                push_root(&mut roots, lo);
            }
            if flo * fhi < 0.0 {
                push_root(&mut roots, self.bisect(lo, hi));
            } else if fhi.abs() <= scale * 1e-14 {
                // touching root at the right cut point
                push_root(&mut roots, hi);
            }
        }
        if self.eval(b) == 0.0 {
            push_root(&mut roots, b);
        }
        roots
    }

    /// Sign-change bisection on `[lo, hi]` with `p(lo)·p(hi) < 0`.
    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = self.eval(lo);
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            let fmid = self.eval(mid);
            if fmid == 0.0 {
                return mid;
            }
            if flo * fmid < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fmid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `{t ∈ [a,b] : |p(t)| ≤ bound}` as a list of disjoint closed intervals.
    pub fn sublevel_set(&self, a: f64, b: f64, bound: f64) -> Vec<(f64, f64)> {
        debug_assert!(bound >= 0.0);
        // breakpoints where |p| crosses the level
        let upper = Poly::new({
            let mut c = self.coeffs.clone();
            c[0] -= bound;
            c
        });
        let lower = Poly::new({
            let mut c = self.coeffs.clone();
            c[0] += bound;
            c
        });
        let mut cuts = vec![a, b];
        cuts.extend(upper.roots_in(a, b));
        cuts.extend(lower.roots_in(a, b));
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| (*x - *y).abs() < ROOT_TOL);

        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            if self.eval(mid).abs() <= bound + ROOT_TOL {
                match out.last_mut() {
                    Some(last) if (last.1 - lo).abs() < 2.0 * ROOT_TOL => last.1 = hi,
                    _ => out.push((lo, hi)),
                }
            }
        }
        out
    }
}

fn push_root(roots: &mut Vec<f64>, r: f64) {
    if roots.last().map_or(true, |&x| r - x > ROOT_TOL) {
        roots.push(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivative() {
        // p(t) = 1 + 2t + 3t^2
        let p = Poly::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative().coeffs, vec![2.0, 6.0]);
        assert_eq!(p.derivative_n(2).coeffs, vec![6.0]);
    }

    #[test]
    fn roots_of_quadratic() {
        // (t - 0.25)(t - 0.75)
        let p = Poly::new(vec![0.1875, -1.0, 1.0]);
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.25).abs() < 1e-10);
        assert!((r[1] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn double_root_found() {
        // (t - 0.5)^2
        let p = Poly::new(vec![0.25, -1.0, 1.0]);
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn no_roots() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(p.roots_in(0.0, 1.0).is_empty());
    }

    #[test]
    fn endpoint_root() {
        let p = Poly::new(vec![0.0, 1.0]); // t
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn sublevel_of_linear() {
        // |2Nt| <= b  ->  [0, b/(2N)]
        let n = 100.0;
        let p = Poly::new(vec![0.0, 2.0 * n]);
        let s = p.sublevel_set(0.0, 1.0, 5.0);
        assert_eq!(s.len(), 1);
        assert!((s[0].0 - 0.0).abs() < 1e-10);
        assert!((s[0].1 - 5.0 / (2.0 * n)).abs() < 1e-9);
    }

    #[test]
    fn sublevel_whole_interval() {
        let p = Poly::new(vec![0.5, 0.0, 1.0]);
        let s = p.sublevel_set(0.0, 1.0, 10.0);
        assert_eq!(s, vec![(0.0, 1.0)]);
    }

    #[test]
    fn sublevel_empty() {
        let p = Poly::new(vec![5.0]);
        assert!(p.sublevel_set(0.0, 1.0, 1.0).is_empty());
    }

    #[test]
    fn sublevel_two_components() {
        // |t^2 - 0.25| <= 0.1 around t = 0.5 plus nothing else in [0,1]
        // use p = (t-0.2)(t-0.8) which dips below 0 between the roots
        let p = Poly::new(vec![0.16, -1.0, 1.0]);
        let s = p.sublevel_set(0.0, 1.0, 0.02);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn abs_bound_dominates() {
        let p = Poly::new(vec![1.0, -3.0, 2.0, 0.5]);
        let bound = p.abs_bound(0.2, 0.9);
        for i in 0..=100 {
            let t = 0.2 + 0.7 * i as f64 / 100.0;
            assert!(p.eval(t).abs() <= bound + 1e-12);
        }
    }
}
