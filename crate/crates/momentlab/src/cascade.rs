//! Random Cantor cascades on `[0,1]`.
//!
//! The cascade keeps every level of the hierarchy `E_0 ⊇ E_1 ⊇ …` together
//! with its density `β_j`, stored as an exact rational so that mass
//! conservation is an identity rather than a floating-point approximation.
//! Each level is a sorted list of integer offsets `a` meaning the interval
//! `[a/M_j, (a+1)/M_j]` survives.
//!
//! Children are drawn by random mod-`m` translation of a fixed digit set:
//! for every surviving parent interval, one uniform draw from a stream
//! keyed by `(seed, level, parent offset)` shifts the base digits. The
//! construction is therefore deterministic in the parameters and
//! independent of evaluation order.

use crate::error::{Error, Result};
use crate::stream::Stream;
use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<BigInt>;

/// Parameters of a cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeParams {
    pub d: usize,
    pub m: u64,
    pub alpha: f64,
    pub levels: usize,
    pub seed: u64,
    pub digit_set: Option<Vec<u64>>,
}

impl CascadeParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidCascadeParams(msg));
        if !(2..=6).contains(&self.d) {
            return fail(format!("d = {} out of 2..=6", self.d));
        }
        if self.m < 2 {
            return fail(format!("m = {} must be >= 2", self.m));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha = {} out of (0, 1]", self.alpha));
        }
        if self.levels < 1 {
            return fail("levels must be >= 1".into());
        }
        if (self.m as f64).powi(self.levels as i32) > 2f64.powi(62) {
            return fail(format!(
                "m^levels = {}^{} overflows the offset range",
                self.m, self.levels
            ));
        }
        if let Some(s) = &self.digit_set {
            if s.is_empty() || s.len() > self.m as usize {
                return fail(format!("digit set size {} out of 1..=m", s.len()));
            }
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s.len() {
                return fail("digit set has duplicates".into());
            }
            if sorted.last().copied().unwrap_or(0) >= self.m {
                return fail("digit set entry out of 0..m".into());
            }
        }
        Ok(())
    }

    /// Base digit set: explicit override, or `|S| = round(m^alpha)` evenly
    /// spaced digits `round(i·m/|S|) mod m`.
    pub fn base_digits(&self) -> Result<Vec<u64>> {
        if let Some(s) = &self.digit_set {
            let mut s = s.clone();
            s.sort_unstable();
            return Ok(s);
        }
        let count = ((self.m as f64).powf(self.alpha).round() as u64).clamp(1, self.m);
        let mut digits: Vec<u64> = (0..count)
            .map(|i| ((i as f64 * self.m as f64 / count as f64).round() as u64) % self.m)
            .collect();
        digits.sort_unstable();
        let before = digits.len();
        digits.dedup();
        if digits.len() != before {
            return Err(Error::InvalidCascadeParams(
                "evenly spaced digit set collided; pass digit_set explicitly".into(),
            ));
        }
        Ok(digits)
    }

    /// Effective dimension `log|S| / log m` of the realized cascade.
    pub fn alpha_eff(&self) -> Result<f64> {
        let s = self.base_digits()?.len() as f64;
        Ok(s.ln() / (self.m as f64).ln())
    }
}

/// One level of the hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeLevel {
    pub j: usize,
    pub m_j: u64,
    pub beta: Rational,
    pub intervals: Vec<u64>,
}

impl CascadeLevel {
    /// `β_j · |intervals| / M_j`, exact.
    pub fn mass(&self) -> Rational {
        &self.beta * Rational::new(BigInt::from(self.intervals.len()), BigInt::from(self.m_j))
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta.to_f64().unwrap_or(f64::NAN)
    }

    /// Interval endpoints `[a/M_j, (a+1)/M_j]` in order.
    pub fn interval_bounds(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let m = self.m_j as f64;
        self.intervals
            .iter()
            .map(move |&a| (a as f64 / m, (a + 1) as f64 / m))
    }

    /// `β_j ·` length of `E_j ∩ (t−r, t+r)`.
    pub fn ball_mass(&self, t: f64, r: f64) -> f64 {
        debug_assert!(r > 0.0);
        let (lo, hi) = (t - r, t + r);
        let m = self.m_j as f64;
        // candidate offsets via binary search on the sorted list
        let first = self.intervals.partition_point(|&a| ((a + 1) as f64 / m) <= lo);
        let mut length = 0.0;
        for &a in &self.intervals[first..] {
            let (s, e) = (a as f64 / m, (a + 1) as f64 / m);
            if s >= hi {
                break;
            }
            length += (e.min(hi) - s.max(lo)).max(0.0);
        }
        self.beta_f64() * length
    }

    /// Minimal number of closed intervals of length `2·eps` covering `E_j`,
    /// by the optimal greedy sweep.
    pub fn covering_number(&self, eps: f64) -> usize {
        debug_assert!(eps > 0.0 && eps <= 1.0);
        let m = self.m_j as f64;
        let mut count = 0usize;
        let mut covered_to = f64::NEG_INFINITY;
        for &a in &self.intervals {
            let (s, e) = (a as f64 / m, (a + 1) as f64 / m);
            while covered_to < e {
                // each ball starts at the leftmost uncovered point of E_j
                count += 1;
                covered_to = covered_to.max(s) + 2.0 * eps;
            }
        }
        count
    }
}

/// The whole hierarchy `μ_0, …, μ_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorMeasure {
    pub params: CascadeParams,
    pub levels: Vec<CascadeLevel>,
}

fn draw_children(
    parent: u64,
    level: usize,
    seed: u64,
    m: u64,
    base_digits: &[u64],
    out: &mut Vec<u64>,
) {
    let mut stream = Stream::keyed(seed, &[level as u64, parent]);
    let shift = stream.uniform_u64(m);
    let mut digits: Vec<u64> = base_digits.iter().map(|&s| (s + shift) % m).collect();
    digits.sort_unstable();
    out.extend(digits.into_iter().map(|d| m * parent + d));
}

/// Build the cascade from its parameters.
pub fn build_cascade(params: &CascadeParams) -> Result<CantorMeasure> {
    params.validate()?;
    let base = params.base_digits()?;
    let branch = BigInt::from(base.len());
    let m_big = BigInt::from(params.m);

    let mut levels = vec![CascadeLevel {
        j: 0,
        m_j: 1,
        beta: Rational::one(),
        intervals: vec![0],
    }];
    let mut m_j: u64 = 1;
    let mut beta_num = BigInt::one();
    let mut beta_den = BigInt::one();
    for j in 1..=params.levels {
        m_j *= params.m;
        beta_num *= &m_big;
        beta_den *= &branch;
        let parent = &levels[j - 1];
        let mut intervals = Vec::with_capacity(parent.intervals.len() * base.len());
        for &a in &parent.intervals {
            draw_children(a, j, params.seed, params.m, &base, &mut intervals);
        }
        levels.push(CascadeLevel {
            j,
            m_j,
            beta: Rational::new(beta_num.clone(), beta_den.clone()),
            intervals,
        });
    }
    Ok(CantorMeasure {
        params: params.clone(),
        levels,
    })
}

impl CantorMeasure {
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, j: usize) -> Result<&CascadeLevel> {
        self.levels.get(j).ok_or(Error::LevelOutOfRange {
            level: j,
            max: self.top_level(),
        })
    }

    /// Redraw level `j+1` conditioned on level `j` with a fresh seed,
    /// leaving the measure unmodified.
    pub fn resample_children(&self, j: usize, seed2: u64) -> Result<CascadeLevel> {
        if j >= self.top_level() {
            return Err(Error::LevelOutOfRange {
                level: j,
                max: self.top_level().saturating_sub(1),
            });
        }
        let base = self.params.base_digits()?;
        let parent = &self.levels[j];
        let child_template = &self.levels[j + 1];
        let mut intervals = Vec::with_capacity(parent.intervals.len() * base.len());
        for &a in &parent.intervals {
            draw_children(a, j + 1, seed2, self.params.m, &base, &mut intervals);
        }
        Ok(CascadeLevel {
            j: j + 1,
            m_j: child_template.m_j,
            beta: child_template.beta.clone(),
            intervals,
        })
    }

    /// Text serialization: header `d m alpha levels seed`, then one line per
    /// level `j M_j beta_num beta_den k offsets…`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} {:.16e} {} {}\n",
            self.params.d, self.params.m, self.params.alpha, self.params.levels, self.params.seed
        ));
        for level in &self.levels {
            out.push_str(&format!(
                "{} {} {} {} {}",
                level.j,
                level.m_j,
                level.beta.numer(),
                level.beta.denom(),
                level.intervals.len()
            ));
            for &a in &level.intervals {
                out.push(' ');
                out.push_str(&a.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<CantorMeasure> {
        let parse_err = |msg: &str| Error::CascadeParse(msg.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| parse_err("empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 {
            return Err(parse_err("header must have 5 fields"));
        }
        let params = CascadeParams {
            d: h[0].parse().map_err(|_| parse_err("bad d"))?,
            m: h[1].parse().map_err(|_| parse_err("bad m"))?,
            alpha: h[2].parse().map_err(|_| parse_err("bad alpha"))?,
            levels: h[3].parse().map_err(|_| parse_err("bad levels"))?,
            seed: h[4].parse().map_err(|_| parse_err("bad seed"))?,
            digit_set: None,
        };
        let mut levels = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 5 {
                return Err(parse_err("level line too short"));
            }
            let j: usize = f[0].parse().map_err(|_| parse_err("bad level index"))?;
            let m_j: u64 = f[1].parse().map_err(|_| parse_err("bad M_j"))?;
            let num: BigInt = f[2].parse().map_err(|_| parse_err("bad beta numerator"))?;
            let den: BigInt = f[3].parse().map_err(|_| parse_err("bad beta denominator"))?;
            if den.is_zero() || den.is_negative() {
                return Err(parse_err("beta denominator must be positive"));
            }
            let k: usize = f[4].parse().map_err(|_| parse_err("bad interval count"))?;
            if f.len() != 5 + k {
                return Err(parse_err("interval count mismatch"));
            }
            let mut intervals = Vec::with_capacity(k);
            for s in &f[5..] {
                intervals.push(s.parse().map_err(|_| parse_err("bad offset"))?);
            }
            if !intervals.windows(2).all(|w| w[0] < w[1]) {
                return Err(parse_err("offsets not strictly increasing"));
            }
            if intervals.iter().any(|&a| a >= m_j) {
                return Err(parse_err("offset out of range"));
            }
            levels.push(CascadeLevel {
                j,
                m_j,
                beta: Rational::new(num, den),
                intervals,
            });
        }
        if levels.len() != params.levels + 1 {
            return Err(parse_err("level count does not match header"));
        }
        Ok(CantorMeasure { params, levels })
    }
}
