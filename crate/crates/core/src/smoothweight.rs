//! The `C^∞` weight supported on `[M, M + Δ]`, equal to 1 on
//! `[M + Δ', M + Δ - Δ']`.
//!
//! Each ramp is the transition `g(t) = ψ(t) / (ψ(t) + ψ(1 - t))` with
//! `ψ(t) = exp(-1/t)` for `t > 0`. Its derivatives satisfy
//! `max |g'| = 2` and `max |g''| < 9.85`, so `|w^{(j)}| <= C_j (2ρ)^{-j} Δ^{-j}`
//! with `C_1 = 4`, `C_2 = 40` for ramp fraction `ρ = Δ'/Δ`.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

pub const DEFAULT_RAMP_FRACTION: f64 = 0.25;

/// Bound constants `C_1`, `C_2` at ramp fraction 1/2.
pub const DERIVATIVE_CONSTANTS: [f64; 2] = [4.0, 40.0];

/// Each ramp is integrated on this many equal sub-panels.
const RAMP_PANELS: usize = 16;
const RAMP_ORDER: usize = 10;

const CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpWeight {
    start: f64,
    length: f64,
    ramp: f64,
}

impl BumpWeight {
    /// Weight on `[m, m + delta]` with ramps of length `ramp_fraction * delta`.
    pub fn new(m: f64, delta: f64, ramp_fraction: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::invalid("weight start must be finite"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("support length Δ must be positive"));
        }
        if !(ramp_fraction > 0.0 && ramp_fraction <= 0.5) {
            return Err(Error::invalid("ramp fraction must lie in (0, 1/2]"));
        }
        Ok(BumpWeight { start: m, length: delta, ramp: ramp_fraction * delta })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// Δ
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Δ'
    pub fn ramp(&self) -> f64 {
        self.ramp
    }

    pub fn ramp_fraction(&self) -> f64 {
        self.ramp / self.length
    }

    pub fn support(&self) -> (f64, f64) {
        (self.start, self.start + self.length)
    }

    /// Interval on which the weight is identically 1.
    pub fn plateau(&self) -> (f64, f64) {
        (self.start + self.ramp, self.start + self.length - self.ramp)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let end = self.start + self.length;
        if x <= self.start || x >= end {
            return 0.0;
        }
        let left = transition((x - self.start) / self.ramp);
        let right = transition((end - x) / self.ramp);
        left.min(right)
    }

    /// `∫_a^b w(x) dx`, exact on the plateau and by composite Gauss–Legendre
    /// on the ramps.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let rule = GaussLegendre::new(RAMP_ORDER);
        self.integral_with(&rule, a, b)
    }

    pub(crate) fn integral_with(&self, rule: &GaussLegendre, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral_with(rule, b, a);
        }
        let (s, e) = self.support();
        let (p0, p1) = self.plateau();
        let a = a.max(s);
        let b = b.min(e);
        if !(b > a) {
            return 0.0;
        }
        let mut total = 0.0;
        total += self.ramp_integral(rule, s, p0, a, b);
        let (pa, pb) = (a.max(p0), b.min(p1));
        if pb > pa {
            total += pb - pa;
        }
        total += self.ramp_integral(rule, p1, e, a, b);
        total
    }

    fn ramp_integral(&self, rule: &GaussLegendre, r0: f64, r1: f64, a: f64, b: f64) -> f64 {
        let lo = a.max(r0);
        let hi = b.min(r1);
        if !(hi > lo) {
            return 0.0;
        }
        let h = (r1 - r0) / RAMP_PANELS as f64;
        let first = (libm::floor((lo - r0) / h) as usize).min(RAMP_PANELS - 1);
        let mut total = 0.0;
        for i in first..RAMP_PANELS {
            let c0 = r0 + h * i as f64;
            let c1 = if i + 1 == RAMP_PANELS { r1 } else { r0 + h * (i + 1) as f64 };
            if c0 >= hi {
                break;
            }
            let (x0, x1) = (c0.max(lo), c1.min(hi));
            if x1 > x0 {
                total += rule.integrate(x0, x1, |x| self.eval(x));
            }
        }
        total
    }
}

/// `g(t)`: 0 for `t <= 0`, 1 for `t >= 1`, smooth in between.
pub fn transition(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let t = t.clamp(CLAMP, 1.0 - CLAMP);
    let p = libm::exp(-1.0 / t);
    let q = libm::exp(-1.0 / (1.0 - t));
    p / (p + q)
}
