//! Oscillatory integrals `∫ w(x) x^{1/2} e(φ(x)) dx` with
//! `φ(x) = 2(√(n T₁(x)) ± √(m T₂(x)))/k`, `T_i(x) ∈ {x, x + T}`, and the
//! counting of resonant pairs where `φ'` can vanish.
//!
//! The opposite outer sign `e(-φ)` is the complex conjugate, since `w` and
//! `x^{1/2}` are real.

use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric;
use crate::quad::{self, PanelOptions};
use crate::smoothweight::BumpWeight;

pub const DEFAULT_PANEL_CAP: usize = 1 << 22;
const MAX_DEPTH: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignPattern {
    /// `√(n T₁) + √(m T₂)`
    Sum,
    /// `√(n T₁) - √(m T₂)`
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shift {
    /// `T_i(x) = x`
    Base,
    /// `T_i(x) = x + T`
    Shifted,
}

/// Which of the two frequencies sees `x + T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShiftPattern {
    pub first: Shift,
    pub second: Shift,
}

impl ShiftPattern {
    pub const ALL: [ShiftPattern; 4] = [
        ShiftPattern { first: Shift::Base, second: Shift::Base },
        ShiftPattern { first: Shift::Shifted, second: Shift::Base },
        ShiftPattern { first: Shift::Base, second: Shift::Shifted },
        ShiftPattern { first: Shift::Shifted, second: Shift::Shifted },
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscIntegralSpec {
    pub weight: BumpWeight,
    pub k: u64,
    pub n: u64,
    pub m: u64,
    pub t: f64,
    pub sign: SignPattern,
    pub shifts: ShiftPattern,
}

impl fmt::Display for OscIntegralSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s, e) = self.weight.support();
        write!(
            f,
            "oscillatory integral [n={}, m={}, k={}, T={}, {:?}, {:?}/{:?}] on [{s}, {e}]",
            self.n, self.m, self.k, self.t, self.sign, self.shifts.first, self.shifts.second
        )
    }
}

impl OscIntegralSpec {
    pub fn new(
        weight: BumpWeight,
        k: u64,
        n: u64,
        m: u64,
        t: f64,
        sign: SignPattern,
        shifts: ShiftPattern,
    ) -> Result<Self> {
        if k == 0 || n == 0 || m == 0 {
            return Err(Error::invalid("k, n and m must be positive"));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("shift T must be non-negative"));
        }
        if weight.start() <= 0.0 {
            return Err(Error::invalid("support must lie in x > 0"));
        }
        Ok(OscIntegralSpec { weight, k, n, m, t, sign, shifts })
    }

    fn offsets(&self) -> (f64, f64) {
        let off = |s: Shift| if s == Shift::Shifted { self.t } else { 0.0 };
        (off(self.shifts.first), off(self.shifts.second))
    }

    fn signed_m(&self) -> f64 {
        match self.sign {
            SignPattern::Sum => 1.0,
            SignPattern::Difference => -1.0,
        }
    }

    /// `φ(x)` in turns.
    pub fn phase(&self, x: f64) -> f64 {
        let (a, b) = self.offsets();
        let p = numeric::sqrt_nx_over_k(self.n, x + a, self.k);
        let mut q = numeric::sqrt_nx_over_k(self.m, x + b, self.k);
        if self.sign == SignPattern::Difference {
            q.hi = -q.hi;
            q.lo = -q.lo;
        }
        p.add(q).scale_pow2(2.0).fract()
    }

    /// `φ'(x)` in turns per unit length.
    pub fn phase_derivative(&self, x: f64) -> f64 {
        let (a, b) = self.offsets();
        let kf = self.k as f64;
        let p = libm::sqrt(self.n as f64 / (x + a)) / kf;
        let q = libm::sqrt(self.m as f64 / (x + b)) / kf;
        p + self.signed_m() * q
    }

    /// Zero of `φ'` on the real line, if any (difference pattern only).
    pub fn stationary_point(&self) -> Option<f64> {
        if self.sign == SignPattern::Sum || self.n == self.m {
            return None;
        }
        let (a, b) = self.offsets();
        let (n, m) = (self.n as f64, self.m as f64);
        let x = (m * a - n * b) / (n - m);
        (x > 0.0).then_some(x)
    }

    /// Interior extremum of `φ'` (difference pattern with unequal offsets).
    fn derivative_critical_point(&self) -> Option<f64> {
        let (a, b) = self.offsets();
        if self.sign == SignPattern::Sum || a == b {
            return None;
        }
        let r = libm::cbrt(self.m as f64 / self.n as f64);
        if r == 1.0 {
            return None;
        }
        Some((r * a - b) / (1.0 - r))
    }

    fn derivative_samples(&self) -> impl Iterator<Item = f64> + '_ {
        let (s, e) = self.weight.support();
        let inside = |x: &f64| *x > s && *x < e;
        [Some(s), Some(e), self.derivative_critical_point().filter(inside)]
            .into_iter()
            .flatten()
            .map(|x| self.phase_derivative(x))
    }

    /// `max |φ'|` over the support.
    pub fn max_abs_phase_derivative(&self) -> f64 {
        self.derivative_samples().fold(0.0, |acc, d| acc.max(libm::fabs(d)))
    }

    /// `min |φ'|` over the support; zero when a stationary point lies inside.
    pub fn min_abs_phase_derivative(&self) -> f64 {
        let (s, e) = self.weight.support();
        if self.stationary_point().is_some_and(|x| x >= s && x <= e) {
            return 0.0;
        }
        self.derivative_samples().fold(f64::INFINITY, |acc, d| acc.min(libm::fabs(d)))
    }

    /// Shortest local wavelength `1 / max |φ'|` (infinite for a constant phase).
    pub fn min_wavelength(&self) -> f64 {
        let d = self.max_abs_phase_derivative();
        if d > 0.0 { 1.0 / d } else { f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscOptions {
    /// Panels are `min(Δ/16, λ/8) / density` long before refinement.
    pub density: f64,
    pub cap: usize,
}

impl Default for OscOptions {
    fn default() -> Self {
        OscOptions { density: 1.0, cap: DEFAULT_PANEL_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscIntegral {
    pub value: Complex64,
    /// `∫ w(x) x^{1/2} dx`, the size of the integrand.
    pub abs_integral: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// `∫ w(x) x^{1/2} e(φ(x)) dx` with absolute error target
/// `tolerance · Δ · √(M + Δ)`.
pub fn integrate(spec: &OscIntegralSpec, tolerance: f64) -> Result<Complex64> {
    integrate_with(spec, tolerance, &OscOptions::default()).map(|r| r.value)
}

pub fn integrate_with(spec: &OscIntegralSpec, tolerance: f64, opts: &OscOptions) -> Result<OscIntegral> {
    if !(tolerance > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    if !(opts.density > 0.0) {
        return Err(Error::invalid("panel density must be positive"));
    }
    let w = &spec.weight;
    let (s, e) = w.support();
    let (p0, p1) = w.plateau();
    let delta = w.length();
    let max_panel = (delta / 16.0).min(spec.min_wavelength() / 8.0) / opts.density;
    let panel_opts = PanelOptions {
        max_panel,
        abs_tol: tolerance * delta * libm::sqrt(e),
        cap: opts.cap,
        max_depth: MAX_DEPTH,
    };
    let breaks = [s, p0, p1, e];
    let r = quad::integrate_panels(&breaks, &panel_opts, |x| {
        let amp = w.eval(x) * libm::sqrt(x);
        numeric::e_turns(spec.phase(x)) * amp
    })
    .map_err(|panels| Error::ResourceLimit { what: alloc::format!("{spec}"), panels, cap: opts.cap })?;
    Ok(OscIntegral { value: r.value, abs_integral: r.abs_integral, error_estimate: r.error_estimate, panels: r.panels })
}

/// Solves `√n/√(x+T) = √m/√x`, i.e. `x = mT/(n - m)`, and returns it when it
/// lies in `[M, M + Δ]`.
pub fn stationary_locus(n: u64, m: u64, t: f64, big_m: f64, delta: f64) -> Option<f64> {
    if n <= m || !(t > 0.0) {
        return None;
    }
    let x = m as f64 * t / (n - m) as f64;
    (x >= big_m && x <= big_m + delta).then_some(x)
}

/// `[m(1 + T/(M+Δ)) - c, m(1 + T/M) + c]` and the integers `n > m` inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantBand {
    pub lower: f64,
    pub upper: f64,
    /// Half-width `c`.
    pub margin: f64,
    pub first: u64,
    /// `first - 1` when the band holds no integer above `m`.
    pub last: u64,
}

impl ResonantBand {
    pub fn is_empty(&self) -> bool {
        self.first > self.last
    }

    pub fn len(&self) -> u64 {
        (self.last + 1).saturating_sub(self.first)
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.first && n <= self.last
    }

    /// Length of the core interval `I_m` without the margins.
    pub fn core_length(&self) -> f64 {
        self.upper - self.lower - 2.0 * self.margin
    }
}

/// Resonant band with margin `c = M^{1/2+ε} k √m / Δ`.
pub fn resonant_band(m: u64, t: f64, big_m: f64, delta: f64, k: u64, eps: f64) -> ResonantBand {
    resonant_band_scaled(m, t, big_m, delta, k, eps, 1.0)
}

/// As [`resonant_band`] with the margin multiplied by `multiplier`.
pub fn resonant_band_scaled(
    m: u64,
    t: f64,
    big_m: f64,
    delta: f64,
    k: u64,
    eps: f64,
    multiplier: f64,
) -> ResonantBand {
    let mf = m as f64;
    let c = multiplier * libm::pow(big_m, 0.5 + eps) * k as f64 * libm::sqrt(mf) / delta;
    let lower = mf * (1.0 + t / (big_m + delta)) - c;
    let upper = mf * (1.0 + t / big_m) + c;
    let first = (libm::ceil(lower).max(0.0) as u64).max(m + 1);
    let top = libm::floor(upper);
    let last = if top < first as f64 { first - 1 } else { top as u64 };
    ResonantBand { lower, upper, margin: c, first, last }
}
