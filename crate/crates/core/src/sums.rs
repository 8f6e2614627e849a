//! Direct evaluation of `Σ a(n) e(hn/k)` over short windows and initial
//! segments, and the truncated Voronoi series
//!
//! ```text
//! (π√2)^{-1} x^{1/4} k^{1/2} Σ_{M1<n≤M2} a(n) e(-h̄n/k) n^{-3/4} cos(4π√(nx)/k - π/4)
//! ```
//!
//! All sums run in ascending `n` with compensated accumulation, so results do
//! not depend on the caller's threading.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::cuspforms::CoefficientTable;
use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedComplex};

/// The additive character `n ↦ e(hn/k)` for coprime `h`, `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTwist {
    h: u64,
    k: u64,
    h_bar: u64,
    roots: Vec<Complex64>,
}

impl RationalTwist {
    pub fn new(h: u64, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("denominator k must be positive"));
        }
        if numeric::gcd(h, k) != 1 {
            return Err(Error::invalid(alloc::format!("h = {h} and k = {k} are not coprime")));
        }
        let h_bar = if k == 1 { 0 } else { mod_inverse(h % k, k) };
        Ok(RationalTwist { h, k, h_bar, roots: roots_of_unity(k) })
    }

    /// The trivial twist `e(0) = 1`.
    pub fn untwisted() -> Self {
        RationalTwist { h: 0, k: 1, h_bar: 0, roots: roots_of_unity(1) }
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// Inverse of `h` modulo `k`, 0 when `k = 1`.
    pub fn h_bar(&self) -> u64 {
        self.h_bar
    }

    /// `e(j/k)` for any integer `j`.
    #[inline]
    pub fn root(&self, j: i64) -> Complex64 {
        self.roots[j.rem_euclid(self.k as i64) as usize]
    }

    /// `e(hn/k)`
    #[inline]
    pub fn twist(&self, n: u64) -> Complex64 {
        self.roots[(((self.h % self.k) as u128 * n as u128) % self.k as u128) as usize]
    }

    /// `e(-h̄n/k)`, the character on the dual side of the Voronoi formula.
    #[inline]
    pub fn dual_twist(&self, n: u64) -> Complex64 {
        let j = ((self.h_bar as u128 * n as u128) % self.k as u128) as u64;
        self.roots[((self.k - j) % self.k) as usize]
    }
}

/// `e(j/k)` for `j < k`, with `roots[k - j]` set to the exact conjugate of `roots[j]`.
fn roots_of_unity(k: u64) -> Vec<Complex64> {
    let k = k as usize;
    let mut roots = alloc::vec![Complex64::new(1.0, 0.0); k];
    for j in 1..=k / 2 {
        let z = numeric::e_turns(j as f64 / k as f64);
        roots[j] = z;
        roots[k - j] = z.conj();
    }
    if k % 2 == 0 && k > 0 {
        roots[k / 2] = Complex64::new(-1.0, 0.0);
    }
    roots
}

fn mod_inverse(h: u64, k: u64) -> u64 {
    let (mut r0, mut r1) = (k as i128, h as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(k as i128) as u64
}

/// A short sum together with the integers it ranged over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSum {
    pub value: Complex64,
    pub first_n: u64,
    /// `first_n - 1` for an empty window.
    pub last_n: u64,
}

impl WindowSum {
    pub fn is_empty(&self) -> bool {
        self.first_n > self.last_n
    }

    pub fn len(&self) -> u64 {
        (self.last_n + 1).saturating_sub(self.first_n)
    }
}

/// `Σ_{x≤n≤x+T} a(n) e(hn/k)`, both endpoints inclusive.
pub fn short_sum(table: &CoefficientTable, twist: &RationalTwist, x: f64, t: f64) -> Result<WindowSum> {
    if !(x >= 1.0) {
        return Err(Error::invalid("window start must be at least 1"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("window length must be non-negative"));
    }
    let end = x + t;
    if end > table.n_max() as f64 {
        return Err(Error::OutOfRange { requested: end, n_max: table.n_max() });
    }
    let first = libm::ceil(x) as u64;
    let last = libm::floor(end) as u64;
    if first > last {
        return Ok(WindowSum { value: Complex64::new(0.0, 0.0), first_n: first, last_n: first - 1 });
    }
    Ok(WindowSum { value: twisted_range(table, twist, first, last), first_n: first, last_n: last })
}

/// `Σ_{n≤x} a(n) e(hn/k)`.
pub fn long_sum(table: &CoefficientTable, twist: &RationalTwist, x: f64) -> Result<Complex64> {
    if !(x >= 1.0) || x > table.n_max() as f64 {
        return Err(Error::OutOfRange { requested: x, n_max: table.n_max() });
    }
    Ok(twisted_range(table, twist, 1, libm::floor(x) as u64))
}

fn twisted_range(table: &CoefficientTable, twist: &RationalTwist, first: u64, last: u64) -> Complex64 {
    let mut acc = CompensatedComplex::new();
    for n in first..=last {
        acc.add(twist.twist(n) * table.a(n));
    }
    acc.value()
}

/// Truncated Voronoi main term `S(x, 0, N)`.
pub fn voronoi_truncated(table: &CoefficientTable, twist: &RationalTwist, x: f64, n_trunc: f64) -> Result<Complex64> {
    s_window(table, twist, x, 0.0, n_trunc)
}

/// `S(x, M1, M2)`: the Voronoi main term restricted to `M1 < n ≤ M2`.
pub fn s_window(table: &CoefficientTable, twist: &RationalTwist, x: f64, m1: f64, m2: f64) -> Result<Complex64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::invalid("Voronoi abscissa must be at least 1"));
    }
    if !(m1 >= 0.0 && m1 <= m2) {
        return Err(Error::invalid("need 0 <= M1 <= M2"));
    }
    if m2 > table.n_max() as f64 {
        return Err(Error::OutOfRange { requested: m2, n_max: table.n_max() });
    }
    let first = libm::floor(m1) as u64 + 1;
    let last = libm::floor(m2) as u64;
    if first > last {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = twist.k();
    let mut acc = CompensatedComplex::new();
    for n in first..=last {
        let amp = table.a(n) / libm::pow(n as f64, 0.75);
        let c = numeric::cos_turns(voronoi_phase_turns(n, x, k) - 0.125);
        acc.add(twist.dual_twist(n) * (amp * c));
    }
    Ok(acc.value() * voronoi_prefactor(x, k))
}

/// `(π√2)^{-1} x^{1/4} k^{1/2}`
pub fn voronoi_prefactor(x: f64, k: u64) -> f64 {
    libm::sqrt(libm::sqrt(x)) * libm::sqrt(k as f64) / (PI * SQRT_2)
}

/// `2√(nx)/k mod 1`: the Voronoi phase `4π√(nx)/k` in turns, reduced. The
/// root is formed in double-double, so the reduced phase is accurate to a few
/// ulps of 1 for any `nx` below `2^{100}`.
pub fn voronoi_phase_turns(n: u64, x: f64, k: u64) -> f64 {
    numeric::sqrt_nx_over_k(n, x, k).scale_pow2(2.0).fract()
}
