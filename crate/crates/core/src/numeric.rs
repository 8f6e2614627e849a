//! Compensated accumulation and double-double helpers for phase evaluation.

use num_complex::Complex64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        CompensatedSum { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if libm::fabs(self.sum) >= libm::fabs(v) {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of complex values, real and imaginary parts tracked separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplex {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplex {
    pub const fn new() -> Self {
        CompensatedComplex { re: CompensatedSum::new(), im: CompensatedSum::new() }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn sub(&mut self, z: Complex64) {
        self.re.add(-z.re);
        self.im.add(-z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    #[inline]
    fn two_sum(a: f64, b: f64) -> DoubleDouble {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        DoubleDouble { hi: s, lo: err }
    }

    #[inline]
    pub fn add(self, other: DoubleDouble) -> DoubleDouble {
        let s = Self::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        Self::two_sum(s.hi, lo)
    }

    /// `sqrt(a * b)` for finite non-negative `a`, `b`, carrying the rounding
    /// error of both the product and the root into `lo`.
    #[inline]
    pub fn sqrt_product(a: f64, b: f64) -> DoubleDouble {
        let p = a * b;
        if p == 0.0 {
            return DoubleDouble { hi: 0.0, lo: 0.0 };
        }
        let p_err = libm::fma(a, b, -p);
        let r = libm::sqrt(p);
        let resid = libm::fma(-r, r, p) + p_err;
        Self::two_sum(r, resid / (2.0 * r))
    }

    /// Division by a positive integer.
    #[inline]
    pub fn div_int(self, k: u64) -> DoubleDouble {
        let kf = k as f64;
        let q = self.hi / kf;
        let rem = libm::fma(-q, kf, self.hi) + self.lo;
        Self::two_sum(q, rem / kf)
    }

    /// Multiplication by a power of two (exact).
    #[inline]
    pub fn scale_pow2(self, s: f64) -> DoubleDouble {
        DoubleDouble { hi: self.hi * s, lo: self.lo * s }
    }

    /// Fractional part in `[0, 1)`, as a plain double.
    #[inline]
    pub fn fract(self) -> f64 {
        let f = self.hi - libm::floor(self.hi);
        let r = f + self.lo;
        let r = r - libm::floor(r);
        // a tiny negative `lo` can round up to exactly 1
        if r >= 1.0 { 0.0 } else { r }
    }
}

/// `sqrt(n x) / k` in double-double.
#[inline]
pub fn sqrt_nx_over_k(n: u64, x: f64, k: u64) -> DoubleDouble {
    DoubleDouble::sqrt_product(n as f64, x).div_int(k)
}

/// `cos(2π t)` after reducing `t` modulo 1.
#[inline]
pub fn cos_turns(t: f64) -> f64 {
    libm::cos(core::f64::consts::TAU * (t - libm::round(t)))
}

/// `sin(2π t)` after reducing `t` modulo 1.
#[inline]
pub fn sin_turns(t: f64) -> f64 {
    libm::sin(core::f64::consts::TAU * (t - libm::round(t)))
}

/// `e(t) = exp(2πi t)` after reducing `t` modulo 1.
#[inline]
pub fn e_turns(t: f64) -> Complex64 {
    let r = core::f64::consts::TAU * (t - libm::round(t));
    Complex64::new(libm::cos(r), libm::sin(r))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let acc: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn sqrt_product_is_exact_on_squares() {
        let r = DoubleDouble::sqrt_product(49.0, 81.0);
        assert_eq!(r.hi, 63.0);
        assert_eq!(r.lo, 0.0);
    }

    #[test]
    fn fract_handles_negative_low_part() {
        let v = DoubleDouble { hi: 3.0, lo: -1e-20 };
        let f = v.fract();
        assert!((0.0..1.0).contains(&f));
        assert!((cos_turns(f) - 1.0).abs() < 1e-15);
        let w = DoubleDouble { hi: 3.25, lo: -1e-17 };
        assert!((w.fract() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn turns_reduction() {
        assert!((cos_turns(1e6 + 0.25)).abs() < 1e-9);
        assert!((sin_turns(-3.75) - 1.0).abs() < 1e-12);
    }
}
