//! Exact Fourier coefficients of the discriminant form
//! `Δ(z) = q ∏_{n≥1} (1 - q^n)^{24} = Σ τ(n) q^n` and their normalization
//! `a(n) = τ(n) n^{-11/2}`.
//!
//! The 24th power is expanded as the 8th power of the sparse series
//! `∏ (1 - q^n)^3 = Σ_{j≥0} (-1)^j (2j + 1) q^{j(j+1)/2}` (Jacobi), so each of
//! the seven multiplications costs `O(N^{3/2})` instead of `O(N^2)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Weight of the discriminant form.
pub const WEIGHT: u32 = 12;

/// Largest table the builder accepts.
pub const MAX_TABLE_LEN: usize = 1_000_000;

/// `τ(1..=n_max)` together with the normalized `a(n)`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    tau: Vec<i128>,
    normalized: Vec<f64>,
}

/// Nonzero terms `(exponent, coefficient)` of `∏ (1 - q^n)^3` up to `degree`.
pub fn eta_cubed_terms(degree: usize) -> Vec<(usize, i128)> {
    let mut terms = Vec::new();
    let mut j = 0usize;
    loop {
        let e = j * (j + 1) / 2;
        if e > degree {
            break;
        }
        let c = (2 * j + 1) as i128;
        terms.push((e, if j % 2 == 0 { c } else { -c }));
        j += 1;
    }
    terms
}

impl CoefficientTable {
    /// Expands `q ∏ (1 - q^n)^{24}` exactly through `q^{n_max}`.
    pub fn build(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        if n_max > MAX_TABLE_LEN {
            return Err(Error::invalid("n_max must not exceed 10^6"));
        }
        // coefficient of q^n in Δ is the coefficient of q^{n-1} in the product
        let degree = n_max - 1;
        let sparse = eta_cubed_terms(degree);
        let mut power = alloc::vec![0i128; degree + 1];
        for &(e, c) in &sparse {
            power[e] = c;
        }
        let mut next = alloc::vec![0i128; degree + 1];
        for _ in 1..8 {
            next.iter_mut().for_each(|v| *v = 0);
            for &(shift, c) in &sparse {
                for (i, src) in power[..=degree - shift].iter().enumerate() {
                    let dst = &mut next[i + shift];
                    *dst = src
                        .checked_mul(c)
                        .and_then(|p| dst.checked_add(p))
                        .ok_or(Error::Overflow { degree: i + shift })?;
                }
            }
            core::mem::swap(&mut power, &mut next);
        }
        Self::from_tau(power)
    }

    /// Wraps precomputed `τ(1..=len)` values, for example from a cache file.
    pub fn from_tau(tau: Vec<i128>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::invalid("coefficient table must not be empty"));
        }
        let normalized = tau.iter().enumerate().map(|(i, &t)| normalize(t, i as u64 + 1)).collect();
        Ok(CoefficientTable { tau, normalized })
    }

    pub fn n_max(&self) -> usize {
        self.tau.len()
    }

    pub fn kappa(&self) -> u32 {
        WEIGHT
    }

    /// `τ(1), τ(2), ...`
    pub fn tau_values(&self) -> &[i128] {
        &self.tau
    }

    /// `a(1), a(2), ...`
    pub fn normalized_values(&self) -> &[f64] {
        &self.normalized
    }

    pub fn tau(&self, n: usize) -> Result<i128> {
        self.check_index(n)?;
        Ok(self.tau[n - 1])
    }

    /// `a(n) = τ(n) / n^{11/2}`.
    pub fn normalized_coeff(&self, n: usize) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.normalized[n - 1])
    }

    /// Unchecked `a(n)` for hot loops; `n` must be in `1..=n_max`.
    #[inline]
    pub(crate) fn a(&self, n: u64) -> f64 {
        self.normalized[n as usize - 1]
    }

    /// `x^{-1} Σ_{n≤x} |a(n)|^2`.
    pub fn rankin_average(&self, x: f64) -> Result<f64> {
        if !(x >= 1.0) || x > self.n_max() as f64 {
            return Err(Error::OutOfRange { requested: x, n_max: self.n_max() });
        }
        let last = libm::floor(x) as usize;
        let acc: CompensatedSum = self.normalized[..last].iter().map(|a| a * a).collect();
        Ok(acc.value() / x)
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max() {
            return Err(Error::OutOfRange { requested: n as f64, n_max: self.n_max() });
        }
        Ok(())
    }
}

/// `τ / (n^5 √n)`: `n^5` is formed exactly in 128 bits, so only the two
/// conversions, one root and two divisions round.
fn normalize(tau: i128, n: u64) -> f64 {
    let n5 = (n as u128).pow(5);
    (tau as f64 / n5 as f64) / libm::sqrt(n as f64)
}

/// Number of positive divisors of `n`.
pub fn divisor_count(n: u64) -> u64 {
    let mut count = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    count
}
