//! Mean squares of short exponential sums twisted by `e(hn/k)` over the
//! normalized Fourier coefficients of the weight-12 discriminant form.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It provides:
//!
//! - [`cuspforms`]: exact `τ(n)` and normalized `a(n) = τ(n) n^{-11/2}`,
//! - [`smoothweight`]: the compactly supported `C^∞` weight `w`,
//! - [`sums`]: direct short and long twisted sums and the truncated Voronoi series,
//! - [`oscint`]: the oscillatory integrals `∫ w(x) x^{1/2} e(φ(x)) dx` and their
//!   stationary loci,
//! - [`meansquare`]: the piecewise-exact weighted mean square, the diagonal main
//!   term, the error budget and the regime bounds.
//!
//! IO, caching, timing and the command line live in the `cuspsum` crate.

#![no_std]

extern crate alloc;

pub mod cuspforms;
pub mod error;
pub mod fit;
pub mod meansquare;
pub mod numeric;
pub mod oscint;
pub mod quad;
pub mod smoothweight;
pub mod sums;

pub use num_complex::Complex64;

#[doc(inline)]
pub use self::{
    cuspforms::CoefficientTable,
    error::{Error, Result},
    meansquare::{ExperimentConfig, MeanSquareReport},
    oscint::OscIntegralSpec,
    smoothweight::BumpWeight,
    sums::{RationalTwist, WindowSum},
};
