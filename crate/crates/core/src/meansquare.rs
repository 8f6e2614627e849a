//! Both sides of the mean-square asymptotic
//!
//! ```text
//! ∫_M^{M+Δ} w(x) |Σ_{x≤n≤x+T} a(n) e(hn/k)|² dx = S + O(k²M^{1+ε} + ΔM^ε T^{1/2} k) + O(√(S·(...)))
//! ```
//!
//! The left side is evaluated exactly up to the smooth quadrature of `w`: the
//! inner sum only changes where `x` or `x + T` crosses an integer, so the
//! support is cut at those points and `w` alone is integrated on each piece.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::time::Duration;

use crate::cuspforms::CoefficientTable;
use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedComplex, CompensatedSum, DoubleDouble};
use crate::oscint::DEFAULT_PANEL_CAP;
use crate::quad::{self, GaussLegendre, PanelOptions};
use crate::smoothweight::{BumpWeight, DEFAULT_RAMP_FRACTION};
use crate::sums::RationalTwist;

pub const DEFAULT_EPS: f64 = 0.05;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// `k` may not exceed `M^{MODULUS_LIMIT_EXP}`.
pub const MODULUS_LIMIT_EXP: f64 = 0.45;
/// Above `M^{MODULUS_WARN_EXP}` the configuration carries a warning.
pub const MODULUS_WARN_EXP: f64 = 0.4;

/// Regimes closer than this factor to a threshold are flagged as boundary cases.
pub const REGIME_TIE_FACTOR: f64 = 2.0;

const PIECE_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warning {
    /// `k > M^{0.4}`: close to the admissible limit.
    LargeModulus,
}

/// Parameters of one run. Build with [`ExperimentConfig::builder`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: f64,
    pub delta_exp: f64,
    pub t: f64,
    pub twist: RationalTwist,
    pub eps: f64,
    /// Support length Δ.
    pub delta: f64,
    pub ramp_fraction: f64,
    pub tolerance: f64,
    /// Multiplier standing in for every implied constant.
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentBuilder {
    m: f64,
    delta_exp: f64,
    twist: RationalTwist,
    t: Option<f64>,
    eps: Option<f64>,
    delta: Option<f64>,
    ramp_fraction: Option<f64>,
    tolerance: Option<f64>,
    constant: Option<f64>,
}

impl ExperimentBuilder {
    /// Overrides `T = M^δ`.
    pub fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    /// Overrides `Δ = min(k² M^{1/2+ε}, M)`.
    pub fn delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn ramp_fraction(mut self, ramp: f64) -> Self {
        self.ramp_fraction = Some(ramp);
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    pub fn build(self) -> Result<ExperimentConfig> {
        let m = self.m;
        if !(m >= 1.0) || !m.is_finite() {
            return Err(Error::invalid("M must be a finite number >= 1"));
        }
        if !(self.delta_exp > 0.5 && self.delta_exp < 1.0) {
            return Err(Error::invalid("δ must satisfy 1/2 < δ < 1"));
        }
        let eps = self.eps.unwrap_or(DEFAULT_EPS);
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid("ε must be positive"));
        }
        let k = self.twist.k() as f64;
        if k > libm::pow(m, MODULUS_LIMIT_EXP) {
            return Err(Error::invalid(alloc::format!("k = {k} exceeds M^{MODULUS_LIMIT_EXP}")));
        }
        let t = self.t.unwrap_or_else(|| libm::pow(m, self.delta_exp));
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid("T must be positive"));
        }
        let delta = self.delta.unwrap_or_else(|| (k * k * libm::pow(m, 0.5 + eps)).min(m));
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid("Δ must be positive"));
        }
        let ramp_fraction = self.ramp_fraction.unwrap_or(DEFAULT_RAMP_FRACTION);
        BumpWeight::new(m, delta, ramp_fraction)?;
        let tolerance = self.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance > 0.0) {
            return Err(Error::invalid("quadrature tolerance must be positive"));
        }
        let constant = self.constant.unwrap_or(1.0);
        if !(constant > 0.0) {
            return Err(Error::invalid("implied-constant multiplier must be positive"));
        }
        Ok(ExperimentConfig {
            m,
            delta_exp: self.delta_exp,
            t,
            twist: self.twist,
            eps,
            delta,
            ramp_fraction,
            tolerance,
            constant,
        })
    }
}

impl ExperimentConfig {
    pub fn builder(m: f64, delta_exp: f64, twist: RationalTwist) -> ExperimentBuilder {
        ExperimentBuilder {
            m,
            delta_exp,
            twist,
            t: None,
            eps: None,
            delta: None,
            ramp_fraction: None,
            tolerance: None,
            constant: None,
        }
    }

    pub fn k(&self) -> u64 {
        self.twist.k()
    }

    pub fn h(&self) -> u64 {
        self.twist.h()
    }

    pub fn weight(&self) -> BumpWeight {
        BumpWeight::new(self.m, self.delta, self.ramp_fraction).expect("validated at build time")
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let mut w = Vec::new();
        if self.k() as f64 > libm::pow(self.m, MODULUS_WARN_EXP) {
            w.push(Warning::LargeModulus);
        }
        w
    }

    /// Largest `n` any computation on this configuration touches.
    pub fn required_table_len(&self) -> usize {
        let window = libm::floor(self.m + self.delta + self.t) as usize;
        let diag = libm::floor(split_point(self)) as usize;
        window.max(diag).max(1)
    }

    fn check_window_range(&self, table: &CoefficientTable) -> Result<()> {
        check_len(table, libm::floor(self.m + self.delta + self.t) as usize)
    }

    fn check_diagonal_range(&self, table: &CoefficientTable) -> Result<()> {
        check_len(table, libm::floor(split_point(self)) as usize)
    }
}

fn check_len(table: &CoefficientTable, need: usize) -> Result<()> {
    if need > table.n_max() {
        return Err(Error::OutOfRange { requested: need as f64, n_max: table.n_max() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhsValue {
    pub value: f64,
    /// Number of pieces of positive length the support was cut into.
    pub pieces: usize,
}

/// `∫ w(x) |Σ_{x≤n≤x+T} a(n) e(hn/k)|² dx` over the support of `w`.
pub fn lhs_exact(table: &CoefficientTable, cfg: &ExperimentConfig) -> Result<LhsValue> {
    cfg.check_window_range(table)?;
    Ok(lhs_piecewise(table, &cfg.twist, &cfg.weight(), cfg.t))
}

/// Sliding-window sweep over the breakpoints `ℤ ∪ (ℤ - T)` inside the support.
fn lhs_piecewise(table: &CoefficientTable, twist: &RationalTwist, w: &BumpWeight, t: f64) -> LhsValue {
    let rule = GaussLegendre::new(PIECE_ORDER);
    let (start, end) = w.support();
    // window [first, last] for x just above `start`
    let mut first = libm::floor(start) as u64 + 1;
    let mut last = libm::floor(start + t) as u64;
    let mut window = CompensatedComplex::new();
    for n in first..=last {
        window.add(twist.twist(n) * table.a(n));
    }
    let mut next_add = last + 1;
    let mut pos = start;
    let mut total = CompensatedSum::new();
    let mut pieces = 0;
    loop {
        let remove_at = first as f64;
        let add_at = next_add as f64 - t;
        let next = remove_at.min(add_at).min(end);
        if next > pos {
            let value = window.value().norm_sqr();
            if value != 0.0 {
                total.add(value * w.integral_with(&rule, pos, next));
            }
            pieces += 1;
        }
        if next >= end {
            break;
        }
        pos = next;
        // on ties the entering term goes first, so every index joins before it leaves
        if add_at <= remove_at {
            last = next_add;
            debug_assert!(last >= first);
            window.add(twist.twist(last) * table.a(last));
            next_add += 1;
        } else {
            if first <= last {
                window.sub(twist.twist(first) * table.a(first));
            }
            first += 1;
        }
    }
    LhsValue { value: total.value(), pieces }
}

/// `M'`: `M²T^{-2}` when `T >= Δ`, otherwise `M²T^{-1}Δ^{-1}`; this is
/// `min(M²T^{-2}, M²T^{-1}Δ^{-1})` in either case.
pub fn split_point(cfg: &ExperimentConfig) -> f64 {
    let (m, t, d) = (cfg.m, cfg.t, cfg.delta);
    if t >= d { m * m / (t * t) } else { m * m / (t * d) }
}

/// The diagonal main term `S` and its per-`n` pieces.
#[derive(Debug, Clone)]
pub struct MainTerm<'a> {
    table: &'a CoefficientTable,
    cfg: &'a ExperimentConfig,
    weight: BumpWeight,
    cap: usize,
}

impl<'a> MainTerm<'a> {
    pub fn new(table: &'a CoefficientTable, cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.check_diagonal_range(table)?;
        Ok(MainTerm { table, cfg, weight: cfg.weight(), cap: DEFAULT_PANEL_CAP })
    }

    pub fn with_panel_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Largest `n` in the diagonal sum (0 when the sum is empty).
    pub fn last_index(&self) -> u64 {
        let top = split_point(self.cfg);
        if top < 1.0 { 0 } else { libm::floor(top) as u64 }
    }

    /// `∫ w(x) x^{1/2} sin²(2π(√(n(x+T)) - √(nx))/k) sin²(2π(√(n(x+T)) + √(nx))/k - π/4) dx`
    /// with panels no longer than `min(Δ/16, λ/8) / density`, `λ = k√M/√n`.
    pub fn integral(&self, n: u64, density: f64) -> Result<f64> {
        let cfg = self.cfg;
        let w = &self.weight;
        let (s, e) = w.support();
        let (p0, p1) = w.plateau();
        let k = cfg.k();
        let kf = k as f64;
        let t = cfg.t;
        let root_n = libm::sqrt(n as f64);
        let wavelength = kf * libm::sqrt(cfg.m) / root_n;
        let opts = PanelOptions {
            max_panel: (cfg.delta / 16.0).min(wavelength / 8.0) / density,
            abs_tol: cfg.tolerance * cfg.delta * libm::sqrt(e),
            cap: self.cap,
            max_depth: 24,
        };
        let f = |x: f64| {
            let wx = w.eval(x);
            if wx == 0.0 {
                return 0.0;
            }
            let (r1, r0) = (libm::sqrt(x + t), libm::sqrt(x));
            // difference of roots without cancellation
            let gap = root_n * t / ((r1 + r0) * kf);
            let s1 = numeric::sin_turns(gap);
            let sum = numeric::sqrt_nx_over_k(n, x + t, k).add(numeric::sqrt_nx_over_k(n, x, k));
            let s2 = numeric::sin_turns(sum.fract() - 0.125);
            wx * r0 * (s1 * s1) * (s2 * s2)
        };
        quad::integrate_panels(&[s, p0, p1, e], &opts, f)
            .map(|r| r.value)
            .map_err(|panels| Error::ResourceLimit {
                what: alloc::format!("main-term integral n={n} (M={}, Δ={}, k={k})", cfg.m, cfg.delta),
                panels,
                cap: self.cap,
            })
    }

    /// `2k/π² |a(n)|² n^{-3/2} ∫ ...`
    pub fn term(&self, n: u64) -> Result<f64> {
        let a = self.table.a(n);
        let coeff = 2.0 * self.cfg.k() as f64 / (PI * PI) * a * a / libm::pow(n as f64, 1.5);
        Ok(coeff * self.integral(n, 1.0)?)
    }

    /// Ascending-order compensated sum of per-`n` terms; summing the same
    /// terms computed elsewhere in this order reproduces it bit for bit.
    pub fn sum_terms<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
        terms.into_iter().collect::<CompensatedSum>().value()
    }

    pub fn total(&self) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for n in 1..=self.last_index() {
            acc.add(self.term(n)?);
        }
        Ok(acc.value())
    }
}

/// Main term `S`.
pub fn main_term_s(table: &CoefficientTable, cfg: &ExperimentConfig) -> Result<f64> {
    MainTerm::new(table, cfg)?.total()
}

/// `|(cos A - cos B)² - 4 sin²((A-B)/2) sin²((A+B)/2)|` with
/// `A = 4π√(n(x+T))/k - π/4`, `B = 4π√(nx)/k - π/4`. Both angles are reduced
/// modulo `2π` first; the identity is invariant under that reduction.
pub fn diagonal_identity_check(n: u64, x: f64, t: f64, k: u64) -> f64 {
    let reduce = |y: f64| {
        let turns = numeric::sqrt_nx_over_k(n, y, k).scale_pow2(2.0).add(DoubleDouble { hi: -0.125, lo: 0.0 });
        2.0 * PI * turns.fract()
    };
    let a = reduce(x + t);
    let b = if t == 0.0 { a } else { reduce(x) };
    let lhs = {
        let d = libm::cos(a) - libm::cos(b);
        d * d
    };
    let s1 = libm::sin(0.5 * (a - b));
    let s2 = libm::sin(0.5 * (a + b));
    let rhs = 4.0 * s1 * s1 * s2 * s2;
    libm::fabs(lhs - rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    /// `k² M^{1+ε}`
    pub off_diagonal: f64,
    /// `Δ M^ε T^{1/2} k`
    pub window: f64,
    /// `√(|S| (k² M^{1+ε} + Δ M^ε T^{1/2} k))`
    pub cross: f64,
    pub total: f64,
}

pub fn error_budget(cfg: &ExperimentConfig, s: f64) -> ErrorBudget {
    let c = cfg.constant;
    let k = cfg.k() as f64;
    let me = libm::pow(cfg.m, cfg.eps);
    let off_diagonal = c * k * k * cfg.m * me;
    let window = c * cfg.delta * me * libm::sqrt(cfg.t) * k;
    let cross = c * libm::sqrt(libm::fabs(s) * (off_diagonal + window));
    ErrorBudget { off_diagonal, window, cross, total: off_diagonal + window + cross }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `k ≪ TM^{-1/2}`: bound `ΔM^{1/2+ε}k`.
    SmallModulus,
    /// `TM^{-1/2} ≪ k ≪ T^{1/2}`: bound `ΔTM^ε`.
    Intermediate,
    /// `k ≫ T^{1/2}`: bound `ΔM^εk²`.
    LargeModulus,
}

impl Regime {
    pub fn index(self) -> u8 {
        match self {
            Regime::SmallModulus => 1,
            Regime::Intermediate => 2,
            Regime::LargeModulus => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryBounds {
    /// `Δ T M^ε`
    pub delta_t: f64,
    /// `Δ M^{1/2+ε} k`
    pub delta_root_m: f64,
    /// `Δ M^ε k²`
    pub delta_k2: f64,
    /// `min(ΔTM^ε, ΔM^{1/2+ε}k) + k²M^{1+ε}`
    pub combined: f64,
    /// `T M^{-1/2}`
    pub lower_threshold: f64,
    /// `T^{1/2}`
    pub upper_threshold: f64,
    /// Regime from strict comparison of `k` with the thresholds.
    pub regime: Regime,
    /// Adjacent regime when `k` is within [`REGIME_TIE_FACTOR`] of a threshold.
    pub boundary_with: Option<Regime>,
}

impl CorollaryBounds {
    pub fn bound(&self, regime: Regime) -> f64 {
        match regime {
            Regime::SmallModulus => self.delta_root_m,
            Regime::Intermediate => self.delta_t,
            Regime::LargeModulus => self.delta_k2,
        }
    }

    pub fn selected(&self) -> f64 {
        self.bound(self.regime)
    }
}

pub fn corollary_bound(cfg: &ExperimentConfig) -> CorollaryBounds {
    let c = cfg.constant;
    let k = cfg.k() as f64;
    let (m, t, d) = (cfg.m, cfg.t, cfg.delta);
    let me = libm::pow(m, cfg.eps);
    let delta_t = c * d * t * me;
    let delta_root_m = c * d * libm::sqrt(m) * me * k;
    let delta_k2 = c * d * me * k * k;
    let combined = delta_t.min(delta_root_m) + c * k * k * m * me;
    let lower = t / libm::sqrt(m);
    let upper = libm::sqrt(t);
    let regime = if k <= lower {
        Regime::SmallModulus
    } else if k <= upper {
        Regime::Intermediate
    } else {
        Regime::LargeModulus
    };
    let near = |thr: f64| k >= thr / REGIME_TIE_FACTOR && k <= thr * REGIME_TIE_FACTOR;
    let boundary_with = match regime {
        Regime::SmallModulus if near(lower) => Some(Regime::Intermediate),
        Regime::Intermediate if near(lower) => Some(Regime::SmallModulus),
        Regime::Intermediate if near(upper) => Some(Regime::LargeModulus),
        Regime::LargeModulus if near(upper) => Some(Regime::Intermediate),
        _ => None,
    };
    CorollaryBounds {
        delta_t,
        delta_root_m,
        delta_k2,
        combined,
        lower_threshold: lower,
        upper_threshold: upper,
        regime,
        boundary_with,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanSquareReport {
    pub config: ExperimentConfig,
    pub lhs: f64,
    pub main_term_s: f64,
    pub split_point: f64,
    pub error_budget: ErrorBudget,
    pub corollary: CorollaryBounds,
    /// `lhs / S`, absent when `S = 0`.
    pub ratio: Option<f64>,
    pub breakpoint_count: usize,
    pub warnings: Vec<Warning>,
    /// Filled in by callers that measure wall-clock time.
    pub runtime: Option<Duration>,
}

impl MeanSquareReport {
    /// Assembles a report from an already computed left side and main term.
    pub fn assemble(cfg: &ExperimentConfig, lhs: LhsValue, s: f64) -> Self {
        MeanSquareReport {
            config: cfg.clone(),
            lhs: lhs.value,
            main_term_s: s,
            split_point: split_point(cfg),
            error_budget: error_budget(cfg, s),
            corollary: corollary_bound(cfg),
            ratio: (s != 0.0).then(|| lhs.value / s),
            breakpoint_count: lhs.pieces,
            warnings: cfg.warnings(),
            runtime: None,
        }
    }

    /// `|lhs - S|`
    pub fn discrepancy(&self) -> f64 {
        libm::fabs(self.lhs - self.main_term_s)
    }
}

pub fn run_experiment(table: &CoefficientTable, cfg: &ExperimentConfig) -> Result<MeanSquareReport> {
    let lhs = lhs_exact(table, cfg)?;
    let s = main_term_s(table, cfg)?;
    Ok(MeanSquareReport::assemble(cfg, lhs, s))
}
