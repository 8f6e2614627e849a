//! Self-checks against independent oracles.

use std::f64::consts::PI;
use std::fmt;

use cuspsum_core::cuspforms::divisor_count;
use cuspsum_core::fit::loglog_slope;
use cuspsum_core::meansquare::{diagonal_identity_check, lhs_exact};
use cuspsum_core::oscint::{integrate_with, OscOptions, ShiftPattern, SignPattern};
use cuspsum_core::sums::{long_sum, voronoi_truncated};
use cuspsum_core::{BumpWeight, CoefficientTable, ExperimentConfig, OscIntegralSpec, RationalTwist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cache::TableSource;
use crate::error::CliError;

/// Residual of the truncated Voronoi series must stay below `C k M^{0.1}`;
/// the calibration maximum over the default grid is 0.74.
pub const VORONOI_CONSTANT: f64 = 1.0;
pub const VORONOI_SLOPE_LIMIT: f64 = 0.15;
pub const IDENTITY_LIMIT: f64 = 1e-10;
pub const LHS_ORACLE_RELATIVE: f64 = 1e-6;
pub const LHS_ORACLE_CELLS: usize = 100_000;
pub const OSC_SMALLNESS: f64 = 1e-4;
pub const OSC_REFINEMENT_RELATIVE: f64 = 1e-6;
pub const OSC_TOLERANCE: f64 = 1e-12;
pub const OSC_GRID_LEN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Suite {
    Tau,
    Voronoi,
    Identity,
    Oscint,
    LhsOracle,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Tau => "tau",
            Suite::Voronoi => "voronoi",
            Suite::Identity => "identity",
            Suite::Oscint => "oscint",
            Suite::LhsOracle => "lhs-oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}/{}: {}", self.suite.name(), self.name, self.detail)
    }
}

fn check(suite: Suite, name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check { suite, name: name.into(), passed, detail }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub tau_n_max: usize,
    pub voronoi_m: Vec<f64>,
    pub voronoi_k: Vec<u64>,
    pub identity_count: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tau_n_max: 100_000,
            voronoi_m: vec![5e3, 1e4, 2e4],
            voronoi_k: vec![1, 2, 3, 5],
            identity_count: 1000,
            seed: 0x5eed,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions, source: &TableSource) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::Tau => tau_suite(&source.table(opts.tau_n_max)?.table),
        Suite::Voronoi => voronoi_suite(opts, source),
        Suite::Identity => Ok(vec![identity_suite(opts.identity_count, opts.seed)]),
        Suite::Oscint => oscint_suite(),
        Suite::LhsOracle => lhs_oracle_suite(source),
    }
}

/// `q ∏_{n≤N} (1 - q^n)^{24}` one binomial factor at a time.
pub fn tau_by_expansion(n_max: usize) -> Vec<i128> {
    let mut poly = vec![0i128; n_max];
    poly[0] = 1;
    for n in 1..n_max {
        for _ in 0..24 {
            for d in (n..n_max).rev() {
                poly[d] -= poly[d - n];
            }
        }
    }
    poly
}

/// `(n - 1) τ(n) = -24 Σ_{j<n} σ(j) τ(n - j)`.
pub fn tau_by_sigma_recurrence(n_max: usize) -> Vec<i128> {
    let mut sigma = vec![0i128; n_max + 1];
    for d in 1..=n_max {
        for m in (d..=n_max).step_by(d) {
            sigma[m] += d as i128;
        }
    }
    let mut tau = vec![0i128; n_max + 1];
    if n_max >= 1 {
        tau[1] = 1;
    }
    for n in 2..=n_max {
        let s: i128 = (1..n).map(|j| sigma[j] * tau[n - j]).sum();
        tau[n] = -24 * s / (n as i128 - 1);
    }
    tau.remove(0);
    tau
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn tau_suite(table: &CoefficientTable) -> Result<Vec<Check>, CliError> {
    let s = Suite::Tau;
    let tau = table.tau_values();
    let n = tau.len();
    let mut out = Vec::new();

    let first = [1i128, -24, 252];
    let shown = &tau[..n.min(3)];
    out.push(check(s, "first-values", shown == &first[..shown.len()], format!("τ(1..=3) = {shown:?}")));

    let brute = tau_by_expansion(n.min(120));
    let series = tau_by_sigma_recurrence(n.min(600));
    let ok = tau[..brute.len()] == brute[..] && tau[..series.len()] == series[..];
    out.push(check(
        s,
        "series-oracles",
        ok,
        format!("factor-by-factor expansion to {} and divisor-sum recurrence to {}", brute.len(), series.len()),
    ));

    let at = |i: usize| tau[i - 1];
    let (mut pairs, mut bad) = (0u64, None);
    'outer: for a in 2..=n / 2 {
        for b in (a + 1)..=n / a {
            if gcd(a, b) != 1 {
                continue;
            }
            pairs += 1;
            if at(a).checked_mul(at(b)) != Some(at(a * b)) {
                bad = Some((a, b));
                break 'outer;
            }
        }
    }
    out.push(check(
        s,
        "multiplicativity",
        bad.is_none(),
        match bad {
            None => format!("τ(mn) = τ(m)τ(n) for all {pairs} coprime pairs with mn ≤ {n}"),
            Some((a, b)) => format!("fails at m = {a}, n = {b}"),
        },
    ));

    let (mut relations, mut bad) = (0u64, None);
    for p in 2..=n {
        if p * p > n {
            break;
        }
        if (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            continue;
        }
        let p11 = (p as i128).pow(11);
        let (mut prev, mut cur, mut q) = (1i128, at(p), p);
        while q <= n / p {
            q *= p;
            let next = at(p) * cur - p11 * prev;
            relations += 1;
            if next != at(q) {
                bad = Some(q);
            }
            (prev, cur) = (cur, next);
        }
    }
    out.push(check(
        s,
        "hecke-recursion",
        bad.is_none(),
        match bad {
            None => format!("τ(p^(r+1)) = τ(p)τ(p^r) - p^11 τ(p^(r-1)) for all {relations} prime powers ≤ {n}"),
            Some(q) => format!("fails at {q}"),
        },
    ));

    let mut worst = (0.0f64, 1usize);
    for i in 1..=n {
        let r = table.normalized_values()[i - 1].abs() / divisor_count(i as u64) as f64;
        if r > worst.0 {
            worst = (r, i);
        }
    }
    out.push(check(
        s,
        "deligne-bound",
        worst.0 <= 1.0 + 1e-12,
        format!("max |a(n)|/d(n) = {:.6} at n = {} for n ≤ {n}", worst.0, worst.1),
    ));
    Ok(out)
}

/// Abscissae `⌊M(1 + (j + 1/2)/50)⌋ + 1/2`, clear of the jumps of the long sum.
pub fn voronoi_samples(m: f64) -> Vec<f64> {
    (0..50).map(|j| (m * (1.0 + (j as f64 + 0.5) / 50.0)).floor() + 0.5).collect()
}

/// `max_x |Σ_{n≤x} a(n)e(n/k) - S(x, 0, M)|` over [`voronoi_samples`].
pub fn voronoi_max_residual(table: &CoefficientTable, m: f64, k: u64) -> Result<f64, CliError> {
    let tw = RationalTwist::new(1, k).map_err(CliError::from_core)?;
    let mut worst = 0.0f64;
    for x in voronoi_samples(m) {
        let direct = long_sum(table, &tw, x).map_err(CliError::from_core)?;
        let series = voronoi_truncated(table, &tw, x, m).map_err(CliError::from_core)?;
        worst = worst.max((direct - series).norm());
    }
    Ok(worst)
}

fn voronoi_suite(opts: &VerifyOptions, source: &TableSource) -> Result<Vec<Check>, CliError> {
    let s = Suite::Voronoi;
    if opts.voronoi_m.is_empty() || opts.voronoi_k.is_empty() || opts.voronoi_k.contains(&0) {
        return Err(CliError::Usage("voronoi needs at least one M and one positive k".into()));
    }
    if opts.voronoi_m.iter().any(|&m| !(m >= 1.0 && m.is_finite())) {
        return Err(CliError::Usage("voronoi M values must be at least 1".into()));
    }
    let top = opts.voronoi_m.iter().cloned().fold(0.0, f64::max);
    let table = source.table((2.0 * top) as usize + 2)?.table;
    let mut out = Vec::new();
    for &k in &opts.voronoi_k {
        let mut residuals = Vec::new();
        for &m in &opts.voronoi_m {
            let r = voronoi_max_residual(&table, m, k)?;
            let ratio = r / (k as f64 * m.powf(0.1));
            out.push(check(
                s,
                format!("residual M={m} k={k}"),
                ratio <= VORONOI_CONSTANT,
                format!("max residual {r:.6} = {ratio:.4}·k·M^0.1 (limit {VORONOI_CONSTANT})"),
            ));
            residuals.push(r);
        }
        if opts.voronoi_m.len() >= 2 {
            let slope = loglog_slope(&opts.voronoi_m, &residuals);
            out.push(check(
                s,
                format!("slope k={k}"),
                slope.is_some_and(|v| v <= VORONOI_SLOPE_LIMIT),
                format!("log-log slope of the residual in M = {} (limit {VORONOI_SLOPE_LIMIT})", fmt_opt(slope)),
            ));
        }
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("undefined".into(), |v| format!("{v:.4}"))
}

pub fn identity_suite(count: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let n = rng.gen_range(1..=1_000_000u64);
        let x = rng.gen_range(1.0..1e6);
        let t = rng.gen_range(0.0..1e4);
        let k = rng.gen_range(1..=100u64);
        worst = worst.max(diagonal_identity_check(n, x, t, k));
    }
    check(
        Suite::Identity,
        "diagonal-identity",
        worst < IDENTITY_LIMIT,
        format!("max discrepancy {worst:.3e} over {count} random (n, x, T, k) (limit {IDENTITY_LIMIT:e})"),
    )
}

/// One member of the fixed oscillatory grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub index: usize,
    pub spec: OscIntegralSpec,
    /// `min |φ'|` divided by the threshold `10 M^{0.05}/Δ`.
    pub threshold_ratio: f64,
}

/// The first 50 specs, in enumeration order, whose `min |φ'|` clears
/// `10 M^{0.05}/Δ`: `M ∈ {10^4, 4·10^4, 1.6·10^5}`, `k ∈ {1, 3}`, `T = M^{0.6}`,
/// `Δ = min(k² M^{0.55}, M)`, default ramp, pairs
/// `(n, m) ∈ {(1,4), (3,7), (10,20), (25,36), (50,51)}`, both sign patterns
/// and all shift patterns.
pub fn oscint_grid() -> Vec<GridSpec> {
    let mut out = Vec::new();
    for &big_m in &[1e4f64, 4e4, 1.6e5] {
        for &k in &[1u64, 3] {
            let t = big_m.powf(0.6);
            let delta = ((k * k) as f64 * big_m.powf(0.55)).min(big_m);
            let w = BumpWeight::new(big_m, delta, cuspsum_core::smoothweight::DEFAULT_RAMP_FRACTION)
                .expect("grid weights are valid");
            let threshold = 10.0 * big_m.powf(0.05) / delta;
            for &(n, m) in &[(1u64, 4u64), (3, 7), (10, 20), (25, 36), (50, 51)] {
                for sign in [SignPattern::Sum, SignPattern::Difference] {
                    for shifts in ShiftPattern::ALL {
                        let spec = OscIntegralSpec::new(w, k, n, m, t, sign, shifts).expect("grid specs are valid");
                        let ratio = spec.min_abs_phase_derivative() / threshold;
                        if ratio >= 1.0 {
                            out.push(GridSpec { index: out.len() + 1, spec, threshold_ratio: ratio });
                            if out.len() == OSC_GRID_LEN {
                                return out;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn oscint_suite() -> Result<Vec<Check>, CliError> {
    let s = Suite::Oscint;
    let grid = oscint_grid();
    let mut out = vec![check(s, "grid-size", grid.len() == OSC_GRID_LEN, format!("{} qualifying specs", grid.len()))];
    for g in &grid {
        let w = g.spec.weight;
        let scale = w.length() * (w.start() + w.length()).sqrt();
        let coarse = integrate_with(&g.spec, OSC_TOLERANCE, &OscOptions::default()).map_err(CliError::from_core)?;
        let fine = integrate_with(&g.spec, OSC_TOLERANCE, &OscOptions { density: 10.0, ..Default::default() })
            .map_err(CliError::from_core)?;
        let small = coarse.value.norm() / scale;
        out.push(check(
            s,
            format!("smallness #{}", g.index),
            small <= OSC_SMALLNESS,
            format!("|I| = {small:.3e}·Δ√(M+Δ) (limit {OSC_SMALLNESS:e}; min|φ'| = {:.2}× threshold) {}", g.threshold_ratio, g.spec),
        ));
        let rel = (coarse.value - fine.value).norm() / fine.value.norm();
        out.push(check(
            s,
            format!("refinement #{}", g.index),
            rel <= OSC_REFINEMENT_RELATIVE,
            format!("default vs 10× panel density differ by {rel:.3e} relative (limit {OSC_REFINEMENT_RELATIVE:e})"),
        ));
    }
    Ok(out)
}

/// `(M, Δ, T, h, k)` with `M, Δ` integers and `T` a multiple of `Δ/10^5`, so
/// every breakpoint of `ℤ ∪ (ℤ - T)` is a cell edge of the oracle grid.
pub const LHS_ORACLE_CONFIGS: [(f64, f64, f64, u64, u64); 5] = [
    (100.0, 50.0, 10.0, 1, 1),
    (250.0, 80.0, 12.5, 1, 2),
    (500.0, 100.0, 37.25, 2, 3),
    (800.0, 100.0, 100.0, 3, 4),
    (1000.0, 100.0, 63.5, 2, 5),
];

pub fn lhs_oracle_config(m: f64, delta: f64, t: f64, h: u64, k: u64) -> Result<ExperimentConfig, CliError> {
    let twist = RationalTwist::new(h, k).map_err(CliError::from_core)?;
    ExperimentConfig::builder(m, 0.6, twist).t(t).delta(delta).build().map_err(CliError::from_core)
}

/// Midpoint Riemann sum of `w(x)|Σ_{x≤n≤x+T} a(n)e(hn/k)|²` with the window
/// recomputed from scratch at every sample.
pub fn riemann_lhs(table: &CoefficientTable, cfg: &ExperimentConfig, cells: usize) -> f64 {
    let w = cfg.weight();
    let (h, k) = (cfg.h(), cfg.k());
    let step = cfg.delta / cells as f64;
    let coeffs = table.normalized_values();
    let mut total = 0.0;
    for i in 0..cells {
        let x = cfg.m + (i as f64 + 0.5) * step;
        let (mut re, mut im) = (0.0, 0.0);
        let mut n = x.ceil() as u64;
        while n as f64 <= x + cfg.t {
            let a = coeffs[n as usize - 1];
            let angle = 2.0 * PI * ((h * n) % k) as f64 / k as f64;
            re += a * angle.cos();
            im += a * angle.sin();
            n += 1;
        }
        total += w.eval(x) * (re * re + im * im);
    }
    total * step
}

fn lhs_oracle_suite(source: &TableSource) -> Result<Vec<Check>, CliError> {
    let table = source.table(1200)?.table;
    let mut out = Vec::new();
    for (m, delta, t, h, k) in LHS_ORACLE_CONFIGS {
        let cfg = lhs_oracle_config(m, delta, t, h, k)?;
        let exact = lhs_exact(&table, &cfg).map_err(CliError::from_core)?;
        let oracle = riemann_lhs(&table, &cfg, LHS_ORACLE_CELLS);
        let rel = (exact.value - oracle).abs() / oracle.abs();
        out.push(check(
            Suite::LhsOracle,
            format!("M={m} Δ={delta} T={t} h={h} k={k}"),
            rel <= LHS_ORACLE_RELATIVE,
            format!(
                "piecewise {:.10e} ({} pieces) vs {LHS_ORACLE_CELLS}-cell sum {oracle:.10e}: relative {rel:.2e}",
                exact.value, exact.pieces
            ),
        ));
    }
    Ok(out)
}
