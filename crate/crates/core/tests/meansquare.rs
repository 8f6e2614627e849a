use std::f64::consts::PI;
use std::sync::OnceLock;

use cuspsum_core::meansquare::{
    corollary_bound, diagonal_identity_check, error_budget, lhs_exact, main_term_s, run_experiment, split_point,
    MainTerm, Regime,
};
use cuspsum_core::{CoefficientTable, ExperimentConfig, RationalTwist};
use proptest::prelude::*;

fn table() -> &'static CoefficientTable {
    static T: OnceLock<CoefficientTable> = OnceLock::new();
    T.get_or_init(|| CoefficientTable::build(20_000).unwrap())
}

fn config(m: f64, delta: f64, t: f64, h: u64, k: u64) -> ExperimentConfig {
    ExperimentConfig::builder(m, 0.6, RationalTwist::new(h, k).unwrap())
        .t(t)
        .delta(delta)
        .build()
        .unwrap()
}

/// Midpoint sum over `cells` equal cells with the window sum recomputed
/// naively at every sample.
fn riemann_lhs(table: &CoefficientTable, cfg: &ExperimentConfig, cells: usize) -> f64 {
    let w = cfg.weight();
    let (h, k) = (cfg.h(), cfg.k());
    let step = cfg.delta / cells as f64;
    let mut total = 0.0;
    for i in 0..cells {
        let x = cfg.m + (i as f64 + 0.5) * step;
        let (mut re, mut im) = (0.0, 0.0);
        let mut n = x.ceil() as u64;
        while n as f64 <= x + cfg.t {
            let a = table.normalized_coeff(n as usize).unwrap();
            let angle = 2.0 * PI * ((h * n) % k) as f64 / k as f64;
            re += a * angle.cos();
            im += a * angle.sin();
            n += 1;
        }
        total += w.eval(x) * (re * re + im * im);
    }
    total * step
}

#[test]
fn lhs_matches_dense_oracle() {
    // cell edges fall on every breakpoint of ℤ ∪ (ℤ - T)
    for &(m, delta, t, h, k) in &[(100.0, 50.0, 10.0, 1, 1), (300.0, 20.0, 2.5, 2, 5), (500.0, 100.0, 37.5, 3, 4)] {
        let cfg = config(m, delta, t, h, k);
        let exact = lhs_exact(table(), &cfg).unwrap();
        let oracle = riemann_lhs(table(), &cfg, 100_000);
        let rel = (exact.value - oracle).abs() / oracle;
        assert!(rel <= 1e-6, "M = {m}: {} vs {oracle} (relative {rel})", exact.value);
    }
}

#[test]
fn breakpoint_count() {
    // integer M and T: one piece per unit length
    let cfg = config(100.0, 50.0, 10.0, 1, 1);
    assert_eq!(lhs_exact(table(), &cfg).unwrap().pieces, 50);
    let cfg = config(300.0, 20.0, 2.5, 2, 5);
    assert_eq!(lhs_exact(table(), &cfg).unwrap().pieces, 40);
}

#[test]
fn doubling_coefficients_quadruples_lhs() {
    let doubled = CoefficientTable::from_tau(table().tau_values().iter().map(|t| 2 * t).collect()).unwrap();
    for cfg in [config(100.0, 50.0, 10.0, 1, 1), config(1000.0, 300.0, 63.2, 2, 3)] {
        let base = lhs_exact(table(), &cfg).unwrap().value;
        assert_eq!(lhs_exact(&doubled, &cfg).unwrap().value, 4.0 * base);
    }
}

#[test]
fn main_term_ignores_numerator() {
    let base = ExperimentConfig::builder(1e4, 0.6, RationalTwist::new(1, 7).unwrap()).build().unwrap();
    let s1 = main_term_s(table(), &base).unwrap();
    assert!(s1 > 0.0);
    for h in 2..7 {
        let mut cfg = base.clone();
        cfg.twist = RationalTwist::new(h, 7).unwrap();
        assert_eq!(main_term_s(table(), &cfg).unwrap(), s1);
    }
}

#[test]
fn first_main_term_integral_refines() {
    let cfg = config(1e4, 1e3, 1e3, 1, 1);
    let term = MainTerm::new(table(), &cfg).unwrap();
    let coarse = term.integral(1, 1.0).unwrap();
    let fine = term.integral(1, 10.0).unwrap();
    assert!((coarse - fine).abs() <= 1e-6 * fine, "{coarse} vs {fine}");
}

#[test]
fn main_term_sum_order_is_reproducible() {
    let cfg = ExperimentConfig::builder(1e4, 0.6, RationalTwist::new(1, 2).unwrap()).build().unwrap();
    let term = MainTerm::new(table(), &cfg).unwrap();
    let terms: Vec<f64> = (1..=term.last_index()).map(|n| term.term(n).unwrap()).collect();
    assert!(terms.iter().all(|&v| v >= 0.0));
    assert_eq!(MainTerm::sum_terms(terms), term.total().unwrap());
}

#[test]
fn split_point_examples() {
    let cfg = config(1e4, 1e2, 1e3, 1, 1);
    assert_eq!(split_point(&cfg), 100.0);
    let cfg = config(1e4, 1e3, 1e2, 1, 1);
    assert_eq!(split_point(&cfg), 1e3);
    let cfg = config(1e4, 500.0, 500.0, 1, 1);
    assert_eq!(split_point(&cfg), 1e8 / 25e4);
}

#[test]
fn identity_examples() {
    assert_eq!(diagonal_identity_check(5, 1234.5, 0.0, 3), 0.0);
    assert!(diagonal_identity_check(7, 1e3, 50.0, 3) < 1e-10);
}

#[test]
fn budget_examples() {
    let cfg = config(1e4, 1e3, 1e3, 1, 1);
    let zero = error_budget(&cfg, 0.0);
    assert_eq!(zero.cross, 0.0);
    let me = 1e4f64.powf(0.05);
    assert!((zero.off_diagonal - 1e4 * me).abs() <= 1e-9 * zero.off_diagonal);
    assert!((zero.window - 1e3 * me * 1e3f64.sqrt()).abs() <= 1e-9 * zero.window);
    assert_eq!(zero.total, zero.off_diagonal + zero.window);
}

#[test]
fn corollary_examples() {
    let cfg = ExperimentConfig::builder(1e4, 0.6, RationalTwist::untwisted()).build().unwrap();
    let b = corollary_bound(&cfg);
    assert!((b.lower_threshold - 10f64.powf(0.4)).abs() < 1e-9);
    assert_eq!(b.regime, Regime::SmallModulus);
    assert_eq!(b.selected(), b.delta_root_m);

    let cfg = ExperimentConfig::builder(1e4, 0.6, RationalTwist::new(1, 5).unwrap()).build().unwrap();
    let b = corollary_bound(&cfg);
    assert_eq!(b.regime, Regime::Intermediate);
    assert_eq!(b.selected(), b.delta_t);

    // k exactly at T^{1/2}: both neighbouring regimes are reported
    let cfg = ExperimentConfig::builder(1e4, 0.6, RationalTwist::new(1, 16).unwrap()).t(256.0).build().unwrap();
    let b = corollary_bound(&cfg);
    assert_eq!(b.upper_threshold, 16.0);
    assert_eq!(b.regime, Regime::Intermediate);
    assert_eq!(b.boundary_with, Some(Regime::LargeModulus));
    assert_eq!(b.combined, b.delta_t.min(b.delta_root_m) + 256.0 * 1e4 * 1e4f64.powf(0.05));
}

#[test]
fn report_fields() {
    let cfg = ExperimentConfig::builder(2000.0, 0.7, RationalTwist::new(1, 3).unwrap()).build().unwrap();
    let r = run_experiment(table(), &cfg).unwrap();
    assert!(r.lhs >= 0.0 && r.main_term_s >= 0.0);
    assert_eq!(r.ratio, Some(r.lhs / r.main_term_s));
    assert_eq!(r.split_point, split_point(&cfg));
    assert_eq!(r, run_experiment(table(), &cfg).unwrap());
}

fn coprime_twist() -> impl Strategy<Value = (u64, u64)> {
    (1u64..6, 1u64..6).prop_filter_map("coprime", |(h, k)| {
        let h = h % k;
        let h = if k == 1 { 1 } else { h };
        (h != 0 && gcd(h, k) == 1).then_some((h, k))
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn identity_holds(n in 1u64..1_000_000, x in 1.0f64..1e6, t in 0.0f64..1e4, k in 1u64..100) {
        prop_assert!(diagonal_identity_check(n, x, t, k) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn split_point_is_the_min(m in 100.0f64..1e6, d in 0.51f64..0.99, delta in 1.0f64..1e5) {
        let cfg = ExperimentConfig::builder(m, d, RationalTwist::untwisted()).delta(delta).build().unwrap();
        let t = cfg.t;
        let want = (m * m / (t * t)).min(m * m / (t * delta));
        prop_assert!((split_point(&cfg) - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn budget_monotone_in_modulus(m in 1e3f64..1e5, s in 0.0f64..1e6, k in 1u64..8) {
        let cfg1 = ExperimentConfig::builder(m, 0.6, RationalTwist::new(1, k).unwrap()).delta(500.0).build().unwrap();
        let cfg2 = ExperimentConfig::builder(m, 0.6, RationalTwist::new(1, k + 1).unwrap()).delta(500.0).build().unwrap();
        prop_assert!(error_budget(&cfg2, s).total >= error_budget(&cfg1, s).total);
    }

    #[test]
    fn nonnegative(m in 50.0f64..3000.0, d in 0.55f64..0.95, (h, k) in coprime_twist()) {
        let cfg = ExperimentConfig::builder(m, d, RationalTwist::new(h, k).unwrap()).build();
        prop_assume!(cfg.is_ok());
        let cfg = cfg.unwrap();
        prop_assume!(cfg.required_table_len() <= table().n_max());
        let r = run_experiment(table(), &cfg).unwrap();
        prop_assert!(r.lhs >= 0.0);
        prop_assert!(r.main_term_s >= 0.0);
    }
}
