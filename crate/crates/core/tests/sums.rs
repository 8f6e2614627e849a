use std::f64::consts::PI;
use std::sync::OnceLock;

use cuspsum_core::sums::{long_sum, s_window, short_sum, voronoi_phase_turns, voronoi_truncated};
use cuspsum_core::{CoefficientTable, Complex64, RationalTwist};
use proptest::prelude::*;

const N: usize = 100_000;

fn table() -> &'static CoefficientTable {
    static T: OnceLock<CoefficientTable> = OnceLock::new();
    T.get_or_init(|| CoefficientTable::build(N).unwrap())
}

fn a(n: u64) -> f64 {
    table().normalized_coeff(n as usize).unwrap()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[test]
fn spec_examples() {
    let t = table();
    let one = RationalTwist::untwisted();
    assert!(short_sum(t, &one, 10.5, 0.4).unwrap().is_empty());
    assert_eq!(short_sum(t, &one, 1.0, 0.0).unwrap().value, Complex64::new(1.0, 0.0));
    let half = RationalTwist::new(1, 2).unwrap();
    let v = short_sum(t, &half, 2.0, 1.0).unwrap().value;
    assert!((v - Complex64::new(a(2) - a(3), 0.0)).norm() < 1e-15);
    assert_eq!(long_sum(t, &one, 1.0).unwrap(), Complex64::new(1.0, 0.0));
    let three = long_sum(t, &one, 3.0).unwrap();
    assert!((three.re - (a(1) + a(2) + a(3))).abs() < 1e-15);
    assert_eq!(voronoi_truncated(t, &one, 100.0, 0.0).unwrap(), Complex64::new(0.0, 0.0));
    assert_eq!(s_window(t, &one, 100.0, 7.0, 7.0).unwrap(), Complex64::new(0.0, 0.0));
    let tw = RationalTwist::new(3, 5).unwrap();
    assert_eq!(tw.h_bar(), 2);
    assert!(RationalTwist::new(2, 4).is_err());
}

#[test]
fn phase_of_first_term_at_sixteenth() {
    // 4π·(1/4) - π/4 = 3π/4
    for k in 1..=7u64 {
        let x = (k * k) as f64 / 16.0;
        let turns = voronoi_phase_turns(1, x, k) - 0.125;
        assert!((2.0 * PI * turns - 0.75 * PI).abs() < 1e-12);
    }
}

/// Naive `S(x, M1, M2)` with the inverse found by scanning residues.
fn s_window_naive(x: f64, m1: u64, m2: u64, h: u64, k: u64) -> Complex64 {
    let h_bar = (0..k).find(|&b| (h * b) % k == 1 % k).unwrap();
    let mut total = Complex64::new(0.0, 0.0);
    for n in (m1 + 1)..=m2 {
        let r = (k - (h_bar * n) % k) % k;
        let angle = 2.0 * PI * r as f64 / k as f64;
        let arg = 4.0 * PI * ((n as f64) * x).sqrt() / k as f64 - PI / 4.0;
        let amp = a(n) * (n as f64).powf(-0.75) * arg.cos();
        total += Complex64::new(angle.cos(), angle.sin()) * amp;
    }
    total * x.powf(0.25) * (k as f64).sqrt() / (PI * 2f64.sqrt())
}

#[test]
fn s_window_matches_naive_loop() {
    let tw = RationalTwist::new(1, 3).unwrap();
    let got = s_window(table(), &tw, 5000.0, 10.0, 100.0).unwrap();
    let want = s_window_naive(5000.0, 10, 100, 1, 3);
    assert!((got - want).norm() <= 1e-12 * want.norm(), "{got} vs {want}");
}

fn isqrt(v: u128) -> u128 {
    let mut r = (v as f64).sqrt() as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// `2√(n p / 4)/k mod 1 = √(np)/k mod 1`, exact to `2^{-40}/k`.
fn phase_oracle(n: u64, p: u64, k: u64) -> f64 {
    const S: u32 = 40;
    let r = isqrt(((n as u128) * (p as u128)) << (2 * S));
    let modulus = (k as u128) << S;
    (r % modulus) as f64 / modulus as f64
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[test]
fn phase_contract_at_large_arguments() {
    // the extreme corner nx = 10^12
    for (n, p, k) in [(1_000_000u64, 4_000_000u64, 1u64), (999_983, 4_000_011, 7), (250_000, 16_000_000, 3)] {
        let x = p as f64 / 4.0;
        let got = voronoi_phase_turns(n, x, k);
        let err = circular_distance(got, phase_oracle(n, p, k)) * 2.0 * PI;
        assert!(err <= 1e-6, "n = {n}, x = {x}: {err} rad");
    }
}

#[test]
fn long_sum_grows_like_root() {
    let t = table();
    let one = RationalTwist::untwisted();
    let mut x = 1000.5;
    while x <= 1e5 {
        let r = long_sum(t, &one, x).unwrap().norm() / x.sqrt();
        // scanning maximum over this range is 0.102
        assert!(r <= 0.15, "x = {x}: {r}");
        x += 7.0;
    }
}

#[test]
fn voronoi_residual_at_ten_thousand() {
    let m = 1e4f64;
    for k in 1..=5u64 {
        let tw = RationalTwist::new(1, k).unwrap();
        for j in 0..50 {
            let x = (m * (1.0 + (j as f64 + 0.5) / 50.0)).floor() + 0.5;
            let r = (long_sum(table(), &tw, x).unwrap() - voronoi_truncated(table(), &tw, x, m).unwrap()).norm();
            // calibration maximum 1.13 (k = 2)
            assert!(r <= 1.5 * k as f64 * m.powf(0.05), "k = {k}, x = {x}: {r}");
        }
    }
}

fn twist_strategy() -> impl Strategy<Value = (u64, u64)> {
    (2u64..40, 1u64..40).prop_filter_map("coprime", |(k, h)| {
        let h = h % k;
        (h != 0 && gcd(h, k) == 1).then_some((h, k))
    })
}

proptest! {
    #[test]
    fn conjugation_symmetry((h, k) in twist_strategy(), x in 1.0f64..9e4, len in 0.0f64..500.0) {
        let t = table();
        let tw = RationalTwist::new(h, k).unwrap();
        let cj = RationalTwist::new(k - h, k).unwrap();
        let s1 = short_sum(t, &tw, x, len).unwrap().value;
        let s2 = short_sum(t, &cj, x, len).unwrap().value;
        prop_assert!((s1 - s2.conj()).norm() <= 1e-12);
        let l1 = long_sum(t, &tw, x).unwrap();
        let l2 = long_sum(t, &cj, x).unwrap();
        prop_assert!((l1 - l2.conj()).norm() <= 1e-12);
    }

    #[test]
    fn short_is_difference_of_long((h, k) in twist_strategy(), x in 1.0f64..9e4, len in 0.0f64..1000.0) {
        let t = table();
        let tw = RationalTwist::new(h, k).unwrap();
        let short = short_sum(t, &tw, x, len).unwrap().value;
        let below = x.ceil() - 1.0;
        let lower = if below >= 1.0 { long_sum(t, &tw, below).unwrap() } else { Complex64::new(0.0, 0.0) };
        let diff = long_sum(t, &tw, x + len).unwrap() - lower;
        prop_assert!((short - diff).norm() <= 1e-10);
    }

    #[test]
    fn s_window_additive((h, k) in twist_strategy(), x in 1.0f64..1e5, split in 0.0f64..1.0, top in 0.0f64..2e3) {
        let t = table();
        let tw = RationalTwist::new(h, k).unwrap();
        let mid = split * top;
        let left = s_window(t, &tw, x, 0.0, mid).unwrap();
        let right = s_window(t, &tw, x, mid, top).unwrap();
        let whole = s_window(t, &tw, x, 0.0, top).unwrap();
        let scale = left.norm().max(right.norm()).max(whole.norm());
        prop_assert!((left + right - whole).norm() <= 1e-12 * scale);
        prop_assert_eq!(whole, voronoi_truncated(t, &tw, x, top).unwrap());
    }

    #[test]
    fn phase_contract(n in 1u64..1_000_000, p in 4u64..4_000_000, k in 1u64..20) {
        prop_assume!((n as u128) * (p as u128) <= 4_000_000_000_000);
        let got = voronoi_phase_turns(n, p as f64 / 4.0, k);
        let err = circular_distance(got, phase_oracle(n, p, k)) * 2.0 * PI;
        prop_assert!(err <= 1e-6, "{} rad", err);
    }
}
