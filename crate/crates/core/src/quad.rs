//! Gauss–Legendre rules and a composite Gauss–Kronrod panel integrator with
//! bisection refinement.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values that the panel integrator can accumulate.
pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    #[inline]
    fn magnitude(self) -> f64 {
        libm::fabs(self)
    }
}

impl QuadValue for Complex64 {
    #[inline]
    fn magnitude(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on `[-1, 1]` by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if libm::fabs(dx) < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_a^b f`.
    #[inline]
    pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(&self, a: f64, b: f64, mut f: F) -> T {
        self.apply(a, b, &mut f).0
    }

    /// `(∫_a^b f, ∫_a^b |f|)` from one set of samples.
    #[inline]
    pub fn apply<T: QuadValue, F: FnMut(f64) -> T>(&self, a: f64, b: f64, f: &mut F) -> (T, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        let mut abs = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            acc = acc + v * *w;
            abs += w * v.magnitude();
        }
        (acc * half, abs * libm::fabs(half))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Kronrod 7/15 pair on `[-1, 1]`: the 15-point Kronrod value and its
/// distance from the embedded 7-point Gauss value.
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd-indexed Kronrod nodes.
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// `(K15, ∫|f| by K15, |K15 - G7|)` on `[a, b]`.
#[inline]
fn kronrod15<T: QuadValue, F: FnMut(f64) -> T>(a: f64, b: f64, f: &mut F) -> (T, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let centre = f(mid);
    let mut kron = centre * KRONROD_WEIGHTS[7];
    let mut gauss = centre * GAUSS7_WEIGHTS[3];
    let mut abs = KRONROD_WEIGHTS[7] * centre.magnitude();
    for j in 0..7 {
        let dx = half * KRONROD_NODES[j];
        let (lo, hi) = (f(mid - dx), f(mid + dx));
        let pair = lo + hi;
        kron = kron + pair * KRONROD_WEIGHTS[j];
        abs += KRONROD_WEIGHTS[j] * (lo.magnitude() + hi.magnitude());
        if j % 2 == 1 {
            gauss = gauss + pair * GAUSS7_WEIGHTS[j / 2];
        }
    }
    let half_abs = libm::fabs(half);
    (kron * half, abs * half_abs, (kron - gauss).magnitude() * half_abs)
}

#[derive(Debug, Clone, Copy)]
pub struct PanelOptions {
    /// Initial panels are no longer than this.
    pub max_panel: f64,
    /// Target for the summed error estimate over the whole range.
    pub abs_tol: f64,
    /// Upper bound on accepted panels.
    pub cap: usize,
    pub max_depth: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct PanelResult<T> {
    pub value: T,
    /// `∫ |f|`, the scale against which cancellation is judged.
    pub abs_integral: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Composite Gauss–Kronrod integration over consecutive `breaks` (ascending).
/// Each segment is cut into equal panels no longer than `max_panel`; a panel
/// is accepted when its Kronrod/Gauss difference is within the panel's share
/// of `abs_tol`, otherwise it is bisected. On overflow of `cap` the panel
/// count reached is returned as the error.
pub fn integrate_panels<T: QuadValue, F: FnMut(f64) -> T>(
    breaks: &[f64],
    opts: &PanelOptions,
    mut f: F,
) -> core::result::Result<PanelResult<T>, usize> {
    let total = match (breaks.first(), breaks.last()) {
        (Some(a), Some(b)) if b > a => b - a,
        _ => {
            return Ok(PanelResult { value: T::default(), abs_integral: 0.0, error_estimate: 0.0, panels: 0 });
        }
    };
    let mut state = PanelState { value: T::default(), abs: 0.0, err: 0.0, panels: 0 };
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if !(b > a) {
            continue;
        }
        let count = libm::ceil((b - a) / opts.max_panel).max(1.0) as usize;
        if state.panels.saturating_add(count) > opts.cap {
            return Err(state.panels.saturating_add(count));
        }
        let h = (b - a) / count as f64;
        for i in 0..count {
            let lo = a + h * i as f64;
            let hi = if i + 1 == count { b } else { a + h * (i + 1) as f64 };
            refine(lo, hi, total, opts, 0, &mut f, &mut state)?;
        }
    }
    Ok(PanelResult { value: state.value, abs_integral: state.abs, error_estimate: state.err, panels: state.panels })
}

struct PanelState<T> {
    value: T,
    abs: f64,
    err: f64,
    panels: usize,
}

fn refine<T: QuadValue, F: FnMut(f64) -> T>(
    a: f64,
    b: f64,
    total: f64,
    opts: &PanelOptions,
    depth: u32,
    f: &mut F,
    state: &mut PanelState<T>,
) -> core::result::Result<(), usize> {
    let (value, abs, err) = kronrod15(a, b, f);
    let share = opts.abs_tol * (b - a) / total;
    if err <= share || depth >= opts.max_depth {
        state.value = state.value + value;
        state.abs += abs;
        state.err += err;
        state.panels += 1;
        if state.panels > opts.cap {
            return Err(state.panels);
        }
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    refine(a, mid, total, opts, depth + 1, f, state)?;
    refine(mid, b, total, opts, depth + 1, f, state)
}
