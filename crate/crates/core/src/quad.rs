//! Adaptive Gauss–Kronrod (7/15) integration on finite intervals.
//!
//! Intervals are bisected largest-error-first until the summed error
//! estimate drops below the requested tolerance. Known kinks of the
//! integrand should be passed as breakpoints so that no panel straddles them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            max_intervals: 20_000,
        }
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 20_000,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-panel |Kronrod - Gauss| estimates.
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        kronrod += w * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::NonFinite(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint that lies
/// strictly inside the interval.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut left = lo;
    for &c in cuts.iter().chain(std::iter::once(&hi)) {
        heap.push(gauss_kronrod(&f, left, c)?);
        left = c;
    }
    let mut evaluations = 15 * heap.len();

    loop {
        let (value, error) = totals(&heap);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult {
                value: sign * value,
                error,
                evaluations,
                intervals: heap.len(),
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "{} panels on [{lo:e}, {hi:e}] leave error {error:.3e} above target {target:.3e}",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature(format!(
                "panel [{:e}, {:e}] cannot be bisected further (error {:.3e})",
                worst.a, worst.b, worst.error
            )));
        }
        heap.push(gauss_kronrod(&f, worst.a, mid)?);
        heap.push(gauss_kronrod(&f, mid, worst.b)?);
        evaluations += 30;
    }
}

// Summed in a fixed (sorted) order so results do not depend on heap layout.
fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` via Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = n * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}
