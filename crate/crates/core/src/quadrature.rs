//! Quadrature rules used by the overlap engine.
//!
//! `adaptive_gk15` is a bisecting Gauss–Kronrod (7/15) integrator for smooth,
//! moderately oscillatory complex integrands. `simpson_richardson` is the
//! fixed-grid rule for the outer Rindler-frequency integrals: it evaluates
//! composite Simpson on `n` and `2n` panels and extrapolates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

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
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let value = kronrod * h;
    let err = ((kronrod - gauss) * h).norm();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive GK15 on `[a, b]`, `initial` equal starting panels.
///
/// Stops when the summed error estimate falls below `abs_tol` or
/// `max_segments` is reached. The result sums segments in interval order so
/// the value does not depend on heap ordering.
pub fn adaptive_gk15<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    initial: usize,
    abs_tol: f64,
    max_segments: usize,
) -> QuadResult<Complex64> {
    let initial = initial.max(1);
    let mut heap = BinaryHeap::with_capacity(2 * initial);
    let step = (b - a) / initial as f64;
    let mut evaluations = 0;
    for i in 0..initial {
        let lo = a + step * i as f64;
        let hi = if i + 1 == initial { b } else { lo + step };
        let (value, error) = gk15(&f, lo, hi);
        evaluations += 15;
        heap.push(Segment {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    let mut total_err: f64 = heap.iter().map(|s| s.error).sum();
    while total_err > abs_tol && heap.len() < max_segments {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segs.iter().fold(Complex64::new(0.0, 0.0), |acc, s| acc + s.value);
    let error: f64 = segs.iter().map(|s| s.error).sum();
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= abs_tol,
    }
}

/// Composite Simpson weights on `n` (even) panels over `[a, b]`.
pub fn simpson_weights(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2 && n.is_multiple_of(2), "Simpson needs an even panel count");
    let h = (b - a) / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
    let weights = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Simpson on `2n` panels from samples, with the `n`-panel rule recovered from
/// the even-indexed samples. Returns the Richardson value and `|S_2n - S_n|/15`.
pub fn simpson_richardson_samples(h: f64, samples: &[f64]) -> (f64, f64) {
    let m = samples.len() - 1;
    assert!(m >= 4 && m.is_multiple_of(4), "need 4k panels");
    let fine = simpson_sum(h, samples.iter().copied());
    let coarse = simpson_sum(2.0 * h, samples.iter().step_by(2).copied());
    let diff = fine - coarse;
    (fine + diff / 15.0, diff.abs() / 15.0)
}

fn simpson_sum(h: f64, samples: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = samples.len() - 1;
    let mut acc = 0.0;
    for (i, v) in samples.enumerate() {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * v;
    }
    acc * h / 3.0
}

/// Fixed-grid Simpson with Richardson extrapolation over `[a, b]` using `2n`
/// panels (`n` even). Returns `(value, error_estimate)`.
pub fn simpson_richardson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> (f64, f64) {
    let n = n.max(2) + n % 2;
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let samples: Vec<f64> = (0..=m).map(|i| f(a + h * i as f64)).collect();
    simpson_richardson_samples(h, &samples)
}
