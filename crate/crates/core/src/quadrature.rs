//! Quadrature rules: Gauss-Legendre nodes, adaptive Gauss-Kronrod (7/15) for
//! complex integrands on finite and half-infinite intervals, and the
//! fourth-order Gregory weights used on uniform grids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights attached to XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Result of one Gauss-Kronrod panel evaluation.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_value: f64,
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

fn kronrod_panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
        abs_value: abs_sum * half.abs(),
    }
}

/// Tolerances and budget of the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_panels: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

/// Output of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    /// Integral of |f|, used as the cancellation scale.
    pub abs_value: f64,
    pub panels: usize,
}

/// Adaptive Gauss-Kronrod integration of a complex integrand over the
/// finite interval spanned by `breakpoints` (sorted, at least two entries).
/// Every listed breakpoint starts a panel.
pub fn integrate<F>(f: F, breakpoints: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    if breakpoints.len() < 2 {
        return Err(Error::Domain("integration needs at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod_panel(&f, w[0], w[1]));
        }
    }
    let mut count = heap.len();
    loop {
        let (value, error, abs_value) = totals(&heap);
        let tol = opts.abs_tol.max(opts.rel_tol * value.norm()).max(1e-15 * abs_value);
        if error <= tol || heap.is_empty() {
            return Ok(QuadResult {
                value,
                error,
                abs_value,
                panels: count,
            });
        }
        if count >= opts.max_panels {
            return Err(Error::Quadrature {
                reason: format!("panel budget {} exhausted", opts.max_panels),
                estimate: value.norm(),
                error,
            });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                reason: "panel width reached machine resolution".into(),
                estimate: value.norm(),
                error,
            });
        }
        heap.push(kronrod_panel(&f, worst.a, mid));
        heap.push(kronrod_panel(&f, mid, worst.b));
        count += 1;
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64, f64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut abs_value = 0.0;
    for p in heap.iter() {
        value += p.value;
        error += p.error;
        abs_value += p.abs_value;
    }
    (value, error, abs_value)
}

/// Adaptive integration over `[a, +inf)` through the map y = a + u/(1-u).
pub fn integrate_to_infinity<F>(f: F, a: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let mapped = |u: f64| {
        let one_minus = 1.0 - u;
        let y = a + u / one_minus;
        let v = f(y);
        if v == Complex64::new(0.0, 0.0) {
            v
        } else {
            v / (one_minus * one_minus)
        }
    };
    integrate(mapped, &[0.0, 0.5, 0.75, 0.875, 1.0], opts)
}

/// Adaptive integration over `(-inf, b]`.
pub fn integrate_from_neg_infinity<F>(f: F, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_to_infinity(|y| f(2.0 * b - y), b, opts)
}

/// Integrates over an arbitrary (possibly infinite) interval `[lo, hi]`,
/// splitting at `center` when an end is infinite. `inner` supplies the
/// breakpoints of the finite part.
pub fn integrate_line<F>(
    f: F,
    lo: f64,
    hi: f64,
    center: f64,
    inner_panels: usize,
    opts: QuadOptions,
) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let mut total = QuadResult {
        value: Complex64::new(0.0, 0.0),
        error: 0.0,
        abs_value: 0.0,
        panels: 0,
    };
    let mut add = |r: QuadResult| {
        total.value += r.value;
        total.error += r.error;
        total.abs_value += r.abs_value;
        total.panels += r.panels;
    };
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => add(integrate(&f, &uniform_breaks(lo, hi, inner_panels), opts)?),
        (false, true) => {
            let c = center.min(hi);
            if c < hi {
                add(integrate(&f, &uniform_breaks(c, hi, inner_panels), opts)?);
            }
            add(integrate_from_neg_infinity(&f, c, opts)?);
        }
        (true, false) => {
            let c = center.max(lo);
            if c > lo {
                add(integrate(&f, &uniform_breaks(lo, c, inner_panels), opts)?);
            }
            add(integrate_to_infinity(&f, c, opts)?);
        }
        (false, false) => {
            add(integrate_from_neg_infinity(&f, center, opts)?);
            add(integrate_to_infinity(&f, center, opts)?);
        }
    }
    Ok(total)
}

/// `n` equal panels covering `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
        .collect()
}

/// Weights (in units of the spacing) of the fourth-order Gregory rule on
/// `n` equally spaced samples. Falls back to Simpson / trapezoid for very
/// short ranges.
pub fn gregory_weights(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        2 => vec![0.5, 0.5],
        3 => vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
        4 => vec![3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0],
        5 => vec![14.0 / 45.0, 64.0 / 45.0, 24.0 / 45.0, 64.0 / 45.0, 14.0 / 45.0],
        _ => {
            let mut w = vec![1.0; n];
            let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
            for (k, e) in ends.iter().enumerate() {
                w[k] = *e;
                w[n - 1 - k] = *e;
            }
            w
        }
    }
}

/// Gregory-rule integral of uniformly spaced samples.
pub fn gregory_integral(values: &[f64], spacing: f64) -> f64 {
    let w = gregory_weights(values.len());
    spacing * values.iter().zip(&w).map(|(v, w)| v * w).sum::<f64>()
}

/// Trapezoid rule on arbitrary abscissae.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}
