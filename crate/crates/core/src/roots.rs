//! Bracketed one-dimensional root finding and convex minimisation.

use crate::error::{Error, Result};

/// Bisection on `[a, b]`, which must bracket a sign change of `f`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::RootBracket(format!(
            "no sign change on [{a}, {b}]: f(a)={fa:e}, f(b)={fb:e}"
        )));
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= x_tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Safeguarded Newton iteration for an increasing function `g` with
/// derivative `dg`, on a bracket `[lo, hi]` with `g(lo) < 0 < g(hi)`.
/// Steps leaving the bracket, or failing to halve the residual, fall back to
/// bisection.
pub fn newton_increasing<G, D>(g: G, dg: D, mut lo: f64, mut hi: f64, start: f64, residual_tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    let mut gx = g(x);
    let mut last_abs = f64::INFINITY;
    for _ in 0..500 {
        if gx.abs() <= residual_tol {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
        let d = dg(x);
        let mut next = x - gx / d;
        if !(next > lo && next < hi) || !d.is_finite() || d <= 0.0 || gx.abs() > 0.5 * last_abs {
            next = 0.5 * (lo + hi);
        }
        last_abs = gx.abs();
        x = next;
        gx = g(x);
        if gx.is_nan() {
            return Err(Error::Convergence(format!("NaN residual at {x}")));
        }
    }
    if gx.abs() <= 1e3 * residual_tol {
        Ok(x)
    } else {
        Err(Error::Convergence(format!(
            "Newton iteration stalled at {x} with residual {gx:e}"
        )))
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
