//! Meromorphic extension of `U0` across the strip edges and numerical
//! inversion of the Mellin representation
//!
//! ```text
//! u(t,x) = (1/2π) ∫ U0(ν+iv) e^{(K(ν+iv)-1)t} x^{-ν-iv} dv.
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::kernel::FragmentationKernel;
use crate::quadrature::gauss_legendre;
use crate::roots::golden_min;

/// Distance to a pole below which the extension refuses to evaluate.
pub const POLE_GUARD: f64 = 1e-8;

/// `U0` continued past `q0` (into `(q0, r)`) or below `p0` (into `(rho, p0)`).
/// Inside the strip the ordinary transform is returned.
pub fn meromorphic_extension(datum: &InitialDatum, s: Complex64) -> Result<Complex64> {
    let (p0, q0) = datum.strip();
    if s.re > p0 && s.re < q0 {
        return datum.mellin(s);
    }
    if s.re >= q0 {
        let tail = datum
            .upper_tail()
            .ok_or_else(|| Error::Domain(format!("Re(s) = {} >= q0 = {q0} but the datum has no upper tail", s.re)))?;
        let distance = (s - q0).norm();
        if distance < POLE_GUARD {
            return Err(Error::Pole { pole: q0, distance });
        }
        if s.re >= tail.r {
            return Err(Error::Domain(format!(
                "Re(s) = {} beyond the extension limit r = {}",
                s.re, tail.r
            )));
        }
        return upper_extension(datum, s);
    }
    let tail = datum
        .lower_tail()
        .ok_or_else(|| Error::Domain(format!("Re(s) = {} <= p0 = {p0} but the datum has no lower tail", s.re)))?;
    let distance = (s - p0).norm();
    if distance < POLE_GUARD {
        return Err(Error::Pole { pole: p0, distance });
    }
    if s.re <= tail.rho {
        return Err(Error::Domain(format!(
            "Re(s) = {} below the extension limit rho = {}",
            s.re, tail.rho
        )));
    }
    lower_extension(datum, s)
}

/// `∫_{-∞}^0 u0 e^{sy} dy - a0/(s-q0) + ∫_0^∞ (u0 - a0 e^{-q0 y}) e^{sy} dy`,
/// valid for `max(p0, ...) < Re(s) < r`.
pub fn upper_extension(datum: &InitialDatum, s: Complex64) -> Result<Complex64> {
    let tail = datum
        .upper_tail()
        .ok_or_else(|| Error::MissingTail("upper extension needs (a0, q0, r)".into()))?;
    let (c0, c1) = datum.core();
    let below = integrate_below_zero(datum, s, c0)?;
    let b_hi = c1.max(0.0);
    let remainder = datum.integrate_core(
        |y| (datum.evaluate_log(y) - tail.a0 * (-tail.q0 * y).exp()) * (s * y).exp(),
        s.im,
        0.0,
        b_hi,
    )?;
    Ok(below - tail.a0 / (s - tail.q0) + remainder)
}

/// Mirror of [`upper_extension`] across `p0`.
pub fn lower_extension(datum: &InitialDatum, s: Complex64) -> Result<Complex64> {
    let tail = datum
        .lower_tail()
        .ok_or_else(|| Error::MissingTail("lower extension needs (b0, p0, rho)".into()))?;
    let (c0, c1) = datum.core();
    let above = integrate_above_zero(datum, s, c1)?;
    let a_lo = c0.min(0.0);
    let remainder = datum.integrate_core(
        |y| (datum.evaluate_log(y) - tail.b0 * (-tail.p0 * y).exp()) * (s * y).exp(),
        s.im,
        a_lo,
        0.0,
    )?;
    Ok(above + tail.b0 / (s - tail.p0) + remainder)
}

fn integrate_below_zero(datum: &InitialDatum, s: Complex64, c0: f64) -> Result<Complex64> {
    let m = c0.min(0.0);
    let mut total = datum.integrate_core(|y| datum.evaluate_log(y) * (s * y).exp(), s.im, m, 0.0)?;
    if let (Some(t), true) = (datum.lower_tail(), m.is_finite()) {
        total += t.b0 * ((s - t.p0) * m).exp() / (s - t.p0);
    }
    Ok(total)
}

fn integrate_above_zero(datum: &InitialDatum, s: Complex64, c1: f64) -> Result<Complex64> {
    let m = c1.max(0.0);
    let mut total = datum.integrate_core(|y| datum.evaluate_log(y) * (s * y).exp(), s.im, 0.0, m)?;
    if let (Some(t), true) = (datum.upper_tail(), m.is_finite()) {
        total += t.a0 * ((s - t.q0) * m).exp() / (t.q0 - s);
    }
    Ok(total)
}

/// Coefficient of `(s - q0)^{-1}` in the upper extension, i.e. `-a0`.
pub fn upper_laurent_coefficient(datum: &InitialDatum) -> Result<f64> {
    datum
        .upper_tail()
        .map(|t| -t.a0)
        .ok_or_else(|| Error::MissingTail("datum has no upper tail".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourRule {
    Trapezoid,
    GaussLegendre,
}

/// A fixed vertical contour `Re(s) = abscissa`, `|Im(s)| <= half_height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourConfig {
    pub abscissa: f64,
    pub half_height: f64,
    pub nodes: usize,
    pub rule: ContourRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseMellinResult {
    pub value: f64,
    /// `|Im|` of the contour integral; vanishes for real data.
    pub imag_residue: f64,
    pub abscissa: f64,
    pub half_height: f64,
    pub nodes: usize,
    pub warnings: Vec<String>,
}

/// Magnitude ratio at which the contour is truncated.
pub const TRUNCATION_RATIO: f64 = 1e-14;
/// Relative change between node doublings accepted as converged.
pub const DOUBLING_TOL: f64 = 1e-9;
/// Node budget of the adaptive contour quadrature.
pub const MAX_NODES: usize = 1 << 22;
const MAX_HALF_HEIGHT: f64 = 32768.0;
const GL_PANEL: usize = 16;

/// `u(t, x)` from the inverse Mellin integral.
pub fn inverse_mellin_u(
    datum: &InitialDatum,
    kernel: &FragmentationKernel,
    t: f64,
    x: f64,
    config: Option<ContourConfig>,
) -> Result<f64> {
    Ok(inverse_mellin_detailed(datum, kernel, t, x, config)?.value)
}

/// Admissible range of contour abscissae: `(max(p0, p1), q0)` shrunk by 5%
/// of its width (or by 0.05 when unbounded).
pub fn abscissa_range(datum: &InitialDatum, kernel: &FragmentationKernel) -> Result<(f64, f64)> {
    let (p0, q0) = datum.strip();
    let lo = p0.max(kernel.lower_abscissa());
    if !(lo < q0) {
        return Err(Error::Domain(format!(
            "empty contour range: max(p0, p1) = {lo} is not below q0 = {q0}"
        )));
    }
    let delta = if lo.is_finite() && q0.is_finite() {
        0.05 * (q0 - lo)
    } else {
        0.05
    };
    Ok((lo + delta, q0 - delta))
}

/// Default abscissa: the minimiser over the admissible range of the real
/// log-modulus `log U0(ν) + t (K(ν) - 1) - ν log x` of the integrand.
/// For `t > 0` and slowly varying `U0` this is the saddle `s₊(t,x)`.
pub fn default_abscissa(datum: &InitialDatum, kernel: &FragmentationKernel, t: f64, x: f64) -> Result<f64> {
    let (lo, hi) = abscissa_range(datum, kernel)?;
    let (a, b) = (lo.max(-30.0), hi.min(30.0));
    if a >= b {
        return Ok(0.5 * (lo.max(-30.0) + hi.min(30.0)));
    }
    let lx = x.ln();
    let modulus = |nu: f64| -> f64 {
        let s = Complex64::new(nu, 0.0);
        let u = datum.mellin(s).map(|v| v.re).unwrap_or(f64::NAN);
        let k = kernel.mellin(s).map(|v| v.re).unwrap_or(f64::NAN);
        let v = u.ln() + t * (k - 1.0) - nu * lx;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    Ok(golden_min(modulus, a, b, 1e-6 * (b - a).max(1.0)))
}

/// Inverse Mellin evaluation with diagnostics.
///
/// For `t > 0` the term `e^{-t} u0(x)` is split off analytically, so the
/// contour integrand carries `e^{(K-1)t} - e^{-t}`, which decays faster for
/// kernels with a density.
pub fn inverse_mellin_detailed(
    datum: &InitialDatum,
    kernel: &FragmentationKernel,
    t: f64,
    x: f64,
    config: Option<ContourConfig>,
) -> Result<InverseMellinResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("size must be positive and finite, got {x}")));
    }
    kernel.ensure_admissible()?;
    let lx = x.ln();
    let split = t > 0.0;
    let decay = (-t).exp();
    let integrand = |nu: f64, v: f64| -> Result<Complex64> {
        let s = Complex64::new(nu, v);
        let u0 = datum.mellin(s)?;
        let k = kernel.mellin(s)?;
        let growth = if split {
            ((k - 1.0) * t).exp() - decay
        } else {
            ((k - 1.0) * t).exp()
        };
        Ok(u0 * growth * (-s * lx).exp())
    };
    let direct = if split { decay * datum.evaluate(x) } else { 0.0 };
    let mut warnings = Vec::new();

    let (integral, nu, half_height, nodes) = match config {
        Some(cfg) => {
            let (lo, hi) = abscissa_range(datum, kernel)?;
            let (p0, q0) = datum.strip();
            if !(cfg.abscissa > p0.max(kernel.lower_abscissa()) && cfg.abscissa < q0) {
                return Err(Error::Domain(format!(
                    "abscissa {} outside ({}, {q0})",
                    cfg.abscissa,
                    p0.max(kernel.lower_abscissa())
                )));
            }
            if cfg.abscissa < lo || cfg.abscissa > hi {
                warnings.push(format!("abscissa {} within 5% of a strip edge", cfg.abscissa));
            }
            if !(cfg.half_height > 0.0) || cfg.nodes < 64 {
                return Err(Error::Domain(
                    "contour needs half_height > 0 and at least 64 nodes".into(),
                ));
            }
            let i = line_integral(|v| integrand(cfg.abscissa, v), cfg.half_height, cfg.nodes, cfg.rule)?;
            (i, cfg.abscissa, cfg.half_height, cfg.nodes)
        }
        None => {
            let nu = default_abscissa(datum, kernel, t, x)?;
            let f = |v: f64| integrand(nu, v);
            let reference = {
                let s = Complex64::new(nu, 0.0);
                datum.mellin(s)?.norm() * ((kernel.mellin(s)?.re - 1.0) * t).exp() * (-nu * lx).exp()
            };
            let mut half_height = 4.0;
            loop {
                let mut edge = 0.0f64;
                for frac in [0.87, 0.93, 1.0] {
                    edge = edge
                        .max(f(frac * half_height)?.norm())
                        .max(f(-frac * half_height)?.norm());
                }
                if edge <= TRUNCATION_RATIO * reference {
                    break;
                }
                if half_height >= MAX_HALF_HEIGHT {
                    warnings.push(format!(
                        "contour truncated at |v| = {half_height}: integrand still {:.2e} of its peak",
                        edge / reference
                    ));
                    break;
                }
                half_height *= 2.0;
            }
            // about one panel per unit of v, capped so that doublings stay in budget
            let mut panels = ((2.0 * half_height).ceil() as usize).clamp(8, 8192);
            let mut previous = line_integral(&f, half_height, panels * GL_PANEL, ContourRule::GaussLegendre)?;
            loop {
                panels *= 2;
                if panels * GL_PANEL > MAX_NODES {
                    return Err(Error::Convergence(format!(
                        "contour quadrature not converged within {MAX_NODES} nodes (x = {x:e}, t = {t})"
                    )));
                }
                let current = line_integral(&f, half_height, panels * GL_PANEL, ContourRule::GaussLegendre)?;
                let total = (current.re / (2.0 * std::f64::consts::PI) + direct).abs();
                let change = (current - previous).norm() / (2.0 * std::f64::consts::PI);
                previous = current;
                if change <= DOUBLING_TOL * total.max(1e-300) || change == 0.0 {
                    break;
                }
            }
            (previous, nu, half_height, panels * GL_PANEL)
        }
    };
    let value = integral.re / (2.0 * std::f64::consts::PI) + direct;
    let imag_residue = integral.im.abs() / (2.0 * std::f64::consts::PI);
    if imag_residue > 1e-6 * value.abs() {
        warnings.push(format!(
            "conditioning: imaginary residue {imag_residue:.3e} exceeds 1e-6 of |u| = {:.3e}",
            value.abs()
        ));
    }
    Ok(InverseMellinResult {
        value,
        imag_residue,
        abscissa: nu,
        half_height,
        nodes,
        warnings,
    })
}

fn line_integral<F>(f: F, half_height: f64, nodes: usize, rule: ContourRule) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mut total = Complex64::new(0.0, 0.0);
    match rule {
        ContourRule::Trapezoid => {
            let h = 2.0 * half_height / (nodes - 1) as f64;
            for k in 0..nodes {
                let v = -half_height + h * k as f64;
                let w = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
                total += w * h * f(v)?;
            }
        }
        ContourRule::GaussLegendre => {
            let (x, w) = gauss_legendre(GL_PANEL);
            let panels = nodes.div_ceil(GL_PANEL);
            let width = 2.0 * half_height / panels as f64;
            for p in 0..panels {
                let mid = -half_height + width * (p as f64 + 0.5);
                for (xi, wi) in x.iter().zip(&w) {
                    total += wi * 0.5 * width * f(mid + 0.5 * width * xi)?;
                }
            }
        }
    }
    Ok(total)
}
