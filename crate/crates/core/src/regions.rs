//! Exponential growth and decay of `x u(t, x)` along the rays `x = e^{K'(s) t}`.
//!
//! Along such a ray the solution behaves like `e^{F(s) t}` in the bulk, with
//! `F(s) = K(s) - 1 - (s-1) K'(s)`; heavy tails replace `F` by
//! `G(p, s) = K(p) - 1 - (p-1) K'(s)` with `p` the tail exponent.

use serde::{Deserialize, Serialize};

use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::kernel::FragmentationKernel;
use crate::roots::bisect;

const ROOT_TOL: f64 = 1e-15;

pub fn f_exponent(kernel: &FragmentationKernel, s: f64) -> Result<f64> {
    Ok(kernel.mellin_real(s)? - 1.0 - (s - 1.0) * kernel.derivative_real(s, 1)?)
}

pub fn g_exponent(kernel: &FragmentationKernel, p: f64, s: f64) -> Result<f64> {
    Ok(kernel.mellin_real(p)? - 1.0 - (p - 1.0) * kernel.derivative_real(s, 1)?)
}

fn nan_on_err(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

/// Walks from `start` toward the lower abscissa until `f` turns negative.
fn grow_left<F: Fn(f64) -> f64>(f: F, p1: f64, start: f64) -> Result<f64> {
    for k in 1..1100 {
        let s = if p1.is_finite() {
            p1 + (start - p1) * 0.5f64.powi(k)
        } else {
            start - 2f64.powi(k - 1)
        };
        if s <= p1 {
            break;
        }
        if f(s) < 0.0 {
            return Ok(s);
        }
    }
    Err(Error::RootBracket(format!(
        "no sign change found between p1 = {p1} and {start}"
    )))
}

fn grow_right<F: Fn(f64) -> f64>(f: F, start: f64) -> Result<f64> {
    let mut s = 2.0 * start.max(1.0);
    for _ in 0..200 {
        if f(s) < 0.0 {
            return Ok(s);
        }
        s *= 2.0;
    }
    Err(Error::RootBracket(format!("no sign change found above {start}")))
}

/// The zeros `p̄ ∈ (p1, 1)` and `q̄ ∈ (2, ∞)` of `F`.
pub fn f_zeros(kernel: &FragmentationKernel) -> Result<(f64, f64)> {
    let f = |s: f64| nan_on_err(f_exponent(kernel, s));
    let p1 = kernel.lower_abscissa();
    let lo = grow_left(f, p1, 1.0)?;
    let p_bar = bisect(f, lo, 1.0, ROOT_TOL)?;
    let hi = grow_right(f, 2.0)?;
    let q_bar = bisect(f, 2.0, hi, ROOT_TOL)?;
    Ok((p_bar, q_bar))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub p_bar: f64,
    pub q_bar: f64,
    pub s_bar_p0: Option<f64>,
    pub s_bar_q0: Option<f64>,
    /// `(s_left, s_right)` in the saddle coordinate.
    pub growth_interval: (f64, f64),
    /// `(K'(s_left), K'(s_right))`: the rays `x = e^{K'(s) t}` bounding the growth zone.
    pub boundary_slopes: (f64, f64),
    pub p0: f64,
    pub q0: f64,
}

/// Growth zone of `x u(t, x)` for the given kernel and datum.
pub fn region_report(kernel: &FragmentationKernel, datum: &InitialDatum) -> Result<RegionReport> {
    kernel.ensure_admissible()?;
    let (p_bar, q_bar) = f_zeros(kernel)?;
    let (p0, q0) = datum.strip();
    let p1 = kernel.lower_abscissa();

    let s_bar_p0 = if p_bar < p0 {
        let g = |s: f64| nan_on_err(g_exponent(kernel, p0, s));
        let lo = grow_left(g, p1, p0)?;
        Some(bisect(g, lo, p0, ROOT_TOL)?)
    } else {
        None
    };
    let s_bar_q0 = if q_bar > q0 {
        let g = |s: f64| nan_on_err(g_exponent(kernel, q0, s));
        let hi = grow_right(g, q0)?;
        Some(bisect(g, q0, hi, ROOT_TOL)?)
    } else {
        None
    };
    let s_left = s_bar_p0.unwrap_or(p_bar);
    let s_right = s_bar_q0.unwrap_or(q_bar);
    Ok(RegionReport {
        p_bar,
        q_bar,
        s_bar_p0,
        s_bar_q0,
        growth_interval: (s_left, s_right),
        boundary_slopes: (kernel.derivative_real(s_left, 1)?, kernel.derivative_real(s_right, 1)?),
        p0,
        q0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxGrowthRay {
    /// `c < -K'(1)`: the fastest-growing ray moves toward zero size.
    ToZero,
    ToInfinity,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "zone")]
pub enum GrowthFragZone {
    ZoneToInfinity,
    Mixed { max_growth_ray: MaxGrowthRay },
    ZoneToZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFragClass {
    pub c: f64,
    pub zone: GrowthFragZone,
    /// `-K'(p̄)`
    pub upper_threshold: f64,
    /// `-K'(q̄)`
    pub lower_threshold: f64,
    /// `-K'(1)`
    pub ray_threshold: f64,
    pub caveat: Option<String>,
}

/// Classifies the growth-fragmentation equation with growth rate `c` by
/// comparing `c` with `-K'(p̄)`, `-K'(q̄)` and `-K'(1)`.
pub fn classify_growth_frag(kernel: &FragmentationKernel, datum: &InitialDatum, c: f64) -> Result<GrowthFragClass> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("growth rate c must be positive, got {c}")));
    }
    let report = region_report(kernel, datum)?;
    let upper = -kernel.derivative_real(report.p_bar, 1)?;
    let lower = -kernel.derivative_real(report.q_bar, 1)?;
    let ray = -kernel.derivative_real(1.0, 1)?;
    let zone = if c > upper {
        GrowthFragZone::ZoneToInfinity
    } else if c < lower {
        GrowthFragZone::ZoneToZero
    } else {
        let max_growth_ray = if c < ray {
            MaxGrowthRay::ToZero
        } else if c > ray {
            MaxGrowthRay::ToInfinity
        } else {
            MaxGrowthRay::Stationary
        };
        GrowthFragZone::Mixed { max_growth_ray }
    };
    let (p0, q0) = datum.strip();
    let caveat = (p0.is_finite() || q0.is_finite()).then(|| {
        format!("datum has power-law tails (strip ({p0}, {q0})); the classification assumes very smooth data")
    });
    Ok(GrowthFragClass {
        c,
        zone,
        upper_threshold: upper,
        lower_threshold: lower,
        ray_threshold: ray,
        caveat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurve {
    /// Largest slope `c` found, with its `s`.
    pub c: Option<f64>,
    pub s: Option<f64>,
    /// Every root `(s, c)` located by the scan.
    pub roots: Vec<(f64, f64)>,
}

/// Slope `c > 0` of the ray `-log x = c t` on which `φ(s₊) = 0`: roots of
/// `K(s) - s K'(s) = 0` with `c = -K'(s)`. Kernels may have none.
pub fn critical_curve_slope(kernel: &FragmentationKernel) -> CriticalCurve {
    let h = |s: f64| {
        nan_on_err(
            kernel
                .mellin_real(s)
                .and_then(|k| Ok(k - s * kernel.derivative_real(s, 1)?)),
        )
    };
    let p1 = kernel.lower_abscissa();
    let lo = if p1.is_finite() {
        p1 + 1e-6 * p1.abs().max(1.0)
    } else {
        -50.0
    };
    let hi = 60.0;
    let n = 6000;
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let mut roots = Vec::new();
    let mut prev = (grid[0], h(grid[0]));
    for &s in &grid[1..] {
        let v = h(s);
        if prev.1.is_finite() && v.is_finite() && (prev.1 == 0.0 || prev.1.signum() != v.signum()) {
            if let Ok(r) = bisect(h, prev.0, s, ROOT_TOL) {
                if let Ok(d) = kernel.derivative_real(r, 1) {
                    if -d > 0.0 && roots.iter().all(|(x, _): &(f64, f64)| (x - r).abs() > 1e-12) {
                        roots.push((r, -d));
                    }
                }
            }
        }
        prev = (s, v);
    }
    let best = roots.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1));
    CriticalCurve {
        c: best.map(|b| b.1),
        s: best.map(|b| b.0),
        roots,
    }
}

/// `(s, F(s))` samples for plotting.
pub fn f_curve(kernel: &FragmentationKernel, s: &[f64]) -> Result<Vec<(f64, f64)>> {
    s.iter().map(|&v| Ok((v, f_exponent(kernel, v)?))).collect()
}

/// `(s, G(p, s))` samples for plotting.
pub fn g_curve(kernel: &FragmentationKernel, p: f64, s: &[f64]) -> Result<Vec<(f64, f64)>> {
    s.iter().map(|&v| Ok((v, g_exponent(kernel, p, v)?))).collect()
}
