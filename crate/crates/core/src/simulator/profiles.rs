//! Evaluators for `u(t, x)` from any solver, and the rescaled profiles
//! `r(t,y) = t e^{2ty} u(t, e^{ty})` and
//! `r̃(t,z) = r(t, y0 + σz/√t) σ/√t` with `y0 = K'(2)`, `σ² = K''(2)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::LogGridSolution;
use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::kernel::FragmentationKernel;
use crate::mellin::inverse_mellin_u;
use crate::quadrature::gregory_weights;

/// Anything that can produce `u(t, x)`.
pub trait SolutionEvaluator: Send + Sync {
    fn u(&self, t: f64, x: f64) -> Result<f64>;

    /// Range of `log x` on which `u(t, ·)` is available; `None` when unbounded.
    fn log_range(&self, _t: f64) -> Option<(f64, f64)> {
        None
    }
}

pub struct MellinEvaluator {
    pub datum: InitialDatum,
    pub kernel: FragmentationKernel,
}

impl SolutionEvaluator for MellinEvaluator {
    fn u(&self, t: f64, x: f64) -> Result<f64> {
        inverse_mellin_u(&self.datum, &self.kernel, t, x, None)
    }
}

/// Interpolates stored snapshots; other times are a range error.
pub struct GridEvaluator {
    pub solution: LogGridSolution,
}

impl SolutionEvaluator for GridEvaluator {
    fn u(&self, t: f64, x: f64) -> Result<f64> {
        let snap = self
            .solution
            .snapshot_at(t)
            .ok_or_else(|| Error::Range(format!("no snapshot stored at t = {t}")))?;
        let y = x.ln();
        if y < self.solution.y_min || y > self.solution.y_max() {
            return Err(Error::Range(format!("log x = {y} outside the grid")));
        }
        self.solution.interpolate(snap, y)
    }

    fn log_range(&self, _t: f64) -> Option<(f64, f64)> {
        Some((self.solution.y_min, self.solution.y_max()))
    }
}

/// Wraps a closure, e.g. an exact solution.
pub struct FnEvaluator {
    pub f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl SolutionEvaluator for FnEvaluator {
    fn u(&self, t: f64, x: f64) -> Result<f64> {
        Ok((self.f)(t, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `∫ profile`
    pub integral: f64,
    /// First moment of `profile / M`.
    pub mean: f64,
    /// Central second moment of `profile / M`.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledProfiles {
    pub t: f64,
    pub mass: f64,
    pub y0: f64,
    pub sigma: f64,
    /// `(y, r(t,y))`
    pub r: Vec<(f64, f64)>,
    /// `(z, r̃(t,z))`
    pub r_tilde: Vec<(f64, f64)>,
    pub r_moments: Moments,
    pub r_tilde_moments: Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub samples: usize,
    /// Half-width of the `y` window around `y0`; default `12σ/√t + 1`.
    pub half_width: Option<f64>,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            samples: 2001,
            half_width: None,
        }
    }
}

fn moments(points: &[(f64, f64)], mass: f64) -> Moments {
    let n = points.len();
    let h = (points[n - 1].0 - points[0].0) / (n - 1) as f64;
    let w = gregory_weights(n);
    let m0: f64 = h * points.iter().zip(&w).map(|((_, v), w)| w * v).sum::<f64>();
    let m1: f64 = h * points.iter().zip(&w).map(|((y, v), w)| w * y * v).sum::<f64>() / mass;
    let m2: f64 = h * points
        .iter()
        .zip(&w)
        .map(|((y, v), w)| w * (y - m1).powi(2) * v)
        .sum::<f64>()
        / mass;
    Moments {
        integral: m0,
        mean: m1,
        variance: m2,
    }
}

/// Samples `r` and `r̃` at time `t` and returns their moments normalised by `M`.
pub fn rescaled_profiles(
    datum: &InitialDatum,
    kernel: &FragmentationKernel,
    eval: &dyn SolutionEvaluator,
    t: f64,
    opts: ProfileOptions,
) -> Result<RescaledProfiles> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("profiles need t > 0, got {t}")));
    }
    if opts.samples < 8 {
        return Err(Error::Domain("profiles need at least 8 samples".into()));
    }
    let y0 = kernel.derivative_real(2.0, 1)?;
    let sigma = kernel.derivative_real(2.0, 2)?.sqrt();
    let mass = datum.mass();
    let half = opts.half_width.unwrap_or(12.0 * sigma / t.sqrt() + 1.0);
    let (mut lo, mut hi) = (y0 - half, y0 + half);
    if let Some((a, b)) = eval.log_range(t) {
        lo = lo.max(a / t);
        hi = hi.min(b / t);
    }
    if !(hi > lo) {
        return Err(Error::Range(format!(
            "profile window around y0 = {y0} misses the evaluator range"
        )));
    }
    let n = opts.samples;
    let step = (hi - lo) / (n - 1) as f64;
    let r = (0..n)
        .map(|i| {
            let y = if i + 1 == n { hi } else { lo + i as f64 * step };
            let u = eval.u(t, (t * y).exp())?;
            Ok((y, t * (2.0 * t * y).exp() * u))
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = sigma / t.sqrt();
    // the same samples in the z variable: y = y0 + scale z
    let r_tilde: Vec<(f64, f64)> = r.iter().map(|(y, v)| ((y - y0) / scale, v * scale)).collect();
    Ok(RescaledProfiles {
        t,
        mass,
        y0,
        sigma,
        r_moments: moments(&r, mass),
        r_tilde_moments: moments(&r_tilde, mass),
        r,
        r_tilde,
    })
}
