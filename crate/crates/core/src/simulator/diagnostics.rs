//! Concentration diagnostics on grid solutions: the entropy-like functional
//! `H(z;t) = ∫_z^∞ x u dx`, its dissipation `D(z;t)`, mass quantiles and
//! the 10%-of-max support boundaries.

use serde::{Deserialize, Serialize};

use super::grid::{grid_mass, interpolate_uniform, LogGridSolution, Snapshot};
use crate::error::{Error, Result};
use crate::kernel::FragmentationKernel;
use crate::quadrature::gauss_legendre;

/// Fraction of the maximum used to define the support boundaries.
pub const SUPPORT_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    /// `H(z_k; t)` for each sampled `z_k`.
    pub entropy: Vec<f64>,
    /// `D(z_k; t)`.
    pub dissipation: Vec<f64>,
    /// `H(z_k; t) / H(0; t)`.
    pub tail_fraction: Vec<f64>,
    /// Sizes below which 5% and 95% of the mass `x u dx` sits.
    pub quantile_interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub z_grid: Vec<f64>,
    pub rows: Vec<DiagnosticsRow>,
    pub dissipation_nonpositive: bool,
    pub entropy_nonincreasing: bool,
    /// Upper end of the 90% interval decreases from snapshot to snapshot.
    pub interval_shrinking: bool,
}

/// `∫_{y_lo}^{y_max} g dy` for samples `g` on a uniform grid, fourth order on
/// whole cells and Gauss–Legendre on the cubic interpolant of the partial cell.
fn upper_integral(g: &[f64], y_min: f64, dy: f64, y_lo: f64) -> f64 {
    let len = g.len();
    if y_lo <= y_min {
        return grid_mass_plain(g, dy);
    }
    let m = (y_lo - y_min) / dy;
    let first = m.ceil() as usize;
    if first >= len {
        return 0.0;
    }
    let tail = if len - first >= 2 {
        grid_mass_plain(&g[first..], dy)
    } else {
        0.0
    };
    let a = y_lo;
    let b = y_min + first as f64 * dy;
    let partial = if b > a {
        let (x, w) = gauss_legendre(4);
        x.iter()
            .zip(&w)
            .map(|(x, w)| {
                let y = 0.5 * (a + b) + 0.5 * (b - a) * x;
                0.5 * (b - a) * w * interpolate_uniform(g, y_min, dy, y).unwrap_or(0.0)
            })
            .sum()
    } else {
        0.0
    };
    tail + partial
}

fn grid_mass_plain(g: &[f64], dy: f64) -> f64 {
    // grid_mass with the e^{2y} factor already folded into g
    if g.len() < 2 {
        return 0.0;
    }
    let w = crate::quadrature::gregory_weights(g.len());
    dy * g.iter().zip(&w).map(|(v, w)| v * w).sum::<f64>()
}

/// Mass sizes `x` such that a fraction `p` of `∫ x u dx` lies below.
pub fn mass_quantile(solution: &LogGridSolution, snapshot: &Snapshot, p: f64) -> f64 {
    let dy = solution.dy;
    let g: Vec<f64> = snapshot
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v.max(0.0) * (2.0 * solution.y(i)).exp())
        .collect();
    let total: f64 = g.windows(2).map(|w| 0.5 * dy * (w[0] + w[1])).sum();
    let target = p * total;
    let mut acc = 0.0;
    for (i, w) in g.windows(2).enumerate() {
        let cell = 0.5 * dy * (w[0] + w[1]);
        if acc + cell >= target && cell > 0.0 {
            let frac = (target - acc) / cell;
            return (solution.y(i) + frac * dy).exp();
        }
        acc += cell;
    }
    solution.y_max().exp()
}

/// Entropy, dissipation and quantile diagnostics for every stored snapshot.
/// `z = 0` in `z_grid` yields the total mass.
pub fn dirac_diagnostics(
    solution: &LogGridSolution,
    kernel: &FragmentationKernel,
    z_grid: &[f64],
) -> Result<DiagnosticsReport> {
    if z_grid.iter().any(|z| !(*z >= 0.0) || !z.is_finite()) {
        return Err(Error::Domain("z grid must be finite and nonnegative".into()));
    }
    let dy = solution.dy;
    let mut rows = Vec::with_capacity(solution.snapshots.len());
    for snap in &solution.snapshots {
        let g: Vec<f64> = snap
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * (2.0 * solution.y(i)).exp())
            .collect();
        let mass = grid_mass(&snap.values, solution.y_min, dy);
        let mut entropy = Vec::with_capacity(z_grid.len());
        let mut dissipation = Vec::with_capacity(z_grid.len());
        for &z in z_grid {
            let y_lo = if z > 0.0 { z.ln() } else { f64::NEG_INFINITY };
            entropy.push(if z > 0.0 {
                upper_integral(&g, solution.y_min, dy, y_lo)
            } else {
                mass
            });
            // F_cum(z/x) jumps for atomic kernels, so the integral stays on the nodes
            let d = if z > 0.0 {
                let vals: Vec<f64> = g
                    .iter()
                    .enumerate()
                    .map(|(i, gi)| {
                        let y = solution.y(i);
                        if y < y_lo {
                            0.0
                        } else {
                            kernel.cumulative_first_moment((y_lo - y).exp()) * gi
                        }
                    })
                    .collect();
                -vals.windows(2).map(|w| 0.5 * dy * (w[0] + w[1])).sum::<f64>()
            } else {
                -mass
            };
            dissipation.push(d);
        }
        let tail_fraction = entropy.iter().map(|h| h / mass).collect();
        let quantile_interval = (mass_quantile(solution, snap, 0.05), mass_quantile(solution, snap, 0.95));
        rows.push(DiagnosticsRow {
            t: snap.t,
            mass,
            entropy,
            dissipation,
            tail_fraction,
            quantile_interval,
        });
    }
    let dissipation_nonpositive = rows.iter().all(|r| r.dissipation.iter().all(|d| *d <= 0.0));
    let entropy_nonincreasing = rows.windows(2).all(|w| {
        w[0].entropy
            .iter()
            .zip(&w[1].entropy)
            .all(|(a, b)| *b <= *a + 1e-9 * w[0].mass.abs())
    });
    let interval_shrinking = rows
        .windows(2)
        .all(|w| w[1].quantile_interval.1 < w[0].quantile_interval.1);
    Ok(DiagnosticsReport {
        z_grid: z_grid.to_vec(),
        rows,
        dissipation_nonpositive,
        entropy_nonincreasing,
        interval_shrinking,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBoundary {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Outermost `y` with `n ≥ fraction · max n`, refined linearly between nodes.
pub fn support_boundaries(solution: &LogGridSolution, fraction: f64) -> Vec<SupportBoundary> {
    solution
        .snapshots
        .iter()
        .filter_map(|snap| {
            let v = &snap.values;
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(max > 0.0) {
                return None;
            }
            let level = fraction * max;
            let first = v.iter().position(|x| *x >= level)?;
            let last = v.iter().rposition(|x| *x >= level)?;
            let lower = if first == 0 {
                solution.y(0)
            } else {
                let (a, b) = (v[first - 1], v[first]);
                solution.y(first - 1) + dy_frac(a, b, level) * solution.dy
            };
            let upper = if last + 1 == v.len() {
                solution.y(last)
            } else {
                let (a, b) = (v[last], v[last + 1]);
                solution.y(last) + dy_frac(a, b, level) * solution.dy
            };
            Some(SupportBoundary {
                t: snap.t,
                lower,
                upper,
            })
        })
        .collect()
}

fn dy_frac(a: f64, b: f64, level: f64) -> f64 {
    if (b - a).abs() < f64::MIN_POSITIVE {
        0.5
    } else {
        ((level - a) / (b - a)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Domain("linear fit needs at least two paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("linear fit with constant abscissa".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
