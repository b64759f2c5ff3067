//! Fixed-point solver for the integrated form `w = u0 + ∫_0^t A w ds`,
//! `w = e^t u`, on sub-intervals of length `τ = 1/2`. Time integrals use
//! Gauss–Legendre collocation; the gain `A` is the same push-forward
//! quadrature as the grid scheme.

use serde::{Deserialize, Serialize};

use super::grid::{grid_mass, interpolate_uniform};
use super::operator::FragmentationOperator;
use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::kernel::FragmentationKernel;
use crate::quadrature::{gauss_legendre, gregory_weights};

pub const SUB_INTERVAL: f64 = 0.5;
pub const COLLOCATION_NODES: usize = 8;
pub const PICARD_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;
/// Values below this fraction of the maximum are left out of the pointwise test.
pub const POINTWISE_FLOOR: f64 = 1e-10;
pub const POINTWISE_TOL: f64 = 1e-8;

/// Log-uniform grid `x_j = e^{y_min + j dy}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub dy: f64,
}

impl PicardGrid {
    pub fn len(&self) -> usize {
        ((self.y_max - self.y_min) / self.dy).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * self.dy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSolution {
    pub t: f64,
    pub grid: PicardGrid,
    /// `u(t, e^{y_j})`
    pub values: Vec<f64>,
    pub mass: f64,
    pub initial_mass: f64,
    /// Iterations used on each sub-interval.
    pub iterations: Vec<usize>,
}

impl PicardSolution {
    pub fn x_grid(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.grid.y(i).exp()).collect()
    }

    /// Cubic interpolation at `x`; zero above the grid.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        interpolate_uniform(&self.values, self.grid.y_min, self.grid.dy, x.ln())
    }
}

/// `∫_0^{c_m} ℓ_n(r) dr` for the Lagrange basis on the nodes `c`.
fn collocation_matrix(c: &[f64]) -> Vec<Vec<f64>> {
    let (gx, gw) = gauss_legendre(c.len() + 2);
    let basis = |n: usize, r: f64| -> f64 {
        c.iter()
            .enumerate()
            .filter(|&(k, _)| k != n)
            .map(|(_, ck)| (r - ck) / (c[n] - ck))
            .product()
    };
    c.iter()
        .map(|&cm| {
            (0..c.len())
                .map(|n| {
                    gx.iter()
                        .zip(&gw)
                        .map(|(x, w)| {
                            let r = 0.5 * cm * (x + 1.0);
                            0.5 * cm * w * basis(n, r)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn weighted_l1(diff: &[f64], grid: &PicardGrid, weights: &[f64]) -> f64 {
    diff.iter()
        .enumerate()
        .map(|(i, d)| {
            let x = grid.y(i).exp();
            weights[i] * d.abs() * (1.0 + x) * x
        })
        .sum::<f64>()
        * grid.dy
}

/// Solves for `u(t, ·)` on the log grid. `t = 0` returns `u0` sampled.
pub fn picard_solve(
    kernel: &FragmentationKernel,
    datum: &InitialDatum,
    t: f64,
    grid: &PicardGrid,
) -> Result<PicardSolution> {
    let u0: Vec<f64> = (0..grid.len()).map(|i| datum.evaluate_log(grid.y(i))).collect();
    picard_from_values(kernel, u0, t, grid)
}

pub fn picard_from_values(
    kernel: &FragmentationKernel,
    u0: Vec<f64>,
    t: f64,
    grid: &PicardGrid,
) -> Result<PicardSolution> {
    kernel.ensure_admissible()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite and nonnegative, got {t}")));
    }
    let len = grid.len();
    if !(grid.dy > 0.0) || len < 8 || u0.len() != len {
        return Err(Error::Domain(format!("invalid Picard grid {grid:?}")));
    }
    let op = FragmentationOperator::new(kernel, grid.dy)?;
    let (gx, gw) = gauss_legendre(COLLOCATION_NODES);
    let c: Vec<f64> = gx.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let b: Vec<f64> = gw.iter().map(|w| 0.5 * w).collect();
    let a = collocation_matrix(&c);
    let norm_w = gregory_weights(len);

    let initial_mass = grid_mass(&u0, grid.y_min, grid.dy);
    let mut u = u0;
    let mut iterations = Vec::new();
    let mut t0 = 0.0;
    while t0 < t * (1.0 - 1e-14) {
        let tau = SUB_INTERVAL.min(t - t0);
        // stage values w(c_m τ) with w = e^{s - t0} u
        let mut stages = vec![u.clone(); COLLOCATION_NODES];
        let mut gains = vec![vec![0.0; len]; COLLOCATION_NODES];
        let mut reference = f64::INFINITY;
        let mut done = false;
        for iter in 1..=MAX_ITERATIONS {
            for (s, g) in stages.iter().zip(gains.iter_mut()) {
                op.apply(s, g);
            }
            let mut change = 0.0;
            let mut scale = 0.0;
            let mut pointwise: f64 = 0.0;
            let mut diff = vec![0.0; len];
            for m in 0..COLLOCATION_NODES {
                for i in 0..len {
                    let mut acc = u[i];
                    for n in 0..COLLOCATION_NODES {
                        acc += tau * a[m][n] * gains[n][i];
                    }
                    diff[i] = acc - stages[m][i];
                    stages[m][i] = acc;
                }
                change += weighted_l1(&diff, grid, &norm_w);
                scale += weighted_l1(&stages[m], grid, &norm_w);
                // the weighted norm barely sees small sizes, which need more sweeps
                let floor = POINTWISE_FLOOR * stages[m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
                for (d, v) in diff.iter().zip(&stages[m]) {
                    if v.abs() > floor {
                        pointwise = pointwise.max(d.abs() / v.abs());
                    }
                }
            }
            let rel = change / scale.max(f64::MIN_POSITIVE);
            if !rel.is_finite() || (iter > 10 && rel > reference) {
                return Err(Error::Contraction(format!(
                    "Picard iterates diverge on [{t0}, {}] after {iter} iterations (change {rel:e})",
                    t0 + tau
                )));
            }
            reference = reference.min(rel.max(PICARD_TOL));
            if rel <= PICARD_TOL && pointwise <= POINTWISE_TOL {
                iterations.push(iter);
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Contraction(format!(
                "no convergence within {MAX_ITERATIONS} iterations on [{t0}, {}]",
                t0 + tau
            )));
        }
        for (s, g) in stages.iter().zip(gains.iter_mut()) {
            op.apply(s, g);
        }
        let decay = (-tau).exp();
        for i in 0..len {
            let w_end = u[i] + tau * (0..COLLOCATION_NODES).map(|n| b[n] * gains[n][i]).sum::<f64>();
            u[i] = decay * w_end;
        }
        t0 += tau;
    }
    let mass = grid_mass(&u, grid.y_min, grid.dy);
    Ok(PicardSolution {
        t,
        grid: *grid,
        values: u,
        mass,
        initial_mass,
        iterations,
    })
}
