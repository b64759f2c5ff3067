//! Method-of-lines solver for `∂t n + n = A n` on a uniform `y`-grid with
//! classical RK4 time stepping.

use serde::{Deserialize, Serialize};

use super::operator::FragmentationOperator;
use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::kernel::FragmentationKernel;
use crate::quadrature::gregory_weights;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub y_min: f64,
    pub y_max: f64,
    pub dy: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Spacing of stored snapshots and mass records; `None` keeps only `t = 0` and `t_end`.
    #[serde(default)]
    pub snapshot_every: Option<f64>,
}

impl GridConfig {
    /// Grid used to reproduce the mitosis experiment: `y ∈ [-60, 5]`,
    /// `dy = log 2 / 16`, `dt = dy / 4`.
    pub fn mitosis_default(t_end: f64) -> Self {
        let dy = 2f64.ln() / 16.0;
        GridConfig {
            y_min: -60.0,
            y_max: 5.0,
            dy,
            dt: dy / 4.0,
            t_end,
            snapshot_every: Some(0.5),
        }
    }

    /// Checks the configuration against `kernel`; returns the number of grid points.
    pub fn validate(&self, kernel: &FragmentationKernel) -> Result<usize> {
        validate(kernel, self)
    }
}

/// Largest `dt (K(1) + 1)` accepted by the integrator.
pub const STABILITY_LIMIT: f64 = 0.5;
/// Relative mass near `y_min` that triggers the overflow warning.
pub const OVERFLOW_MASS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRecord {
    pub t: f64,
    pub mass: f64,
    /// Mass that has left through `y_min` up to `t`.
    pub leak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGridSolution {
    pub y_min: f64,
    pub dy: f64,
    pub len: usize,
    pub dt: f64,
    pub integrator: String,
    pub snapshots: Vec<Snapshot>,
    pub mass_series: Vec<MassRecord>,
    /// First recorded time at which more than 1e-8 of the mass sat within `5 dy` of `y_min`.
    pub overflow_time: Option<f64>,
    pub warnings: Vec<String>,
}

impl LogGridSolution {
    pub fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * self.dy
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.len - 1)
    }

    pub fn y_grid(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.y(i)).collect()
    }

    /// Snapshot stored at time `t` (within 1e-9).
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("solution has snapshots")
    }

    /// Cubic interpolation of a snapshot at `y`; zero above the grid.
    pub fn interpolate(&self, snapshot: &Snapshot, y: f64) -> Result<f64> {
        interpolate_uniform(&snapshot.values, self.y_min, self.dy, y)
    }
}

/// Four-point Lagrange interpolation on uniform samples; zero above the top.
pub fn interpolate_uniform(values: &[f64], y0: f64, dy: f64, y: f64) -> Result<f64> {
    let len = values.len();
    let top = y0 + (len - 1) as f64 * dy;
    if y > top + 1e-12 * dy {
        return Ok(0.0);
    }
    if y < y0 - 1e-12 * dy || !y.is_finite() {
        return Err(Error::Range(format!("y = {y} below the grid start {y0}")));
    }
    let m = ((y - y0) / dy).clamp(0.0, (len - 1) as f64);
    let base = (m.floor() as usize).clamp(1, len.saturating_sub(3).max(1));
    let f = m - base as f64;
    let at = |k: isize| -> f64 {
        let idx = base as isize + k;
        if idx < 0 || idx as usize >= len {
            0.0
        } else {
            values[idx as usize]
        }
    };
    let c = [
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ];
    Ok(c[0] * at(-1) + c[1] * at(0) + c[2] * at(1) + c[3] * at(2))
}

/// `M = ∫ e^{2y} n dy` with fourth-order Gregory weights.
pub fn grid_mass(values: &[f64], y_min: f64, dy: f64) -> f64 {
    let w = gregory_weights(values.len());
    dy * values
        .iter()
        .zip(&w)
        .enumerate()
        .map(|(i, (v, w))| w * v * (2.0 * (y_min + i as f64 * dy)).exp())
        .sum::<f64>()
}

struct Rk4 {
    op: FragmentationOperator,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Rk4 {
    fn new(op: FragmentationOperator, len: usize) -> Self {
        Rk4 {
            op,
            k: [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            stage: vec![0.0; len],
        }
    }

    /// `out = A n - n`
    fn rhs(op: &FragmentationOperator, n: &[f64], out: &mut [f64]) {
        op.apply(n, out);
        for (o, v) in out.iter_mut().zip(n) {
            *o -= v;
        }
    }

    fn step(&mut self, n: &mut [f64], dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        Self::rhs(&self.op, n, k1);
        for i in 0..n.len() {
            self.stage[i] = n[i] + 0.5 * dt * k1[i];
        }
        Self::rhs(&self.op, &self.stage, k2);
        for i in 0..n.len() {
            self.stage[i] = n[i] + 0.5 * dt * k2[i];
        }
        Self::rhs(&self.op, &self.stage, k3);
        for i in 0..n.len() {
            self.stage[i] = n[i] + dt * k3[i];
        }
        Self::rhs(&self.op, &self.stage, k4);
        for i in 0..n.len() {
            n[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn validate(kernel: &FragmentationKernel, cfg: &GridConfig) -> Result<usize> {
    kernel.ensure_admissible()?;
    if !(cfg.dy > 0.0)
        || !(cfg.dt > 0.0)
        || !(cfg.t_end >= 0.0)
        || !(cfg.y_max > cfg.y_min)
        || !cfg.y_min.is_finite()
        || !cfg.y_max.is_finite()
        || cfg.snapshot_every.is_some_and(|s| !(s > 0.0))
    {
        return Err(Error::Domain(format!("invalid grid configuration {cfg:?}")));
    }
    let k1 = kernel.mellin_real(1.0)?;
    if cfg.dt * (k1 + 1.0) > STABILITY_LIMIT {
        return Err(Error::Stability(format!(
            "dt (K(1) + 1) = {} exceeds {STABILITY_LIMIT}; use dt <= {}",
            cfg.dt * (k1 + 1.0),
            STABILITY_LIMIT / (k1 + 1.0)
        )));
    }
    let len = ((cfg.y_max - cfg.y_min) / cfg.dy).round() as usize + 1;
    if len < 8 {
        return Err(Error::Domain("grid needs at least 8 points".into()));
    }
    Ok(len)
}

/// Integrates the fragmentation equation in `y = log x` from `u0` to `t_end`.
pub fn simulate_log_grid(
    kernel: &FragmentationKernel,
    datum: &InitialDatum,
    cfg: &GridConfig,
) -> Result<LogGridSolution> {
    let len = validate(kernel, cfg)?;
    let n0: Vec<f64> = (0..len)
        .map(|i| datum.evaluate_log(cfg.y_min + i as f64 * cfg.dy))
        .collect();
    let mut solution = run(kernel, n0, cfg)?;
    let m0 = solution.mass_series[0].mass;
    if (m0 - datum.mass()).abs() > 1e-6 * datum.mass() {
        solution.warnings.insert(
            0,
            format!(
                "grid mass of u0 is {m0:e} against {:e}: the grid does not cover the datum",
                datum.mass()
            ),
        );
    }
    Ok(solution)
}

/// Same as [`simulate_log_grid`] from explicit initial grid values.
pub fn simulate_from_values(kernel: &FragmentationKernel, n0: Vec<f64>, cfg: &GridConfig) -> Result<LogGridSolution> {
    let len = validate(kernel, cfg)?;
    if n0.len() != len {
        return Err(Error::Domain(format!(
            "expected {len} initial values, got {}",
            n0.len()
        )));
    }
    run(kernel, n0, cfg)
}

fn run(kernel: &FragmentationKernel, mut n: Vec<f64>, cfg: &GridConfig) -> Result<LogGridSolution> {
    let len = n.len();
    let op = FragmentationOperator::new(kernel, cfg.dy)?;
    let mut rk = Rk4::new(op, len);
    // leak density: fragments of a particle at y that land below y_min
    let leak_weight: Vec<f64> = (0..len)
        .map(|i| {
            let y = cfg.y_min + i as f64 * cfg.dy;
            kernel.cumulative_first_moment((cfg.y_min - y).exp().min(1.0)) * (2.0 * y).exp()
        })
        .collect();
    let gw = gregory_weights(len);
    let leak_rate = |n: &[f64]| -> f64 {
        cfg.dy
            * n.iter()
                .zip(&leak_weight)
                .zip(&gw)
                .map(|((v, l), g)| v * l * g)
                .sum::<f64>()
    };
    let edge = 5.min(len);
    let near_bottom = |n: &[f64]| -> f64 { grid_mass(&n[..edge.max(2)], cfg.y_min, cfg.dy) };

    // record times: multiples of the snapshot interval, then t_end
    let mut targets = Vec::new();
    if let Some(s) = cfg.snapshot_every {
        let mut k = 1usize;
        while k as f64 * s < cfg.t_end * (1.0 - 1e-12) {
            targets.push(k as f64 * s);
            k += 1;
        }
    }
    if cfg.t_end > 0.0 {
        targets.push(cfg.t_end);
    }

    let mut snapshots = vec![Snapshot {
        t: 0.0,
        values: n.clone(),
    }];
    let m0 = grid_mass(&n, cfg.y_min, cfg.dy);
    let mut mass_series = vec![MassRecord {
        t: 0.0,
        mass: m0,
        leak: 0.0,
    }];
    let mut leaked = 0.0;
    let mut rate = leak_rate(&n);
    let mut overflow_time = None;
    let mut warnings = Vec::new();
    let mut dt = cfg.dt;
    let mut t_prev = 0.0;
    for t in targets {
        let steps = ((t - t_prev) / cfg.dt).ceil().max(1.0) as usize;
        let h = (t - t_prev) / steps as f64;
        dt = h;
        for _ in 0..steps {
            rk.step(&mut n, h);
            let new_rate = leak_rate(&n);
            leaked += 0.5 * h * (rate + new_rate);
            rate = new_rate;
        }
        t_prev = t;
        let mass = grid_mass(&n, cfg.y_min, cfg.dy);
        if overflow_time.is_none() && near_bottom(&n).abs() > OVERFLOW_MASS * m0.abs() {
            overflow_time = Some(t);
            warnings.push(format!(
                "support overflow: more than {OVERFLOW_MASS:e} of the mass within 5 dy of y_min at t = {t}"
            ));
        }
        if n.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stability(format!("non-finite values at t = {t}")));
        }
        snapshots.push(Snapshot { t, values: n.clone() });
        mass_series.push(MassRecord { t, mass, leak: leaked });
    }
    Ok(LogGridSolution {
        y_min: cfg.y_min,
        dy: cfg.dy,
        len,
        dt,
        integrator: "rk4".into(),
        snapshots,
        mass_series,
        overflow_time,
        warnings,
    })
}

/// One RK4 step from `n_σ(0, y) = e^{-σy}`, compared with the exact
/// self-similar solution `e^{-σy} e^{(K(σ)-1) dt}`: returns the largest
/// relative local error per unit time over `y ∈ [probe_lo, probe_hi]`.
pub fn self_similar_residual(
    kernel: &FragmentationKernel,
    sigma: f64,
    y_min: f64,
    y_max: f64,
    dy: f64,
    dt: f64,
    probe: (f64, f64),
) -> Result<f64> {
    let cfg = GridConfig {
        y_min,
        y_max,
        dy,
        dt,
        t_end: dt,
        snapshot_every: None,
    };
    let len = validate(kernel, &cfg)?;
    let n0: Vec<f64> = (0..len).map(|i| (-sigma * (y_min + i as f64 * dy)).exp()).collect();
    let mut n = n0.clone();
    let mut rk = Rk4::new(FragmentationOperator::new(kernel, dy)?, len);
    rk.step(&mut n, dt);
    let growth = ((kernel.mellin_real(sigma)? - 1.0) * dt).exp();
    let mut worst: f64 = 0.0;
    for i in 0..len {
        let y = y_min + i as f64 * dy;
        if y >= probe.0 && y <= probe.1 {
            worst = worst.max((n[i] / (n0[i] * growth) - 1.0).abs() / dt);
        }
    }
    Ok(worst)
}
