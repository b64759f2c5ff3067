use std::fs;
use std::path::Path;

use fragasym::asymptotics::{leading_term, poisson_approx, theorem3b_series, AsymptoticValue, SeriesValue};
use fragasym::kernel::{AdmissibilityReport, ConditionHResult};
use fragasym::mellin::{inverse_mellin_detailed, inverse_mellin_u, InverseMellinResult};
use fragasym::regions::{
    classify_growth_frag, critical_curve_slope, f_exponent, f_zeros, g_exponent, region_report, CriticalCurve,
    GrowthFragClass, GrowthFragZone, RegionReport,
};
use fragasym::simulator::export::{write_mass_csv, write_snapshots_csv};
use fragasym::simulator::profiles::{
    rescaled_profiles, GridEvaluator, MellinEvaluator, ProfileOptions, SolutionEvaluator,
};
use fragasym::simulator::{
    dirac_diagnostics, growth_frag_transform, picard_solve, simulate_log_grid, GridConfig, LogGridSolution, PicardGrid,
};
use fragasym::{FragmentationKernel, InitialDatum};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{invalid, CliError, ExperimentConfig, Format, LogRange};

type CmdResult<T> = std::result::Result<T, CliError>;

/// Named artifacts of one command; the first is what goes to stdout without `--out`.
pub struct Output {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn single(name: &str, bytes: Vec<u8>) -> Self {
        Output {
            files: vec![(name.into(), bytes)],
        }
    }

    /// One artifact goes to `out` itself; several go into `out` as a directory.
    pub fn commit(&self, out: Option<&Path>) -> std::io::Result<()> {
        use std::io::Write;
        match out {
            None => std::io::stdout().write_all(&self.files[0].1),
            Some(p) if self.files.len() == 1 => fs::write(p, &self.files[0].1),
            Some(dir) => {
                fs::create_dir_all(dir)?;
                for (name, bytes) in &self.files {
                    fs::write(dir.join(name), bytes)?;
                }
                Ok(())
            }
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serialisable output");
    v.push(b'\n');
    v
}

fn regime_name<T: Serialize>(r: &T) -> String {
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

/// `mixed:to_zero` style label of a growth-fragmentation zone.
fn zone_name(zone: GrowthFragZone) -> String {
    match zone {
        GrowthFragZone::Mixed { max_growth_ray } => {
            format!("mixed:{}", regime_name(&max_growth_ray))
        }
        other => serde_json::to_value(other)
            .ok()
            .and_then(|v| v.get("zone").and_then(|z| z.as_str()).map(String::from))
            .unwrap_or_default(),
    }
}

/// Relative deviation symmetric in its arguments.
fn deviation(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

// ---------------------------------------------------------------- kernel

pub fn kernel_check(kernel: &FragmentationKernel, format: Format) -> (Output, bool) {
    let report: AdmissibilityReport = kernel.check_admissible();
    let bytes = match format {
        Format::Json => json(&report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .entries
                .iter()
                .map(|e| vec![e.name.clone(), num(e.value), e.pass.to_string(), e.detail.clone()])
                .collect();
            csv_table(&["check", "value", "pass", "detail"], &rows)
        }
    };
    (Output::single("admissibility", bytes), report.pass)
}

pub fn kernel_condition_h(kernel: &FragmentationKernel, format: Format) -> CmdResult<Output> {
    let h: ConditionHResult = kernel.condition_h()?;
    let bytes = match format {
        Format::Json => json(&h),
        Format::Csv => {
            let rows: Vec<Vec<String>> = h
                .exponents
                .iter()
                .zip(&h.locations)
                .map(|(e, l)| vec![num(*l), e.to_string()])
                .collect();
            let mut out = format!(
                "# satisfied={} theta={} v_star={}\n",
                h.satisfied,
                opt(h.theta),
                opt(h.v_star)
            )
            .into_bytes();
            out.extend(csv_table(&["location", "exponent"], &rows));
            out
        }
    };
    Ok(Output::single("condition_h", bytes))
}

// ---------------------------------------------------------------- simulate

pub struct SimulateJob {
    kernel: FragmentationKernel,
    datum: InitialDatum,
    grid: GridConfig,
    z: Vec<f64>,
    format: Format,
}

pub const DEFAULT_Z: [f64; 4] = [0.0, 1e-3, 1e-2, 0.1];

pub fn prepare_simulate(cfg: &ExperimentConfig) -> CmdResult<SimulateJob> {
    let kernel = cfg.kernel()?;
    let datum = cfg.datum()?;
    let grid = cfg
        .grid
        .ok_or_else(|| invalid("simulate needs a grid (--ymin --ymax --dy --dt --tend or \"grid\")"))?;
    grid.validate(&kernel)?;
    let z = cfg.z.clone().unwrap_or_else(|| DEFAULT_Z.to_vec());
    if z.iter().any(|z| !(z.is_finite() && *z >= 0.0)) {
        return Err(invalid("entropy parameters z must be finite and nonnegative"));
    }
    Ok(SimulateJob {
        kernel,
        datum,
        grid,
        z,
        format: cfg.format(),
    })
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    dt: f64,
    integrator: &'a str,
    points: usize,
    overflow_time: Option<f64>,
    warnings: &'a [String],
}

pub fn run_simulate(job: &SimulateJob) -> CmdResult<Output> {
    let sol: LogGridSolution = simulate_log_grid(&job.kernel, &job.datum, &job.grid)?;
    let diag = dirac_diagnostics(&sol, &job.kernel, &job.z)?;
    let mut files = Vec::new();
    match job.format {
        Format::Csv => {
            let mut mass = Vec::new();
            write_mass_csv(&sol, &mut mass).expect("in-memory write");
            let mut snaps = Vec::new();
            write_snapshots_csv(&sol, &mut snaps).expect("in-memory write");
            files.push(("mass.csv".to_string(), mass));
            files.push(("snapshots.csv".to_string(), snaps));
            let summary = SimulationSummary {
                dt: sol.dt,
                integrator: &sol.integrator,
                points: sol.len,
                overflow_time: sol.overflow_time,
                warnings: &sol.warnings,
            };
            files.push(("summary.json".to_string(), json(&summary)));
        }
        Format::Json => files.push(("solution.json".to_string(), json(&sol))),
    }
    files.push(("diagnostics.json".to_string(), json(&diag)));
    Ok(Output { files })
}

// ---------------------------------------------------------------- solve-mellin

pub struct PointJob {
    kernel: FragmentationKernel,
    datum: InitialDatum,
    times: Vec<f64>,
    sizes: Vec<f64>,
    k_max: Option<usize>,
    format: Format,
}

pub fn prepare_points(cfg: &ExperimentConfig) -> CmdResult<PointJob> {
    let kernel = cfg.kernel()?;
    kernel.ensure_admissible()?;
    Ok(PointJob {
        kernel,
        datum: cfg.datum()?,
        times: cfg.times()?,
        sizes: cfg.sizes(None)?,
        k_max: cfg.k_max,
        format: cfg.format(),
    })
}

fn grid_points(times: &[f64], sizes: &[f64]) -> Vec<(f64, f64)> {
    times.iter().flat_map(|&t| sizes.iter().map(move |&x| (t, x))).collect()
}

#[derive(Serialize)]
struct MellinRow {
    t: f64,
    x: f64,
    #[serde(flatten)]
    result: InverseMellinResult,
}

pub fn run_solve_mellin(job: &PointJob) -> CmdResult<Output> {
    let rows: Vec<MellinRow> = grid_points(&job.times, &job.sizes)
        .into_par_iter()
        .map(|(t, x)| {
            inverse_mellin_detailed(&job.datum, &job.kernel, t, x, None).map(|result| MellinRow { t, x, result })
        })
        .collect::<Result<_, _>>()?;
    let bytes = match job.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.t),
                        num(r.x),
                        num(r.result.value),
                        num(r.result.imag_residue),
                        num(r.result.abscissa),
                        num(r.result.half_height),
                        r.result.nodes.to_string(),
                    ]
                })
                .collect();
            csv_table(
                &["t", "x", "u", "imag_residue", "abscissa", "half_height", "nodes"],
                &table,
            )
        }
    };
    Ok(Output::single("mellin", bytes))
}

// ---------------------------------------------------------------- asymptote

#[derive(Serialize)]
struct AsymptoteRow {
    t: f64,
    x: f64,
    leading: AsymptoticValue,
    series: Option<SeriesValue>,
    poisson: Option<f64>,
}

pub fn run_asymptote(job: &PointJob) -> CmdResult<Output> {
    // the lattice sums need Condition H; report them only where it holds
    let theta = if job.kernel.is_discrete() {
        let h = job.kernel.condition_h()?;
        if h.satisfied {
            h.theta
        } else {
            None
        }
    } else {
        None
    };
    if job.k_max.is_some() && theta.is_none() {
        return Err(invalid("--kmax needs a purely discrete kernel satisfying Condition H"));
    }
    let rows: Vec<AsymptoteRow> = grid_points(&job.times, &job.sizes)
        .into_par_iter()
        .map(|(t, x)| -> CmdResult<AsymptoteRow> {
            let leading = leading_term(&job.datum, &job.kernel, t, x)?;
            let series = match job.k_max {
                Some(k) => Some(theorem3b_series(&job.datum, &job.kernel, t, x, Some(k))?),
                None => None,
            };
            let poisson = match theta {
                Some(th) => Some(poisson_approx(&job.datum, th, &job.kernel, t, x)?),
                None => None,
            };
            Ok(AsymptoteRow {
                t,
                x,
                leading,
                series,
                poisson,
            })
        })
        .collect::<CmdResult<_>>()?;
    let bytes = match job.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.t),
                        num(r.x),
                        regime_name(&r.leading.regime),
                        num(r.leading.value),
                        opt(r.leading.saddle.map(|s| s.s_plus)),
                        opt(r.series.as_ref().map(|s| s.asymptotic.value)),
                        opt(r.series.as_ref().map(|s| s.tail_bound)),
                        opt(r.poisson),
                    ]
                })
                .collect();
            csv_table(
                &[
                    "t",
                    "x",
                    "regime",
                    "leading",
                    "s_plus",
                    "series",
                    "tail_bound",
                    "poisson",
                ],
                &table,
            )
        }
    };
    Ok(Output::single("asymptote", bytes))
}

// ---------------------------------------------------------------- regions

pub struct RegionsJob {
    kernel: FragmentationKernel,
    datum: InitialDatum,
    c: Option<f64>,
}

pub fn prepare_regions(cfg: &ExperimentConfig) -> CmdResult<RegionsJob> {
    let kernel = cfg.kernel()?;
    kernel.ensure_admissible()?;
    let c = match cfg.c {
        Some(_) => Some(cfg.speed()?),
        None => None,
    };
    Ok(RegionsJob {
        kernel,
        datum: cfg.datum()?,
        c,
    })
}

#[derive(Serialize)]
struct RegionsDocument {
    #[serde(flatten)]
    report: RegionReport,
    critical_curve: CriticalCurve,
    growth_frag: Option<GrowthFragClass>,
}

/// Samples of `s` spanning both zeros of `F` with a margin of one on each side.
fn curve_abscissae(kernel: &FragmentationKernel, p_bar: f64, q_bar: f64) -> Vec<f64> {
    let lo = (p_bar - 1.0).max(kernel.lower_abscissa() + 0.05);
    let hi = q_bar + 1.0;
    let n = 200;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

pub fn run_regions(job: &RegionsJob) -> CmdResult<Output> {
    let report = region_report(&job.kernel, &job.datum)?;
    let growth_frag = match job.c {
        Some(c) => Some(classify_growth_frag(&job.kernel, &job.datum, c)?),
        None => None,
    };
    let (p_bar, q_bar) = f_zeros(&job.kernel)?;
    let s = curve_abscissae(&job.kernel, p_bar, q_bar);
    let g = |p: f64, s: f64| -> CmdResult<String> {
        if p.is_finite() {
            Ok(num(g_exponent(&job.kernel, p, s)?))
        } else {
            Ok(String::new())
        }
    };
    let mut rows = Vec::with_capacity(s.len());
    for &si in &s {
        rows.push(vec![
            num(si),
            num(f_exponent(&job.kernel, si)?),
            g(report.p0, si)?,
            g(report.q0, si)?,
        ]);
    }
    let doc = RegionsDocument {
        critical_curve: critical_curve_slope(&job.kernel),
        report,
        growth_frag,
    };
    Ok(Output {
        files: vec![
            ("regions.json".into(), json(&doc)),
            ("curves.csv".into(), csv_table(&["s", "F", "G_p0", "G_q0"], &rows)),
        ],
    })
}

// ---------------------------------------------------------------- compare

/// Grid shared by the two direct solvers when the config gives none.
pub const COMPARE_GRID: GridConfig = GridConfig {
    y_min: -30.0,
    y_max: 14.0,
    dy: 0.02,
    dt: 0.01,
    t_end: 1.0,
    snapshot_every: None,
};
pub const COMPARE_POINTS: usize = 64;
/// Rows with `u_mellin` below this fraction of the maximum are marked unreliable.
pub const RELIABLE_FRACTION: f64 = 1e-8;

pub struct CompareJob {
    kernel: FragmentationKernel,
    datum: InitialDatum,
    times: Vec<f64>,
    sizes: Vec<f64>,
    grid: GridConfig,
    format: Format,
}

pub fn prepare_compare(cfg: &ExperimentConfig) -> CmdResult<CompareJob> {
    let kernel = cfg.kernel()?;
    let datum = cfg.datum()?;
    let times = cfg.times()?;
    let grid = cfg.grid.unwrap_or(COMPARE_GRID);
    // the default sizes keep clear of both grid ends
    let fallback = LogRange {
        log_min: grid.y_min + 0.4 * (grid.y_max - grid.y_min),
        log_max: grid.y_max - 8.0f64.min(0.2 * (grid.y_max - grid.y_min)),
        count: COMPARE_POINTS,
    };
    let sizes = cfg.sizes(Some(fallback))?;
    for &t in &times {
        GridConfig { t_end: t, ..grid }.validate(&kernel)?;
    }
    if let Some(x) = sizes.iter().find(|x| !(x.ln() >= grid.y_min && x.ln() <= grid.y_max)) {
        return Err(invalid(format!(
            "x = {x} lies outside the solver grid [e^{}, e^{}]",
            grid.y_min, grid.y_max
        )));
    }
    Ok(CompareJob {
        kernel,
        datum,
        times,
        sizes,
        grid,
        format: cfg.format(),
    })
}

#[derive(Serialize)]
struct CompareRow {
    t: f64,
    x: f64,
    u_grid: f64,
    u_picard: f64,
    u_mellin: f64,
    u_asymptotic: Option<f64>,
    regime: Option<String>,
    dev_grid_picard: f64,
    dev_grid_mellin: f64,
    dev_picard_mellin: f64,
    reliable: bool,
}

/// `u_grid`, `u_picard`, `u_mellin` and the leading term with its regime.
type SolverValues = (f64, f64, f64, Option<(f64, String)>);

fn compare_at(job: &CompareJob, t: f64) -> CmdResult<Vec<CompareRow>> {
    let cfg = GridConfig {
        t_end: t,
        snapshot_every: None,
        ..job.grid
    };
    let (grid, picard) = rayon::join(
        || simulate_log_grid(&job.kernel, &job.datum, &cfg),
        || {
            let pg = PicardGrid {
                y_min: cfg.y_min,
                y_max: cfg.y_max,
                dy: cfg.dy,
            };
            picard_solve(&job.kernel, &job.datum, t, &pg)
        },
    );
    let (grid, picard) = (grid?, picard?);
    let snap = grid.last();
    let values: Vec<SolverValues> = job
        .sizes
        .par_iter()
        .map(|&x| -> CmdResult<_> {
            let ug = grid.interpolate(snap, x.ln())?;
            let up = picard.evaluate(x)?;
            let um = inverse_mellin_u(&job.datum, &job.kernel, t, x, None)?;
            // the asymptotic column is informative; missing tails leave it blank
            let ua = leading_term(&job.datum, &job.kernel, t, x)
                .ok()
                .map(|a| (a.value, regime_name(&a.regime)));
            Ok((ug, up, um, ua))
        })
        .collect::<CmdResult<_>>()?;
    let max = values.iter().map(|v| v.2.abs()).fold(0.0, f64::max);
    Ok(job
        .sizes
        .iter()
        .zip(values)
        .map(|(&x, (ug, up, um, ua))| CompareRow {
            t,
            x,
            u_grid: ug,
            u_picard: up,
            u_mellin: um,
            u_asymptotic: ua.as_ref().map(|a| a.0),
            regime: ua.map(|a| a.1),
            dev_grid_picard: deviation(ug, up),
            dev_grid_mellin: deviation(ug, um),
            dev_picard_mellin: deviation(up, um),
            reliable: um > RELIABLE_FRACTION * max,
        })
        .collect())
}

pub fn run_compare(job: &CompareJob) -> CmdResult<Output> {
    let per_t: Vec<Vec<CompareRow>> = job
        .times
        .par_iter()
        .map(|&t| compare_at(job, t))
        .collect::<CmdResult<_>>()?;
    let rows: Vec<CompareRow> = per_t.into_iter().flatten().collect();
    let bytes = match job.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.t),
                        num(r.x),
                        num(r.u_grid),
                        num(r.u_picard),
                        num(r.u_mellin),
                        opt(r.u_asymptotic),
                        r.regime.clone().unwrap_or_default(),
                        num(r.dev_grid_picard),
                        num(r.dev_grid_mellin),
                        num(r.dev_picard_mellin),
                        r.reliable.to_string(),
                    ]
                })
                .collect();
            csv_table(
                &[
                    "t",
                    "x",
                    "u_grid",
                    "u_picard",
                    "u_mellin",
                    "u_asymptotic",
                    "regime",
                    "dev_grid_picard",
                    "dev_grid_mellin",
                    "dev_picard_mellin",
                    "reliable",
                ],
                &table,
            )
        }
    };
    Ok(Output::single("compare", bytes))
}

// ---------------------------------------------------------------- profiles

pub struct ProfilesJob {
    kernel: FragmentationKernel,
    datum: InitialDatum,
    times: Vec<f64>,
    grid: Option<GridConfig>,
    opts: ProfileOptions,
    format: Format,
}

pub fn prepare_profiles(cfg: &ExperimentConfig) -> CmdResult<ProfilesJob> {
    let kernel = cfg.kernel()?;
    kernel.ensure_admissible()?;
    let times = cfg.times()?;
    let mut opts = ProfileOptions::default();
    if let Some(n) = cfg.samples {
        if n < 8 {
            return Err(invalid("profiles need at least 8 samples"));
        }
        opts.samples = n;
    }
    // with a grid the profiles come from the simulator, otherwise from the Mellin integral
    if let Some(g) = cfg.grid {
        let t_end = times.iter().copied().fold(0.0, f64::max);
        GridConfig { t_end, ..g }.validate(&kernel)?;
    }
    Ok(ProfilesJob {
        kernel,
        datum: cfg.datum()?,
        times,
        grid: cfg.grid,
        opts,
        format: cfg.format(),
    })
}

pub fn run_profiles(job: &ProfilesJob) -> CmdResult<Output> {
    let profiles = job
        .times
        .iter()
        .map(|&t| {
            let eval: Box<dyn SolutionEvaluator> = match job.grid {
                Some(g) => Box::new(GridEvaluator {
                    solution: simulate_log_grid(
                        &job.kernel,
                        &job.datum,
                        &GridConfig {
                            t_end: t,
                            snapshot_every: None,
                            ..g
                        },
                    )?,
                }),
                None => Box::new(MellinEvaluator {
                    datum: job.datum.clone(),
                    kernel: job.kernel.clone(),
                }),
            };
            rescaled_profiles(&job.datum, &job.kernel, eval.as_ref(), t, job.opts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bytes = match job.format {
        Format::Json => json(&profiles),
        Format::Csv => {
            let mut table = Vec::new();
            for p in &profiles {
                for (name, pts) in [("r", &p.r), ("r_tilde", &p.r_tilde)] {
                    for (z, v) in pts.iter() {
                        table.push(vec![num(p.t), name.to_string(), num(*z), num(*v)]);
                    }
                }
            }
            csv_table(&["t", "profile", "z", "value"], &table)
        }
    };
    Ok(Output::single("profiles", bytes))
}

// ---------------------------------------------------------------- growth-frag

pub struct GrowthFragJob {
    points: PointJob,
    c: f64,
}

pub fn prepare_growth_frag(cfg: &ExperimentConfig) -> CmdResult<GrowthFragJob> {
    let c = cfg.speed()?;
    Ok(GrowthFragJob {
        points: prepare_points(cfg)?,
        c,
    })
}

#[derive(Serialize)]
struct GrowthFragSampleRow {
    t: f64,
    x: f64,
    v: f64,
}

#[derive(Serialize)]
struct GrowthFragDocument {
    classification: GrowthFragClass,
    samples: Vec<GrowthFragSampleRow>,
}

pub fn run_growth_frag(job: &GrowthFragJob) -> CmdResult<Output> {
    let p = &job.points;
    let classification = classify_growth_frag(&p.kernel, &p.datum, job.c)?;
    let eval = MellinEvaluator {
        datum: p.datum.clone(),
        kernel: p.kernel.clone(),
    };
    let samples: Vec<GrowthFragSampleRow> = grid_points(&p.times, &p.sizes)
        .into_par_iter()
        .map(|(t, x)| growth_frag_transform(&eval, job.c, t, x).map(|v| GrowthFragSampleRow { t, x, v }))
        .collect::<Result<_, _>>()?;
    let zone = zone_name(classification.zone);
    let bytes = match p.format {
        Format::Json => json(&GrowthFragDocument {
            classification,
            samples,
        }),
        Format::Csv => {
            let table: Vec<Vec<String>> = samples
                .iter()
                .map(|s| vec![num(s.t), num(s.x), num(s.v), zone.clone()])
                .collect();
            csv_table(&["t", "x", "v", "zone"], &table)
        }
    };
    Ok(Output::single("growth_frag", bytes))
}
