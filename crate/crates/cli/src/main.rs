//! `fragasym` command-line experiments.
//!
//! Every subcommand loads an optional JSON config, applies flag overrides,
//! validates everything, computes into memory and only then writes output.
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fragasym::kernel::KernelSpec;
use fragasym::simulator::GridConfig;

use commands::Output;
use config::{invalid, read, CliError, ExperimentConfig, Format, SpecSource};

#[derive(Parser)]
#[command(name = "fragasym", version, about = "Fragmentation equation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel checks
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Run the log-grid simulator
    Simulate(Common),
    /// Inverse-Mellin values on a (t, x) grid
    SolveMellin(Common),
    /// Leading terms, lattice series and Poisson sums with regime tags
    Asymptote(Common),
    /// Growth/decay regions and F/G curves
    Regions(Common),
    /// Grid, Picard, Mellin and asymptotic values side by side
    Compare(Common),
    /// Rescaled profiles r and r̃
    Profiles(Common),
    /// v(t, x) of the growth-fragmentation transform with its zone
    GrowthFrag(Common),
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Admissibility report; exits 1 if a check fails
    Check(KernelArgs),
    /// Commensurability of the atom locations
    ConditionH(KernelArgs),
}

#[derive(Args)]
struct KernelArgs {
    /// Kernel spec (JSON)
    spec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON); flags override its fields
    config: Option<PathBuf>,
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    datum: Option<PathBuf>,
    /// Times, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    /// Sizes, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Output file, or directory for commands with several artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, allow_negative_numbers = true)]
    ymin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    ymax: Option<f64>,
    #[arg(long)]
    dy: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.kernel {
            cfg.kernel = Some(SpecSource::File(p.clone()));
        }
        if let Some(p) = &self.datum {
            cfg.datum = Some(SpecSource::File(p.clone()));
        }
        if !self.t.is_empty() {
            cfg.t = self.t.clone();
        }
        if !self.x.is_empty() {
            cfg.x = self.x.clone();
            cfg.x_grid = None;
        }
        cfg.c = self.c.or(cfg.c);
        cfg.k_max = self.kmax.or(cfg.k_max);
        cfg.out = self.out.clone().or(cfg.out);
        cfg.format = self.format.or(cfg.format);
        let flags = [self.ymin, self.ymax, self.dy, self.dt, self.tend];
        if flags.iter().any(Option::is_some) {
            let base = cfg.grid.or_else(|| {
                let t = self.tend.or_else(|| cfg.t.iter().copied().reduce(f64::max))?;
                Some(GridConfig::mitosis_default(t))
            });
            let mut g = base.ok_or_else(|| invalid("grid flags need --tend, --t or a \"grid\" to start from"))?;
            g.y_min = self.ymin.unwrap_or(g.y_min);
            g.y_max = self.ymax.unwrap_or(g.y_max);
            g.dy = self.dy.unwrap_or(g.dy);
            g.dt = self.dt.unwrap_or(g.dt);
            g.t_end = self.tend.unwrap_or(g.t_end);
            cfg.grid = Some(g);
        }
        let kernel_file = match &cfg.kernel {
            Some(SpecSource::File(p)) => Some(p),
            _ => None,
        };
        let datum_file = match &cfg.datum {
            Some(SpecSource::File(p)) => Some(p),
            _ => None,
        };
        if let Some(p) = [kernel_file, datum_file].into_iter().flatten().find(|p| !p.is_file()) {
            return Err(invalid(format!("file not found: {}", p.display())));
        }
        Ok(cfg)
    }
}

/// Builds the worker pool from `FRAGASYM_THREADS`, if set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FRAGASYM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| invalid(format!("FRAGASYM_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| invalid(format!("cannot build the worker pool: {e}")))
}

fn kernel_spec(args: &KernelArgs) -> Result<fragasym::FragmentationKernel, CliError> {
    Ok(KernelSpec::from_json(&read(&args.spec)?)?.build()?)
}

/// Output and the exit code to use once it is written.
fn run(cli: Cli) -> Result<(Output, Option<PathBuf>, u8), CliError> {
    match cli.command {
        Command::Kernel(KernelCommand::Check(a)) => {
            let k = kernel_spec(&a)?;
            let (out, pass) = commands::kernel_check(&k, a.format.unwrap_or(Format::Json));
            Ok((out, a.out, if pass { 0 } else { 1 }))
        }
        Command::Kernel(KernelCommand::ConditionH(a)) => {
            let k = kernel_spec(&a)?;
            Ok((
                commands::kernel_condition_h(&k, a.format.unwrap_or(Format::Json))?,
                a.out,
                0,
            ))
        }
        Command::Simulate(c) => {
            let cfg = c.resolve()?;
            let job = commands::prepare_simulate(&cfg)?;
            Ok((commands::run_simulate(&job)?, cfg.out, 0))
        }
        Command::SolveMellin(c) => {
            let cfg = c.resolve()?;
            let job = commands::prepare_points(&cfg)?;
            Ok((commands::run_solve_mellin(&job)?, cfg.out, 0))
        }
        Command::Asymptote(c) => {
            let cfg = c.resolve()?;
            let job = commands::prepare_points(&cfg)?;
            Ok((commands::run_asymptote(&job)?, cfg.out, 0))
        }
        Command::Regions(c) => {
            let cfg = c.resolve()?;
            let job = commands::prepare_regions(&cfg)?;
            Ok((commands::run_regions(&job)?, cfg.out, 0))
        }
        Command::Compare(c) => {
            let cfg = c.resolve()?;
            let job = commands::prepare_compare(&cfg)?;
            Ok((commands::run_compare(&job)?, cfg.out, 0))
        }
        Command::Profiles(c) => {
            let cfg = c.resolve()?;
            let job = commands::prepare_profiles(&cfg)?;
            Ok((commands::run_profiles(&job)?, cfg.out, 0))
        }
        Command::GrowthFrag(c) => {
            let cfg = c.resolve()?;
            let job = commands::prepare_growth_frag(&cfg)?;
            Ok((commands::run_growth_frag(&job)?, cfg.out, 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok((output, out, code)) => {
            if let Err(e) = output.commit(out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
