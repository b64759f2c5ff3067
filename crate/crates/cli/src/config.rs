use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fragasym::datum::DatumSpec;
use fragasym::kernel::KernelSpec;
use fragasym::simulator::GridConfig;
use fragasym::{FragmentationKernel, InitialDatum};
use serde::{Deserialize, Serialize};

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Rejected input: bad flags, configs, specs or files. Exit 1.
    Validation(String),
    /// A numerical method failed on valid input. Exit 2.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<fragasym::Error> for CliError {
    fn from(e: fragasym::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A spec given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecSource<T> {
    Inline(T),
    File(PathBuf),
}

/// `count` points evenly spaced in `log x` over `[log_min, log_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub log_min: f64,
    pub log_max: f64,
    pub count: usize,
}

impl LogRange {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.log_min.exp()];
        }
        (0..self.count)
            .map(|i| (self.log_min + (self.log_max - self.log_min) * i as f64 / (self.count - 1) as f64).exp())
            .collect()
    }
}

/// Everything a command needs; loaded from a JSON file and overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<SpecSource<KernelSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<SpecSource<DatumSpec>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<LogRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Entropy parameters for the simulation diagnostics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    /// Samples per rescaled profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config JSON: {e}")))
    }

    /// Reads a config and makes its relative spec paths relative to the config's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            cfg.kernel.as_mut().and_then(file_path),
            cfg.datum.as_mut().and_then(file_path),
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn kernel(&self) -> Result<FragmentationKernel, CliError> {
        let spec = match &self.kernel {
            None => return Err(invalid("no kernel given (--kernel or \"kernel\" in the config)")),
            Some(SpecSource::Inline(s)) => s.clone(),
            Some(SpecSource::File(p)) => KernelSpec::from_json(&read(p)?)?,
        };
        Ok(spec.build()?)
    }

    pub fn datum(&self) -> Result<InitialDatum, CliError> {
        let spec = match &self.datum {
            None => return Err(invalid("no datum given (--datum or \"datum\" in the config)")),
            Some(SpecSource::Inline(s)) => s.clone(),
            Some(SpecSource::File(p)) => DatumSpec::from_json(&read(p)?)?,
        };
        Ok(spec.build()?)
    }

    /// Positive, finite times.
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        if self.t.is_empty() {
            return Err(invalid("no times given (--t or \"t\" in the config)"));
        }
        if let Some(t) = self.t.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(invalid(format!("times must be positive and finite, got {t}")));
        }
        Ok(self.t.clone())
    }

    /// Sizes from `x` and `x_grid`, in that order; `fallback` when both are absent.
    pub fn sizes(&self, fallback: Option<LogRange>) -> Result<Vec<f64>, CliError> {
        let mut xs = self.x.clone();
        let range = self.x_grid.or(if xs.is_empty() { fallback } else { None });
        if let Some(r) = range {
            if r.count == 0 || !r.log_min.is_finite() || !r.log_max.is_finite() || r.log_max < r.log_min {
                return Err(invalid(format!("bad x_grid {r:?}")));
            }
            xs.extend(r.points());
        }
        if xs.is_empty() {
            return Err(invalid("no sizes given (--x, \"x\" or \"x_grid\" in the config)"));
        }
        if let Some(x) = xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(invalid(format!("sizes must be positive and finite, got {x}")));
        }
        Ok(xs)
    }

    pub fn speed(&self) -> Result<f64, CliError> {
        match self.c {
            Some(c) if c.is_finite() => Ok(c),
            Some(c) => Err(invalid(format!("c must be finite, got {c}"))),
            None => Err(invalid("no growth speed given (--c or \"c\" in the config)")),
        }
    }
}

fn file_path<T>(s: &mut SpecSource<T>) -> Option<&mut PathBuf> {
    match s {
        SpecSource::File(p) => Some(p),
        SpecSource::Inline(_) => None,
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}
