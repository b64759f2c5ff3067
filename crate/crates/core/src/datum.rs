//! Initial data `u0` with their Mellin strips, tail coefficients and mass.
//!
//! Profiles are stored as functions of `y = log x`, the variable every
//! quadrature in the crate works in.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_line, QuadOptions};

pub type LogProfile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MellinFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Relative tolerance of Mellin quadratures.
pub const MELLIN_REL_TOL: f64 = 1e-10;

/// `u0(x) ~ a0 x^{-q0}` as `x -> inf`, with remainder `O(x^{-r})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperTail {
    pub a0: f64,
    pub q0: f64,
    pub r: f64,
}

/// `u0(x) ~ b0 x^{-p0}` as `x -> 0`, with remainder `O(x^{-rho})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerTail {
    pub b0: f64,
    pub p0: f64,
    pub rho: f64,
}

#[derive(Clone)]
pub struct InitialDatum {
    label: String,
    profile: LogProfile,
    closed_mellin: Option<MellinFn>,
    p0: f64,
    q0: f64,
    upper_tail: Option<UpperTail>,
    lower_tail: Option<LowerTail>,
    /// `y`-range outside which the profile is given exactly by its tails (or zero).
    core: (f64, f64),
    breakpoints: Vec<f64>,
    mass: f64,
    warnings: Vec<String>,
}

impl fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialDatum")
            .field("label", &self.label)
            .field("strip", &(self.p0, self.q0))
            .field("upper_tail", &self.upper_tail)
            .field("lower_tail", &self.lower_tail)
            .field("core", &self.core)
            .field("mass", &self.mass)
            .finish()
    }
}

/// Assembles a datum from a profile in `y = log x`.
pub struct DatumBuilder {
    label: String,
    profile: LogProfile,
    closed_mellin: Option<MellinFn>,
    strip: (f64, f64),
    upper_tail: Option<UpperTail>,
    lower_tail: Option<LowerTail>,
    core: (f64, f64),
    breakpoints: Vec<f64>,
}

impl DatumBuilder {
    pub fn new(label: impl Into<String>, profile: LogProfile) -> Self {
        DatumBuilder {
            label: label.into(),
            profile,
            closed_mellin: None,
            strip: (f64::NEG_INFINITY, f64::INFINITY),
            upper_tail: None,
            lower_tail: None,
            core: (f64::NEG_INFINITY, f64::INFINITY),
            breakpoints: vec![],
        }
    }

    pub fn strip(mut self, p0: f64, q0: f64) -> Self {
        self.strip = (p0, q0);
        self
    }

    pub fn closed_form_mellin(mut self, f: MellinFn) -> Self {
        self.closed_mellin = Some(f);
        self
    }

    pub fn upper_tail(mut self, tail: UpperTail) -> Self {
        self.upper_tail = Some(tail);
        self
    }

    pub fn lower_tail(mut self, tail: LowerTail) -> Self {
        self.lower_tail = Some(tail);
        self
    }

    /// The profile equals its lower tail (or 0) below `lo` and its upper
    /// tail (or 0) above `hi`; infinite ends mean "no such claim".
    pub fn core(mut self, lo: f64, hi: f64) -> Self {
        self.core = (lo, hi);
        self
    }

    /// Points in `y` where the profile is not smooth.
    pub fn breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn build(self) -> Result<InitialDatum> {
        let (p0, q0) = self.strip;
        if p0.is_nan() || q0.is_nan() || !(p0 < 1.0) || !(q0 > 2.0) {
            return Err(Error::InvalidSpec(format!(
                "Mellin strip ({p0}, {q0}) must satisfy p0 < 1 and q0 > 2 so that ∫ u0 (1+x) dx is finite"
            )));
        }
        if let Some(t) = self.upper_tail {
            if !(t.a0 > 0.0) || t.q0 != q0 || !(t.r > q0) {
                return Err(Error::InvalidSpec(format!(
                    "upper tail needs a0 > 0, q0 equal to the strip edge {q0} and r > q0; got {t:?}"
                )));
            }
        }
        if let Some(t) = self.lower_tail {
            if !(t.b0 > 0.0) || t.p0 != p0 || !(t.rho < p0) {
                return Err(Error::InvalidSpec(format!(
                    "lower tail needs b0 > 0, p0 equal to the strip edge {p0} and rho < p0; got {t:?}"
                )));
            }
        }
        if self.core.0 > self.core.1 {
            return Err(Error::InvalidSpec("empty core range".into()));
        }
        let mut breakpoints = self.breakpoints;
        breakpoints.retain(|b| b.is_finite());
        breakpoints.sort_by(f64::total_cmp);
        let mut datum = InitialDatum {
            label: self.label,
            profile: self.profile,
            closed_mellin: self.closed_mellin,
            p0,
            q0,
            upper_tail: self.upper_tail,
            lower_tail: self.lower_tail,
            core: self.core,
            breakpoints,
            mass: f64::NAN,
            warnings: vec![],
        };
        datum.validate()?;
        datum.mass = datum.mellin(Complex64::new(2.0, 0.0))?.re;
        Ok(datum)
    }
}

impl InitialDatum {
    /// `u0(x) = exp(-(log x - center)^2 / (2 width^2))`, entire Mellin transform
    /// `sqrt(2 pi) width exp(s center + s^2 width^2 / 2)`.
    pub fn log_gaussian(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "log-Gaussian needs finite center and width > 0, got ({center}, {width})"
            )));
        }
        // beyond 40 widths the profile underflows
        let reach = 40.0 * width;
        let profile: LogProfile = Arc::new(move |y: f64| {
            let z = (y - center) / width;
            (-0.5 * z * z).exp()
        });
        let mellin: MellinFn =
            Arc::new(move |s: Complex64| (2.0 * PI).sqrt() * width * (s * center + s * s * width * width / 2.0).exp());
        DatumBuilder::new(format!("log_gaussian(center={center}, width={width})"), profile)
            .closed_form_mellin(mellin)
            .core(center - reach, center + reach)
            .breakpoints(vec![center - 8.0 * width, center, center + 8.0 * width])
            .build()
    }

    /// `u0(x) = b0 x^{-p0}` for `x <= 1` and `a0 x^{-q0}` for `x > 1`; both
    /// tails are exact. With `b0 = 0` the datum vanishes below 1 and the strip
    /// extends to `-inf`.
    pub fn two_sided_power(b0: f64, p0: f64, a0: f64, q0: f64) -> Result<Self> {
        if !(b0 >= 0.0) || !(a0 > 0.0) || !p0.is_finite() || !q0.is_finite() {
            return Err(Error::InvalidSpec(
                "two-sided power needs b0 >= 0, a0 > 0 and finite exponents".into(),
            ));
        }
        let profile: LogProfile = Arc::new(move |y: f64| {
            if y <= 0.0 {
                b0 * (-p0 * y).exp()
            } else {
                a0 * (-q0 * y).exp()
            }
        });
        let mellin: MellinFn = Arc::new(move |s: Complex64| {
            let lower = if b0 > 0.0 {
                b0 / (s - p0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            lower + a0 / (q0 - s)
        });
        let mut b = DatumBuilder::new(format!("two_sided_power(b0={b0}, p0={p0}, a0={a0}, q0={q0})"), profile)
            .closed_form_mellin(mellin)
            .upper_tail(UpperTail {
                a0,
                q0,
                r: f64::INFINITY,
            })
            .core(0.0, 0.0)
            .breakpoints(vec![0.0]);
        if b0 > 0.0 {
            b = b.strip(p0, q0).lower_tail(LowerTail {
                b0,
                p0,
                rho: f64::NEG_INFINITY,
            });
        } else {
            b = b.strip(f64::NEG_INFINITY, q0);
        }
        b.build()
    }

    /// Indicator of `(lo, hi)`, `0 <= lo < hi < inf`.
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0) || !(hi > lo) || !hi.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "indicator needs 0 <= lo < hi < inf, got ({lo}, {hi})"
            )));
        }
        let (ylo, yhi) = (lo.ln(), hi.ln());
        let profile: LogProfile = Arc::new(move |y: f64| if y > ylo && y < yhi { 1.0 } else { 0.0 });
        let label = format!("indicator({lo}, {hi})");
        if lo == 0.0 {
            let mellin: MellinFn = Arc::new(move |s: Complex64| (s * yhi).exp() / s);
            DatumBuilder::new(label, profile)
                .closed_form_mellin(mellin)
                .strip(0.0, f64::INFINITY)
                .lower_tail(LowerTail {
                    b0: 1.0,
                    p0: 0.0,
                    rho: f64::NEG_INFINITY,
                })
                .core(yhi, yhi)
                .breakpoints(vec![yhi])
                .build()
        } else {
            let mellin: MellinFn = Arc::new(move |s: Complex64| {
                if s.norm() < 1e-8 {
                    // first terms of the expansion around s = 0
                    let d = yhi - ylo;
                    Complex64::new(d, 0.0) + s * (yhi * yhi - ylo * ylo) / 2.0
                } else {
                    ((s * yhi).exp() - (s * ylo).exp()) / s
                }
            });
            DatumBuilder::new(label, profile)
                .closed_form_mellin(mellin)
                .core(ylo, yhi)
                .breakpoints(vec![ylo, yhi])
                .build()
        }
    }

    /// Smooth compactly supported bump in `y`:
    /// `height * exp(1 - 1/(1 - ((y-center)/half_width)^2))`.
    pub fn compact_bump(center: f64, half_width: f64, height: f64) -> Result<Self> {
        if !center.is_finite() || !(half_width > 0.0) || !(height > 0.0) {
            return Err(Error::InvalidSpec(
                "compact bump needs finite center, half_width > 0, height > 0".into(),
            ));
        }
        let profile: LogProfile = Arc::new(move |y: f64| {
            let z = (y - center) / half_width;
            if z.abs() >= 1.0 {
                0.0
            } else {
                height * (1.0 - 1.0 / (1.0 - z * z)).exp()
            }
        });
        DatumBuilder::new(
            format!("compact_bump(center={center}, half_width={half_width}, height={height})"),
            profile,
        )
        .core(center - half_width, center + half_width)
        .breakpoints(vec![center])
        .build()
    }

    /// Piecewise-linear profile in `y` on the given nodes. Outside the table
    /// the datum is zero, or follows the declared tails exactly.
    pub fn tabulated(
        y: Vec<f64>,
        values: Vec<f64>,
        upper: Option<UpperTail>,
        lower: Option<LowerTail>,
    ) -> Result<Self> {
        if y.len() < 2 || y.len() != values.len() {
            return Err(Error::InvalidSpec(
                "tabulated datum needs at least two nodes and one value per node".into(),
            ));
        }
        if y.iter().chain(&values).any(|v| !v.is_finite()) || y.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "tabulated datum nodes must be finite and strictly increasing".into(),
            ));
        }
        let (ya, yb) = (y[0], y[y.len() - 1]);
        let nodes = y.clone();
        let vals = values.clone();
        let profile: LogProfile = Arc::new(move |t: f64| {
            if t < ya {
                return lower.map_or(0.0, |l| l.b0 * (-l.p0 * t).exp());
            }
            if t > yb {
                return upper.map_or(0.0, |u| u.a0 * (-u.q0 * t).exp());
            }
            let k = nodes.partition_point(|&v| v <= t).clamp(1, nodes.len() - 1);
            let w = (t - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
            vals[k - 1] * (1.0 - w) + vals[k] * w
        });
        let mut b = DatumBuilder::new(format!("tabulated({} nodes)", y.len()), profile)
            .core(ya, yb)
            .breakpoints(y);
        let p0 = lower.map_or(f64::NEG_INFINITY, |l| l.p0);
        let q0 = upper.map_or(f64::INFINITY, |u| u.q0);
        b = b.strip(p0, q0);
        if let Some(u) = upper {
            b = b.upper_tail(u);
        }
        if let Some(l) = lower {
            b = b.lower_tail(l);
        }
        b.build()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `u0(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x > 0.0 {
            (self.profile)(x.ln())
        } else {
            0.0
        }
    }

    /// `u0(e^y)`.
    pub fn evaluate_log(&self, y: f64) -> f64 {
        (self.profile)(y)
    }

    pub fn strip(&self) -> (f64, f64) {
        (self.p0, self.q0)
    }

    pub fn upper_tail(&self) -> Option<UpperTail> {
        self.upper_tail
    }

    pub fn lower_tail(&self) -> Option<LowerTail> {
        self.lower_tail
    }

    /// `y`-range of the profile that is not described exactly by its tails.
    pub fn core(&self) -> (f64, f64) {
        self.core
    }

    /// Smallest and largest `y` where the datum can be nonzero.
    pub fn log_support(&self) -> (f64, f64) {
        let lo = if self.lower_tail.is_some() {
            f64::NEG_INFINITY
        } else {
            self.core.0
        };
        let hi = if self.upper_tail.is_some() {
            f64::INFINITY
        } else {
            self.core.1
        };
        (lo, hi)
    }

    pub fn has_closed_form_mellin(&self) -> bool {
        self.closed_mellin.is_some()
    }

    /// `M = ∫ x u0 dx = U0(2)`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn check_strip(&self, s: Complex64) -> Result<()> {
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::Domain(format!("non-finite Mellin argument {s}")));
        }
        if !(s.re > self.p0 && s.re < self.q0) {
            return Err(Error::Domain(format!(
                "Re(s) = {} outside the Mellin strip ({}, {})",
                s.re, self.p0, self.q0
            )));
        }
        Ok(())
    }

    /// `U0(s)` inside the strip: closed form when available, otherwise quadrature.
    pub fn mellin(&self, s: Complex64) -> Result<Complex64> {
        self.check_strip(s)?;
        match &self.closed_mellin {
            Some(f) => Ok(f(s)),
            None => self.mellin_quadrature(s),
        }
    }

    /// `U0(s)` by quadrature in `y`, ignoring any closed form.
    pub fn mellin_quadrature(&self, s: Complex64) -> Result<Complex64> {
        self.check_strip(s)?;
        let mut total = self.integrate_core(
            |y| Complex64::new(self.evaluate_log(y), 0.0) * (s * y).exp(),
            s.im,
            self.core.0,
            self.core.1,
        )?;
        total += self.upper_tail_integral(s);
        total += self.lower_tail_integral(s);
        Ok(total)
    }

    /// Exact contribution of the upper tail beyond the core, `∫_{hi}^∞ a0 e^{(s-q0)y} dy`.
    fn upper_tail_integral(&self, s: Complex64) -> Complex64 {
        match self.upper_tail {
            Some(t) if self.core.1.is_finite() => t.a0 * ((s - t.q0) * self.core.1).exp() / (t.q0 - s),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    fn lower_tail_integral(&self, s: Complex64) -> Complex64 {
        match self.lower_tail {
            Some(t) if self.core.0.is_finite() => t.b0 * ((s - t.p0) * self.core.0).exp() / (s - t.p0),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Adaptive quadrature of `g` over `[lo, hi]` (infinite ends allowed) with
    /// panels refined for the oscillation frequency `omega` in `y`.
    pub(crate) fn integrate_core<F>(&self, g: F, omega: f64, lo: f64, hi: f64) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        if !(hi > lo) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let opts = QuadOptions {
            rel_tol: MELLIN_REL_TOL,
            abs_tol: 0.0,
            max_panels: 200_000,
        };
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|b| *b > lo && *b < hi)
            .collect();
        let center = cuts.get(cuts.len() / 2).copied().unwrap_or(if lo.is_finite() {
            if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                lo
            }
        } else if hi.is_finite() {
            hi
        } else {
            0.0
        });
        let a = if lo.is_finite() {
            lo
        } else {
            cuts.first().copied().unwrap_or(center).min(center)
        };
        let b = if hi.is_finite() {
            hi
        } else {
            cuts.last().copied().unwrap_or(center).max(center)
        };
        cuts.retain(|c| *c > a && *c < b);
        let mut total = Complex64::new(0.0, 0.0);
        if b > a {
            let mut edges = vec![a];
            edges.extend(cuts);
            edges.push(b);
            let mut breaks = vec![a];
            for w in edges.windows(2) {
                // about 20 nodes per oscillation period
                let periods = omega.abs() * (w[1] - w[0]) / (2.0 * PI);
                let n = (periods * 20.0 / 15.0).ceil().max(1.0) as usize;
                for k in 1..=n {
                    breaks.push(if k == n {
                        w[1]
                    } else {
                        w[0] + (w[1] - w[0]) * k as f64 / n as f64
                    });
                }
            }
            total += crate::quadrature::integrate(&g, &breaks, opts)?.value;
        }
        if !lo.is_finite() {
            total += integrate_line(&g, f64::NEG_INFINITY, a, a, 1, opts)?.value;
        }
        if !hi.is_finite() {
            total += integrate_line(&g, b, f64::INFINITY, b, 1, opts)?.value;
        }
        Ok(total)
    }

    fn validate(&mut self) -> Result<()> {
        // nonnegativity on a log-spaced grid of [1e-8, 1e8]
        for k in 0..=320 {
            let y = (1e-8f64).ln() + (1e16f64).ln() * k as f64 / 320.0;
            let v = self.evaluate_log(y);
            if !(v >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "u0(e^{y:.3}) = {v} is negative or not a number"
                )));
            }
        }
        // integrability: U0(1) and U0(2) finite
        for s in [1.0, 2.0] {
            let v = match &self.closed_mellin {
                Some(f) => f(Complex64::new(s, 0.0)),
                None => self.mellin_quadrature(Complex64::new(s, 0.0))?,
            };
            if !v.re.is_finite() || v.re < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "∫ x^{} u0 dx = {} is not finite and nonnegative",
                    s - 1.0,
                    v.re
                )));
            }
        }
        if let Some(t) = self.upper_tail {
            let xs = [10.0, 100.0, 1000.0];
            let c: Vec<f64> = xs
                .iter()
                .map(|&x: &f64| {
                    let d = (self.evaluate(x) - t.a0 * x.powf(-t.q0)).abs();
                    if t.r.is_finite() {
                        d * x.powf(t.r)
                    } else {
                        d / (t.a0 * x.powf(-t.q0))
                    }
                })
                .collect();
            self.check_tail_fit("upper", t.r.is_finite(), &c)?;
        }
        if let Some(t) = self.lower_tail {
            let xs = [0.1, 0.01, 0.001];
            let c: Vec<f64> = xs
                .iter()
                .map(|&x: &f64| {
                    let d = (self.evaluate(x) - t.b0 * x.powf(-t.p0)).abs();
                    if t.rho.is_finite() {
                        d * x.powf(t.rho)
                    } else {
                        d / (t.b0 * x.powf(-t.p0))
                    }
                })
                .collect();
            self.check_tail_fit("lower", t.rho.is_finite(), &c)?;
        }
        if let Some(f) = self.closed_mellin.clone() {
            for s in self.sample_points() {
                let exact = f(s);
                let quad = self.mellin_quadrature(s)?;
                // |U0(s)| <= U0(Re s) for nonnegative data: the cancellation scale
                let scale = exact.norm().max(f(Complex64::new(s.re, 0.0)).norm());
                if (exact - quad).norm() > 1e-8 * scale {
                    return Err(Error::InvalidSpec(format!(
                        "closed-form Mellin transform {exact} disagrees with quadrature {quad} at s = {s}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_tail_fit(&mut self, side: &str, finite_order: bool, c: &[f64]) -> Result<()> {
        if finite_order {
            // the fitted constant must not blow up along the sample
            let base = c[0].max(1e-300);
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "{side} tail check produced non-finite values"
                )));
            }
            if c[1] > 10.0 * base || c[2] > 10.0 * c[1].max(1e-300) {
                self.warnings.push(format!(
                    "{side} tail remainder does not decay at the declared order (fitted constants {c:?})"
                ));
            }
        } else if c.iter().any(|v| !(*v <= 1e-10)) {
            return Err(Error::InvalidSpec(format!(
                "{side} tail declared exact but relative mismatches are {c:?}"
            )));
        }
        Ok(())
    }

    /// Five fixed points inside the strip used to validate closed forms.
    fn sample_points(&self) -> Vec<Complex64> {
        let lo = if self.p0.is_finite() {
            self.p0
        } else {
            (-6.0f64).min(self.q0 - 8.0)
        };
        let hi = if self.q0.is_finite() {
            self.q0
        } else {
            8.0f64.max(lo + 8.0)
        };
        let re = |f: f64| lo + f * (hi - lo);
        vec![
            Complex64::new(re(0.5), 0.0),
            Complex64::new(re(0.3), 1.0),
            Complex64::new(re(0.7), -2.5),
            Complex64::new(re(0.45), 4.0),
            Complex64::new(re(0.6), 7.5),
        ]
    }
}

/// JSON description of an initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumSpec {
    pub form: DatumForm,
    #[serde(default)]
    pub params: DatumParams,
    #[serde(default, skip_serializing_if = "DatumTails::is_empty")]
    pub tails: DatumTails,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<DatumGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatumForm {
    LogGaussian,
    TwoSidedPower,
    Indicator,
    CompactBump,
    Tabulated,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatumTails {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<UpperTail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<LowerTail>,
}

impl DatumTails {
    fn is_empty(&self) -> bool {
        self.upper.is_none() && self.lower.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumGrid {
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

impl DatumSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("datum JSON: {e}")))
    }

    pub fn build(&self) -> Result<InitialDatum> {
        let p = &self.params;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidSpec(format!("datum form {:?} needs params.{name}", self.form)))
        };
        if !matches!(self.form, DatumForm::Tabulated) && !self.tails.is_empty() {
            return Err(Error::InvalidSpec(
                "\"tails\" applies to tabulated data; closed forms determine their own tails".into(),
            ));
        }
        match self.form {
            DatumForm::LogGaussian => InitialDatum::log_gaussian(need(p.center, "center")?, p.width.unwrap_or(1.0)),
            DatumForm::TwoSidedPower => InitialDatum::two_sided_power(
                p.b0.unwrap_or(1.0),
                p.p0.unwrap_or(0.0),
                p.a0.unwrap_or(1.0),
                need(p.q0, "q0")?,
            ),
            DatumForm::Indicator => InitialDatum::indicator(p.lo.unwrap_or(0.0), need(p.hi, "hi")?),
            DatumForm::CompactBump => InitialDatum::compact_bump(
                need(p.center, "center")?,
                need(p.half_width, "half_width")?,
                p.height.unwrap_or(1.0),
            ),
            DatumForm::Tabulated => {
                let g = self.grid.as_ref().ok_or_else(|| {
                    Error::InvalidSpec("tabulated datum needs a \"grid\" with \"y\" and \"values\"".into())
                })?;
                InitialDatum::tabulated(g.y.clone(), g.values.clone(), self.tails.upper, self.tails.lower)
            }
        }
    }
}
