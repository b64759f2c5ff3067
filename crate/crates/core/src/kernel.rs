//! The fragmentation measure `k0` on (0, 1): its Mellin transform `K(s)`,
//! derivatives, admissibility checks and Condition H detection.
//!
//! A kernel is an optional absolutely continuous part (a power law
//! `scale * z^a` or a tabulated, piecewise-linear density) plus a finite
//! list of atoms `weight * delta_{location}`. The named closed forms are
//! special cases: homogeneous `k0 = 2`, power `(a+2) z^a`, mitosis
//! `2 delta_{1/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, uniform_breaks, QuadOptions};
use crate::rational::{detect_rational, gcd, lcm, Rationality};

/// Tolerance on the normalisation `K(2) = 1` for closed forms.
pub const CLOSED_FORM_NORM_TOL: f64 = 1e-10;
/// Tolerance on the normalisation for tabulated densities.
pub const TABULATED_NORM_TOL: f64 = 1e-6;
/// Largest denominator tried by the Condition H rationality test.
pub const CONDITION_H_MAX_DENOMINATOR: i64 = 1_000_000;
/// Integer residual accepted by the Condition H rationality test.
pub const CONDITION_H_TOL: f64 = 1e-9;
/// Margin added to fitted power-law exponents of tabulated densities.
pub const TABULATED_ABSCISSA_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Piecewise-linear density on nodes `z_0 < ... < z_n` in (0, 1]; zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    z: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(z: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if z.len() < 2 || z.len() != values.len() {
            return Err(Error::InvalidSpec(
                "tabulated density needs at least two nodes and one value per node".into(),
            ));
        }
        if z.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(
                "tabulated density contains non-finite entries".into(),
            ));
        }
        if z[0] <= 0.0 || z[z.len() - 1] > 1.0 || z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "tabulated nodes must be strictly increasing inside (0, 1]".into(),
            ));
        }
        Ok(TabulatedDensity { z, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.z
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z < self.z[0] || z > self.z[n - 1] {
            return 0.0;
        }
        let j = match self.z.partition_point(|&v| v <= z) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (z0, z1) = (self.z[j], self.z[j + 1]);
        let w = (z - z0) / (z1 - z0);
        self.values[j] * (1.0 - w) + self.values[j + 1] * w
    }

    /// `∫_{z_0}^{min(x, z_n)} z f(z) dz`, exact for the linear reconstruction.
    fn first_moment_up_to(&self, x: f64) -> f64 {
        let mut total = 0.0;
        for j in 0..self.z.len() - 1 {
            let (a, b) = (self.z[j], self.z[j + 1]);
            if x <= a {
                break;
            }
            let hi = b.min(x);
            // f(z) = c0 + c1 z on [a, b]
            let c1 = (self.values[j + 1] - self.values[j]) / (b - a);
            let c0 = self.values[j] - c1 * a;
            let prim = |z: f64| c0 * z * z / 2.0 + c1 * z * z * z / 3.0;
            total += prim(hi) - prim(a);
        }
        total
    }
}

/// Absolutely continuous part of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// `scale * z^exponent` on (0, 1).
    Power {
        exponent: f64,
        scale: f64,
    },
    Tabulated(TabulatedDensity),
}

impl Density {
    pub fn eval(&self, z: f64) -> f64 {
        if !(z > 0.0 && z <= 1.0) {
            return 0.0;
        }
        match self {
            Density::Power { exponent, scale } => scale * z.powf(*exponent),
            Density::Tabulated(t) => t.eval(z),
        }
    }
}

/// Name of the closed form (or data shape) the kernel was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    Homogeneous,
    Power,
    Mitosis,
    Atoms,
    Tabulated,
    Mixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentationKernel {
    form: KernelForm,
    density: Option<Density>,
    atoms: Vec<Atom>,
    p1: f64,
    norm_tolerance: f64,
}

impl FragmentationKernel {
    /// `k0 = 2`, `K(s) = 2/s`.
    pub fn homogeneous() -> Self {
        Self::assemble(
            KernelForm::Homogeneous,
            Some(Density::Power {
                exponent: 0.0,
                scale: 2.0,
            }),
            vec![],
        )
        .expect("closed form")
    }

    /// `k0(z) = (a+2) z^a`, `K(s) = (a+2)/(s+a)`; requires `a > -1`.
    pub fn power(a: f64) -> Result<Self> {
        if !(a > -1.0) || !a.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "power kernel exponent must exceed -1, got {a}"
            )));
        }
        Self::assemble(
            KernelForm::Power,
            Some(Density::Power {
                exponent: a,
                scale: a + 2.0,
            }),
            vec![],
        )
    }

    /// `k0 = 2 delta_{1/2}`, `K(s) = 2^{2-s}`.
    pub fn mitosis() -> Self {
        Self::assemble(
            KernelForm::Mitosis,
            None,
            vec![Atom {
                location: 0.5,
                weight: 2.0,
            }],
        )
        .expect("closed form")
    }

    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSpec("atom list is empty".into()));
        }
        Self::assemble(KernelForm::Atoms, None, atoms)
    }

    pub fn tabulated(density: TabulatedDensity) -> Result<Self> {
        Self::assemble(KernelForm::Tabulated, Some(Density::Tabulated(density)), vec![])
    }

    pub fn mixture(density: Density, atoms: Vec<Atom>) -> Result<Self> {
        Self::assemble(KernelForm::Mixture, Some(density), atoms)
    }

    fn assemble(form: KernelForm, density: Option<Density>, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.iter().any(|a| !a.location.is_finite() || !a.weight.is_finite()) {
            return Err(Error::InvalidSpec("atom entries must be finite".into()));
        }
        if let Some(Density::Power { exponent, scale }) = &density {
            if !exponent.is_finite() || !scale.is_finite() {
                return Err(Error::InvalidSpec("power density parameters must be finite".into()));
            }
        }
        let p1 = match &density {
            None => f64::NEG_INFINITY,
            Some(Density::Power { exponent, .. }) => -exponent,
            Some(Density::Tabulated(t)) => estimate_tabulated_abscissa(t)?,
        };
        let norm_tolerance = match &density {
            Some(Density::Tabulated(_)) => TABULATED_NORM_TOL,
            _ => CLOSED_FORM_NORM_TOL,
        };
        Ok(FragmentationKernel {
            form,
            density,
            atoms,
            p1,
            norm_tolerance,
        })
    }

    pub fn form(&self) -> KernelForm {
        self.form
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn atom_list(&self) -> &[Atom] {
        &self.atoms
    }

    /// True when the kernel is a purely discrete measure.
    pub fn is_discrete(&self) -> bool {
        self.density.is_none()
    }

    pub fn norm_tolerance(&self) -> f64 {
        self.norm_tolerance
    }

    /// Lower Mellin abscissa `p1` (may be `-inf`).
    pub fn lower_abscissa(&self) -> f64 {
        self.p1
    }

    fn check_domain(&self, s: Complex64) -> Result<()> {
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::Domain(format!("non-finite Mellin argument {s}")));
        }
        if s.re <= self.p1 {
            return Err(Error::Domain(format!(
                "Re(s) = {} is not above the lower abscissa p1 = {}",
                s.re, self.p1
            )));
        }
        Ok(())
    }

    /// `K(s) = ∫ z^{s-1} dk0(z)`.
    pub fn mellin(&self, s: Complex64) -> Result<Complex64> {
        self.mellin_derivative(s, 0)
    }

    /// `K` on the real axis.
    pub fn mellin_real(&self, s: f64) -> Result<f64> {
        Ok(self.mellin(Complex64::new(s, 0.0))?.re)
    }

    /// `∫ (log z)^order z^{s-1} dk0(z)` for `order` in 0..=3.
    pub fn mellin_derivative(&self, s: Complex64, order: u32) -> Result<Complex64> {
        if order > 3 {
            return Err(Error::Domain(format!("derivative order {order} not supported (0..=3)")));
        }
        self.check_domain(s)?;
        let mut total = Complex64::new(0.0, 0.0);
        for atom in &self.atoms {
            let log_sigma = atom.location.ln();
            total += atom.weight * ((s - 1.0) * log_sigma).exp() * log_sigma.powi(order as i32);
        }
        match &self.density {
            None => {}
            Some(Density::Power { exponent, scale }) => {
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                let factorial = [1.0, 1.0, 2.0, 6.0][order as usize];
                total += *scale * sign * factorial / (s + *exponent).powu(order + 1);
            }
            Some(Density::Tabulated(t)) => total += tabulated_mellin(t, s, order)?,
        }
        Ok(total)
    }

    pub fn derivative_real(&self, s: f64, order: u32) -> Result<f64> {
        Ok(self.mellin_derivative(Complex64::new(s, 0.0), order)?.re)
    }

    /// Cumulative first-moment distribution `F(x) = ∫_0^x y dk0(y)`.
    pub fn cumulative_first_moment(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let mut total: f64 = self
            .atoms
            .iter()
            .filter(|a| a.location <= x)
            .map(|a| a.weight * a.location)
            .sum();
        match &self.density {
            None => {}
            Some(Density::Power { exponent, scale }) => {
                let a2 = exponent + 2.0;
                total += scale * x.min(1.0).powf(a2) / a2;
            }
            Some(Density::Tabulated(t)) => total += t.first_moment_up_to(x),
        }
        total
    }

    /// Push-forward density in `z = -log(sigma)`: `k0(e^{-z})` (atoms excluded).
    pub fn log_density(&self, z: f64) -> f64 {
        match &self.density {
            None => 0.0,
            Some(d) => d.eval((-z).exp()),
        }
    }

    /// Admissibility report: normalisation, total mass and support checks.
    pub fn check_admissible(&self) -> AdmissibilityReport {
        let mut entries = Vec::new();
        let bad_atoms: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| a.location)
            .filter(|&s| !(s > 0.0 && s < 1.0))
            .collect();
        entries.push(CheckEntry {
            name: "atom_locations_in_open_unit_interval".into(),
            value: bad_atoms.len() as f64,
            pass: bad_atoms.is_empty(),
            detail: if bad_atoms.is_empty() {
                format!("{} atom(s) inside (0, 1)", self.atoms.len())
            } else {
                format!("atoms outside (0, 1): {bad_atoms:?}")
            },
        });
        let min_weight = self.atoms.iter().map(|a| a.weight).fold(f64::INFINITY, f64::min);
        entries.push(CheckEntry {
            name: "atom_weights_positive".into(),
            value: if self.atoms.is_empty() { 0.0 } else { min_weight },
            pass: self.atoms.is_empty() || min_weight > 0.0,
            detail: "smallest atom weight".into(),
        });
        let density_ok = match &self.density {
            None => (true, "no absolutely continuous part".to_string()),
            Some(Density::Power { exponent, scale }) => (
                *exponent > -1.0 && *scale > 0.0,
                format!("scale {scale} z^{exponent}; integrable iff exponent > -1"),
            ),
            Some(Density::Tabulated(t)) => {
                let min_v = t.values().iter().copied().fold(f64::INFINITY, f64::min);
                (min_v >= 0.0, format!("smallest tabulated value {min_v}"))
            }
        };
        entries.push(CheckEntry {
            name: "density_nonnegative_integrable".into(),
            value: if density_ok.0 { 1.0 } else { 0.0 },
            pass: density_ok.0,
            detail: density_ok.1,
        });

        let k2 = self.mellin_real(2.0);
        let (v2, pass2, d2) = match k2 {
            Ok(v) => (
                v,
                (v - 1.0).abs() <= self.norm_tolerance,
                format!("K(2) = {v}; required 1 within {:e}", self.norm_tolerance),
            ),
            Err(e) => (f64::NAN, false, format!("K(2) unavailable: {e}")),
        };
        entries.push(CheckEntry {
            name: "first_moment".into(),
            value: v2,
            pass: pass2,
            detail: d2,
        });
        let (v1, pass1, d1) = match self.mellin_real(1.0) {
            Ok(v) => (v, v > 1.0, format!("K(1) = {v}; required > 1")),
            Err(_) => (f64::INFINITY, false, "total mass not integrable (1 <= p1)".to_string()),
        };
        entries.push(CheckEntry {
            name: "total_mass".into(),
            value: v1,
            pass: pass1,
            detail: d1,
        });
        let pass = entries.iter().all(|e| e.pass);
        AdmissibilityReport { entries, pass }
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        let report = self.check_admissible();
        if report.pass {
            Ok(())
        } else {
            let failed: Vec<String> = report
                .entries
                .iter()
                .filter(|e| !e.pass)
                .map(|e| format!("{} ({})", e.name, e.detail))
                .collect();
            Err(Error::Domain(format!("inadmissible kernel: {}", failed.join("; "))))
        }
    }

    /// Condition H for the kernel. Kernels with a density never satisfy it.
    pub fn condition_h(&self) -> Result<ConditionHResult> {
        if self.density.is_some() {
            return Ok(ConditionHResult::unsatisfied(
                "kernel has an absolutely continuous part; Condition H applies to discrete kernels only".into(),
            ));
        }
        condition_h(&self.atoms)
    }
}

fn tabulated_mellin(t: &TabulatedDensity, s: Complex64, order: u32) -> Result<Complex64> {
    // integrate in y = log z, with panels refined for the oscillation of z^{i Im s}
    let ys: Vec<f64> = t.nodes().iter().map(|z| z.ln()).collect();
    let mut breaks = Vec::with_capacity(ys.len());
    for w in ys.windows(2) {
        let periods = s.im.abs() * (w[1] - w[0]) / (2.0 * PI);
        // a 15-point panel covers about 3/4 of a period at 20 nodes per period
        let panels = (periods * 20.0 / 15.0).ceil().max(1.0) as usize;
        let seg = uniform_breaks(w[0], w[1], panels);
        if breaks.is_empty() {
            breaks.extend(seg);
        } else {
            breaks.extend(seg.into_iter().skip(1));
        }
    }
    let f = |y: f64| {
        let z = y.exp();
        (s * y).exp() * y.powi(order as i32) * t.eval(z.min(t.nodes()[t.nodes().len() - 1]))
    };
    let opts = QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_panels: 200_000,
    };
    Ok(integrate(f, &breaks, opts)?.value)
}

/// Least-squares power-law fit `f ~ z^a` over the smallest decade of nodes;
/// returns `-a` plus the safety margin.
pub fn estimate_tabulated_abscissa(t: &TabulatedDensity) -> Result<f64> {
    let z0 = t.nodes()[0];
    let pts: Vec<(f64, f64)> = t
        .nodes()
        .iter()
        .zip(t.values())
        .filter(|(z, v)| **z <= 10.0 * z0 * (1.0 + 1e-12) && **v > 0.0)
        .map(|(z, v)| (z.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Estimation(format!(
            "tabulated density has {} positive node(s) in its smallest decade [{z0:e}, {:e}]; \
             at least two are needed for a power-law fit",
            pts.len(),
            10.0 * z0
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Estimation("degenerate abscissae in power-law fit".into()));
    }
    let slope = sxy / sxx;
    Ok(-slope + TABULATED_ABSCISSA_MARGIN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub value: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub entries: Vec<CheckEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionHResult {
    pub satisfied: bool,
    pub theta: Option<f64>,
    /// Coprime exponents in increasing order, aligned with `locations`.
    pub exponents: Vec<u64>,
    pub locations: Vec<f64>,
    pub v_star: Option<f64>,
    pub certificate: String,
}

impl ConditionHResult {
    fn unsatisfied(certificate: String) -> Self {
        ConditionHResult {
            satisfied: false,
            theta: None,
            exponents: vec![],
            locations: vec![],
            v_star: None,
            certificate,
        }
    }
}

/// Decides whether all `log sigma_l` are commensurable, i.e. the atom
/// locations are integer powers of one base `theta` with coprime exponents.
///
/// Rationality of `log sigma_l / log sigma_ref` is tested with continued
/// fractions (denominator at most 1e6) against an integer residual of 1e-9.
pub fn condition_h(atoms: &[Atom]) -> Result<ConditionHResult> {
    if atoms.is_empty() {
        return Err(Error::Domain("Condition H needs at least one atom".into()));
    }
    if let Some(bad) = atoms.iter().find(|a| !(a.location > 0.0 && a.location < 1.0)) {
        return Err(Error::Domain(format!("atom location {} outside (0, 1)", bad.location)));
    }
    let mut sigmas: Vec<f64> = atoms.iter().map(|a| a.location).collect();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    sigmas.dedup_by(|b, a| (*a - *b).abs() <= 1e-12 * a.abs());

    let reference = sigmas[0];
    let log_ref = reference.ln();
    let mut fractions = Vec::with_capacity(sigmas.len());
    for &sigma in &sigmas {
        let ratio = sigma.ln() / log_ref;
        match detect_rational(ratio, CONDITION_H_MAX_DENOMINATOR, CONDITION_H_TOL) {
            Rationality::Rational { p, q, .. } => fractions.push((p, q)),
            Rationality::Irrational { residual } => {
                return Ok(ConditionHResult::unsatisfied(format!(
                    "atoms {reference} and {sigma}: log-ratio {ratio:.15} has no rational \
                     approximation p/q with q <= {CONDITION_H_MAX_DENOMINATOR} and |q r - p| <= \
                     {CONDITION_H_TOL:e} (best residual {residual:e}); bounded-denominator test"
                )));
            }
            Rationality::Ambiguous { p, q, residual } => {
                return Err(Error::Precision(format!(
                    "log-ratio {ratio:.15} of atoms {reference} and {sigma} is within 10x the \
                     tolerance of {p}/{q} (residual {residual:e}); cannot decide commensurability"
                )));
            }
        }
    }
    let mut common = 1i64;
    for &(_, q) in &fractions {
        common = lcm(common, q).ok_or_else(|| Error::Precision("common denominator overflow".into()))?;
    }
    let raw: Vec<i64> = fractions.iter().map(|&(p, q)| p * (common / q)).collect();
    let g = raw.iter().fold(0i64, |acc, &e| gcd(acc, e));
    let exponents: Vec<i64> = raw.iter().map(|e| e / g).collect();
    let theta = (log_ref * g as f64 / common as f64).exp();

    for (&sigma, &e) in sigmas.iter().zip(&exponents) {
        let rebuilt = theta.powi(e as i32);
        if (rebuilt - sigma).abs() > CONDITION_H_TOL * sigma.max(1e-300) * e as f64 {
            return Err(Error::Precision(format!(
                "theta^{e} = {rebuilt} does not reproduce atom {sigma}"
            )));
        }
    }
    let mut pairs: Vec<(u64, f64)> = exponents
        .iter()
        .map(|&e| e as u64)
        .zip(sigmas.iter().copied())
        .collect();
    pairs.sort_by_key(|p| p.0);
    let v_star = 2.0 * PI / theta.ln();
    Ok(ConditionHResult {
        satisfied: true,
        theta: Some(theta),
        exponents: pairs.iter().map(|p| p.0).collect(),
        locations: pairs.iter().map(|p| p.1).collect(),
        v_star: Some(v_star),
        certificate: format!(
            "all {} distinct atom(s) are powers of theta = {theta} (exponents gcd 1); \
             bounded-denominator test, q <= {CONDITION_H_MAX_DENOMINATOR}, residual <= {CONDITION_H_TOL:e}",
            sigmas.len()
        ),
    })
}

/// JSON description of a kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub form: KernelForm,
    #[serde(default, skip_serializing_if = "KernelParams::is_empty")]
    pub params: KernelParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<KernelGrid>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl KernelParams {
    fn is_empty(&self) -> bool {
        self.a.is_none() && self.scale.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelGrid {
    pub z: Vec<f64>,
    pub values: Vec<f64>,
}

impl KernelSpec {
    pub fn build(&self) -> Result<FragmentationKernel> {
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|[location, weight]| Atom {
                location: *location,
                weight: *weight,
            })
            .collect();
        let tabulated = || -> Result<TabulatedDensity> {
            let g = self.grid.as_ref().ok_or_else(|| {
                Error::InvalidSpec("tabulated kernel needs a \"grid\" with \"z\" and \"values\"".into())
            })?;
            TabulatedDensity::new(g.z.clone(), g.values.clone())
        };
        match self.form {
            KernelForm::Homogeneous => Ok(FragmentationKernel::homogeneous()),
            KernelForm::Mitosis => Ok(FragmentationKernel::mitosis()),
            KernelForm::Power => {
                let a = self
                    .params
                    .a
                    .ok_or_else(|| Error::InvalidSpec("power kernel needs params.a".into()))?;
                FragmentationKernel::power(a)
            }
            KernelForm::Atoms => FragmentationKernel::atoms(atoms),
            KernelForm::Tabulated => FragmentationKernel::tabulated(tabulated()?),
            KernelForm::Mixture => {
                let density = if self.grid.is_some() {
                    Density::Tabulated(tabulated()?)
                } else {
                    let a = self.params.a.ok_or_else(|| {
                        Error::InvalidSpec("mixture kernel needs a grid or params.a / params.scale".into())
                    })?;
                    Density::Power {
                        exponent: a,
                        scale: self.params.scale.unwrap_or(a + 2.0),
                    }
                };
                FragmentationKernel::mixture(density, atoms)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("kernel JSON: {e}")))
    }
}
