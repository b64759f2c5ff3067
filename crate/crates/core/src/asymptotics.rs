//! Saddle points and long-time leading terms of `u(t, x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::kernel::{ConditionHResult, FragmentationKernel};
use crate::roots::newton_increasing;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub s_plus: f64,
    /// `φ(s₊) = -s₊ log x + t K(s₊)`.
    pub phi_at_saddle: f64,
    pub k_at_saddle: f64,
    pub k2_at_saddle: f64,
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "T1_large_x")]
    T1LargeX,
    #[serde(rename = "T2_lower")]
    T2Lower,
    #[serde(rename = "T2_upper")]
    T2Upper,
    #[serde(rename = "T3a_bulk")]
    T3aBulk,
    #[serde(rename = "T3b_oscillatory")]
    T3bOscillatory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValue {
    pub value: f64,
    pub regime: Regime,
    pub saddle: Option<SaddleData>,
    /// `ε(t) = t^{-1/3}`, the width of the saddle neighbourhood in the error terms.
    pub error_scale: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub asymptotic: AsymptoticValue,
    pub k_max: usize,
    /// Bound on the omitted terms `|k| > k_max`, in the units of `value`.
    pub tail_bound: f64,
}

/// Error-scale choice `ε(t) = t^{-1/3}` (so `ε -> 0` and `t ε^2 -> ∞`).
pub fn error_scale(t: f64) -> f64 {
    t.powf(-1.0 / 3.0)
}

fn real_derivative(kernel: &FragmentationKernel, s: f64, order: u32) -> f64 {
    kernel.derivative_real(s, order).unwrap_or(f64::NAN)
}

/// Solves `K'(s) = log(x)/t` for `0 < x < 1`, `t > 0`.
pub fn saddle_point(kernel: &FragmentationKernel, t: f64, x: f64) -> Result<SaddleData> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("saddle point needs t > 0, got {t}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("saddle point needs 0 < x < 1, got {x}")));
    }
    let target = x.ln() / t;
    let g = |s: f64| real_derivative(kernel, s, 1) - target;
    let p1 = kernel.lower_abscissa();

    let mut hi = 2.0;
    let mut steps = 0;
    while !(g(hi) > 0.0) {
        hi = 2.0 * hi + 1.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(Error::Bracket(format!(
                "K' stays below log(x)/t = {target:e} up to s = {hi:e}"
            )));
        }
    }
    let mut lo = 2.0;
    let mut k = 0;
    while !(g(lo) < 0.0) {
        k += 1;
        lo = if p1.is_finite() {
            p1 + (2.0 - p1) * 0.5f64.powi(k)
        } else {
            2.0 - 2f64.powi(k)
        };
        if k > 1000 || lo <= p1 {
            return Err(Error::Bracket(format!(
                "K' does not fall below log(x)/t = {target:e} above p1 = {p1} (last s = {lo})"
            )));
        }
    }
    let tol = 1e-14 * target.abs();
    let s = if g(lo) == 0.0 {
        lo
    } else {
        newton_increasing(g, |s| real_derivative(kernel, s, 2), lo, hi, 2.0, tol)?
    };
    saddle_data_at(kernel, s, t, x)
}

fn saddle_data_at(kernel: &FragmentationKernel, s: f64, t: f64, x: f64) -> Result<SaddleData> {
    let k = kernel.mellin_real(s)?;
    let k2 = kernel.derivative_real(s, 2)?;
    Ok(SaddleData {
        s_plus: s,
        phi_at_saddle: -s * x.ln() + t * k,
        k_at_saddle: k,
        k2_at_saddle: k2,
        t,
        x,
    })
}

/// `φ(s, t, x) = -s log x + t K(s)`.
pub fn phi_eval(kernel: &FragmentationKernel, s: Complex64, t: f64, x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("phi needs x > 0, got {x}")));
    }
    Ok(-s * x.ln() + t * kernel.mellin(s)?)
}

/// `x^{-s₊} e^{(K(s₊)-1)t} / sqrt(2π t K''(s₊))`, evaluated in log form.
fn bulk_prefactor(saddle: &SaddleData) -> f64 {
    (saddle.phi_at_saddle - saddle.t - 0.5 * (2.0 * PI * saddle.t * saddle.k2_at_saddle).ln()).exp()
}

fn power_term(coef: f64, exponent: f64, kernel: &FragmentationKernel, t: f64, x: f64) -> Result<f64> {
    let k = kernel.mellin_real(exponent)?;
    Ok(coef * (-exponent * x.ln() + (k - 1.0) * t).exp())
}

/// Leading long-time term of `u(t, x)`, dispatched on `x` and the saddle position:
/// `x >= 1` (large sizes), `s₊ > q0` (upper tail), `s₊ < p0` (lower tail),
/// otherwise the bulk saddle term.
pub fn leading_term(datum: &InitialDatum, kernel: &FragmentationKernel, t: f64, x: f64) -> Result<AsymptoticValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("leading term needs t > 0, got {t}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("leading term needs x > 0, got {x}")));
    }
    let (p0, q0) = datum.strip();
    let mut warnings = Vec::new();
    let upper = |regime: Regime, saddle: Option<SaddleData>, warnings: Vec<String>| -> Result<AsymptoticValue> {
        let tail = datum.upper_tail().ok_or_else(|| {
            Error::MissingTail(format!("regime {regime:?} needs the upper tail (a0, q0) of the datum"))
        })?;
        Ok(AsymptoticValue {
            value: power_term(tail.a0, tail.q0, kernel, t, x)?,
            regime,
            saddle,
            error_scale: error_scale(t),
            warnings,
        })
    };
    if x >= 1.0 {
        return upper(Regime::T1LargeX, None, warnings);
    }
    let saddle = saddle_point(kernel, t, x)?;
    let s = saddle.s_plus;
    if s > q0 {
        return upper(Regime::T2Upper, Some(saddle), warnings);
    }
    if s < p0 {
        let tail = datum
            .lower_tail()
            .ok_or_else(|| Error::MissingTail("regime T2_lower needs the lower tail (b0, p0) of the datum".into()))?;
        return Ok(AsymptoticValue {
            value: power_term(tail.b0, tail.p0, kernel, t, x)?,
            regime: Regime::T2Lower,
            saddle: Some(saddle),
            error_scale: error_scale(t),
            warnings,
        });
    }
    if s == p0 || s == q0 {
        warnings.push(format!("saddle s+ = {s} lies on the strip boundary; bulk formula used"));
    }
    if kernel.is_discrete() && kernel.condition_h().map(|h| h.satisfied).unwrap_or(false) {
        warnings.push("kernel satisfies Condition H: the bulk term oscillates in log x; use theorem3b_series".into());
    }
    let u0 = datum.mellin(Complex64::new(s, 0.0))?;
    Ok(AsymptoticValue {
        value: u0.re * bulk_prefactor(&saddle),
        regime: Regime::T3aBulk,
        saddle: Some(saddle),
        error_scale: error_scale(t),
        warnings,
    })
}

fn require_condition_h(kernel: &FragmentationKernel) -> Result<ConditionHResult> {
    let h = kernel.condition_h()?;
    if !h.satisfied {
        return Err(Error::ConditionH(h.certificate));
    }
    Ok(h)
}

fn bulk_saddle(datum: &InitialDatum, kernel: &FragmentationKernel, t: f64, x: f64) -> Result<SaddleData> {
    let saddle = saddle_point(kernel, t, x)?;
    let (p0, q0) = datum.strip();
    if !(saddle.s_plus > p0 && saddle.s_plus < q0) {
        return Err(Error::Domain(format!(
            "saddle s+ = {} outside the strip ({p0}, {q0})",
            saddle.s_plus
        )));
    }
    Ok(saddle)
}

/// Default starting truncation for the oscillatory series.
pub const DEFAULT_K_MAX: usize = 50;
const MAX_K_MAX: usize = 1 << 20;
/// Relative tail bound at which automatic truncation stops.
pub const SERIES_REL_TOL: f64 = 1e-10;

/// Log-periodic bulk term for kernels satisfying Condition H:
/// `x^{-s₊} e^{(K(s₊)-1)t} Σ_{|k|<=k_max} U0(s₊ + i k v*) x^{-i k v*} / sqrt(2π t K''(s₊))`.
/// With `k_max = None` the truncation starts at 50 and doubles until the tail
/// bound falls below 1e-10 of the value.
pub fn theorem3b_series(
    datum: &InitialDatum,
    kernel: &FragmentationKernel,
    t: f64,
    x: f64,
    k_max: Option<usize>,
) -> Result<SeriesValue> {
    let h = require_condition_h(kernel)?;
    let v_star = h.v_star.expect("satisfied Condition H carries v*");
    let saddle = bulk_saddle(datum, kernel, t, x)?;
    let pref = bulk_prefactor(&saddle);
    let s = saddle.s_plus;
    let lx = x.ln();
    let term = |k: usize| -> Result<Complex64> {
        let w = k as f64 * v_star;
        Ok(datum.mellin(Complex64::new(s, w))? * Complex64::new(0.0, -w * lx).exp())
    };
    let term0 = datum.mellin(Complex64::new(s, 0.0))?.re;
    let tail_bound = |k_max: usize| -> Result<f64> {
        // |U0(s_k)| <= C / (k v*)^2 with C fitted at the last retained term
        if k_max == 0 {
            let c = term(1)?.norm() * v_star * v_star;
            Ok(2.0 * pref.abs() * c / (v_star * v_star) * PI * PI / 6.0)
        } else {
            let kv = k_max as f64 * v_star;
            let c = term(k_max)?.norm() * kv * kv;
            Ok(2.0 * pref.abs() * c / (v_star * v_star * k_max as f64))
        }
    };
    let mut warnings = vec![];
    let mut sum = 0.0;
    let mut done = 0usize;
    let mut n = k_max.unwrap_or(DEFAULT_K_MAX);
    let (value, bound) = loop {
        for k in done + 1..=n {
            sum += term(k)?.re;
        }
        done = n;
        let value = pref * (term0 + 2.0 * sum);
        let bound = tail_bound(n)?;
        if k_max.is_some() || bound <= SERIES_REL_TOL * value.abs() {
            break (value, bound);
        }
        if n >= MAX_K_MAX {
            warnings.push(format!(
                "series tail bound {bound:.3e} not below the target at k_max = {n}"
            ));
            break (value, bound);
        }
        n *= 2;
    };
    Ok(SeriesValue {
        asymptotic: AsymptoticValue {
            value,
            regime: Regime::T3bOscillatory,
            saddle: Some(saddle),
            error_scale: error_scale(t),
            warnings,
        },
        k_max: n,
        tail_bound: bound,
    })
}

/// Poisson-summation dual of [`theorem3b_series`]:
/// `|log θ| e^{(K(s₊)-1)t} / sqrt(2π t K''(s₊)) Σ_n u0(θ^n x) θ^{n s₊}`.
pub fn poisson_approx(datum: &InitialDatum, theta: f64, kernel: &FragmentationKernel, t: f64, x: f64) -> Result<f64> {
    let h = require_condition_h(kernel)?;
    let base = h.theta.expect("satisfied Condition H carries theta");
    if !(theta > 0.0 && theta < 1.0) || (theta - base).abs() > 1e-9 * base.max(1e-300) {
        return Err(Error::Domain(format!(
            "theta = {theta} is not the Condition H base {base} of the kernel"
        )));
    }
    let saddle = bulk_saddle(datum, kernel, t, x)?;
    let s = saddle.s_plus;
    let log_theta = theta.ln();
    let lx = x.ln();
    // log of the prefactor without x^{-s}
    let log_pref = t * (saddle.k_at_saddle - 1.0) - 0.5 * (2.0 * PI * t * saddle.k2_at_saddle).ln();
    let term = |n: i64| -> f64 {
        let y = lx + n as f64 * log_theta;
        let u = datum.evaluate_log(y);
        if u == 0.0 {
            0.0
        } else {
            (u.ln() + n as f64 * s * log_theta + log_pref).exp()
        }
    };
    // y_n = log x + n log θ decreases with n
    let (lo, hi) = datum.log_support();
    let mut sum = 0.0;
    if lo.is_finite() && hi.is_finite() {
        let n_first = ((hi - lx) / log_theta).floor() as i64;
        let n_last = ((lo - lx) / log_theta).ceil() as i64;
        for n in n_first..=n_last {
            sum += term(n);
        }
    } else {
        let (c0, c1) = datum.core();
        let center = match (c0.is_finite(), c1.is_finite()) {
            (true, true) => 0.5 * (c0 + c1),
            (true, false) => c0,
            (false, true) => c1,
            (false, false) => 0.0,
        };
        let n0 = ((center - lx) / log_theta).round() as i64;
        sum += term(n0);
        for dir in [-1i64, 1] {
            let mut n = n0;
            let mut previous = f64::INFINITY;
            let mut small = 0;
            for _ in 0..1_000_000 {
                n += dir;
                let v = term(n);
                sum += v;
                if v.abs() <= 1e-16 * sum.abs() && v.abs() <= previous {
                    small += 1;
                    if small >= 3 {
                        break;
                    }
                } else {
                    small = 0;
                }
                previous = v.abs();
            }
        }
    }
    Ok(log_theta.abs() * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_saddle_closed_form() {
        let k = FragmentationKernel::homogeneous();
        let sd = saddle_point(&k, 2.0, (-1.0f64).exp()).unwrap();
        assert!((sd.s_plus - 2.0).abs() < 1e-12);
        assert!((sd.phi_at_saddle - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mitosis_saddle_closed_form() {
        let k = FragmentationKernel::mitosis();
        let t = 7.0;
        let x = (-t * 2f64.ln()).exp();
        let sd = saddle_point(&k, t, x).unwrap();
        assert!((sd.s_plus - 2.0).abs() < 1e-12);
        // far in the lower tail of the saddle range
        let sd = saddle_point(&k, 1.0, 1e-200).unwrap();
        let residual = k.derivative_real(sd.s_plus, 1).unwrap() - (1e-200f64).ln();
        assert!(residual.abs() < 1e-10 * 460.0);
    }

    #[test]
    fn saddle_rejects_large_x() {
        let k = FragmentationKernel::homogeneous();
        assert!(matches!(saddle_point(&k, 1.0, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn large_size_value() {
        let d = InitialDatum::two_sided_power(1.0, 0.0, 1.0, 3.0).unwrap();
        let k = FragmentationKernel::homogeneous();
        let v = leading_term(&d, &k, 10.0, 2.0).unwrap();
        assert_eq!(v.regime, Regime::T1LargeX);
        let expected = 0.125 * (-10.0f64 / 3.0).exp();
        assert!((v.value - expected).abs() < 1e-15);
    }

    #[test]
    fn bulk_value_at_known_saddle() {
        let d = InitialDatum::two_sided_power(1.0, 0.0, 1.0, 3.0).unwrap();
        let k = FragmentationKernel::homogeneous();
        // K'(1.5) = -2/2.25; choose x so that s+ = 1.5 at t = 4
        let t = 4.0;
        let x = (t * -2.0 / 2.25f64).exp();
        let v = leading_term(&d, &k, t, x).unwrap();
        assert_eq!(v.regime, Regime::T3aBulk);
        let k2 = 4.0 / 1.5f64.powi(3);
        let expected = 4.0 / 3.0 * x.powf(-1.5) * ((4.0 / 3.0 - 1.0) * t).exp() / (2.0 * PI * t * k2).sqrt();
        assert!((v.value - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn missing_tails_are_reported() {
        let d = InitialDatum::log_gaussian(-5.0, 1.0).unwrap();
        let k = FragmentationKernel::homogeneous();
        assert!(matches!(leading_term(&d, &k, 1.0, 2.0), Err(Error::MissingTail(_))));
    }

    #[test]
    fn series_requires_condition_h() {
        let d = InitialDatum::log_gaussian(-5.0, 1.0).unwrap();
        let k = FragmentationKernel::homogeneous();
        assert!(matches!(
            theorem3b_series(&d, &k, 5.0, 0.01, Some(3)),
            Err(Error::ConditionH(_))
        ));
    }

    #[test]
    fn series_k0_equals_bulk_term() {
        let d = InitialDatum::log_gaussian(-5.0, 1.0).unwrap();
        let k = FragmentationKernel::mitosis();
        let x = 1e-7;
        let a = leading_term(&d, &k, 30.0, x).unwrap();
        let b = theorem3b_series(&d, &k, 30.0, x, Some(0)).unwrap();
        assert_eq!(a.value.to_bits(), b.asymptotic.value.to_bits());
        assert!(!a.warnings.is_empty());
    }

    #[test]
    fn empty_poisson_sum() {
        let d = InitialDatum::indicator(2.0, 3.0).unwrap();
        let k = FragmentationKernel::mitosis();
        // θ^n x = 0.9 · 2^{-n} never lands in (2, 3)
        let t = 1.0;
        let v = poisson_approx(&d, 0.5, &k, t, 0.9 * 0.5f64.powi(2)).unwrap();
        assert_eq!(v, 0.0);
    }
}
