//! The growth-fragmentation solution `v(t,x) = e^{-ct} u(t, x e^{-ct})`,
//! which solves `∂t v + ∂x(c x v) + v = ∫_x^∞ (1/y) k0(x/y) v dy`.

use serde::{Deserialize, Serialize};

use super::profiles::SolutionEvaluator;
use crate::error::{Error, Result};

pub fn growth_frag_transform(eval: &dyn SolutionEvaluator, c: f64, t: f64, x: f64) -> Result<f64> {
    if !c.is_finite() || !(x > 0.0) {
        return Err(Error::Domain(format!(
            "need finite c and x > 0, got c = {c}, x = {x:e}"
        )));
    }
    let y = x.ln() - c * t;
    if let Some((lo, hi)) = eval.log_range(t) {
        if y < lo || y > hi {
            return Err(Error::Range(format!(
                "pulled-back point log x - ct = {y} leaves the evaluator range [{lo}, {hi}]"
            )));
        }
    }
    Ok((-c * t).exp() * eval.u(t, y.exp())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFragSample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

/// `v` on the product of `times` and `xs`, ordered by `t` then `x`.
pub fn growth_frag_grid(
    eval: &dyn SolutionEvaluator,
    c: f64,
    times: &[f64],
    xs: &[f64],
) -> Result<Vec<GrowthFragSample>> {
    let mut out = Vec::with_capacity(times.len() * xs.len());
    for &t in times {
        for &x in xs {
            out.push(GrowthFragSample {
                t,
                x,
                v: growth_frag_transform(eval, c, t, x)?,
            });
        }
    }
    Ok(out)
}
