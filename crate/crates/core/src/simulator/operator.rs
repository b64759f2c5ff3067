//! The fragmentation gain `∫_x^∞ (1/y) k0(x/y) u(y) dy` on a uniform grid
//! in `y = log x`, where it reads `Σ a_l/σ_l n(y - log σ_l) + ∫_0^∞ κ(z) n(y+z) dz`
//! with `κ(z) = k0(e^{-z})`. Values above the grid are zero.

use crate::error::{Error, Result};
use crate::kernel::{Density, FragmentationKernel};
use crate::quadrature::gregory_weights;

#[derive(Debug, Clone)]
enum Shift {
    /// `weight * n[i + offset]`
    Exact { offset: usize, weight: f64 },
    /// Cubic Lagrange interpolation on `n[i+base-1 ..= i+base+2]`.
    Cubic { base: usize, coeffs: [f64; 4], weight: f64 },
}

#[derive(Debug, Clone)]
enum Continuous {
    None,
    /// `scale e^{-a z}`, evaluated by a backward recurrence.
    Power {
        decay: f64,
        scale: f64,
        exponent: f64,
    },
    /// `κ` sampled at `j dy`, `j = 0..weights.len()`, Gregory weights folded in.
    Table {
        weights: Vec<f64>,
    },
}

/// Gain operator of a kernel on a grid with spacing `dy`.
#[derive(Debug, Clone)]
pub struct FragmentationOperator {
    dy: f64,
    shifts: Vec<Shift>,
    continuous: Continuous,
}

impl FragmentationOperator {
    pub fn new(kernel: &FragmentationKernel, dy: f64) -> Result<Self> {
        if !(dy > 0.0) || !dy.is_finite() {
            return Err(Error::Domain(format!("grid spacing must be positive, got {dy}")));
        }
        let mut shifts = Vec::new();
        for atom in kernel.atom_list() {
            let z = -atom.location.ln();
            let weight = atom.weight / atom.location;
            let m = z / dy;
            let nearest = m.round();
            if (m - nearest).abs() <= 1e-9 * m.max(1.0) {
                shifts.push(Shift::Exact {
                    offset: nearest as usize,
                    weight,
                });
            } else {
                let base = m.floor();
                let f = m - base;
                // Lagrange basis on nodes -1, 0, 1, 2 at abscissa f
                let coeffs = [
                    -f * (f - 1.0) * (f - 2.0) / 6.0,
                    (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
                    -(f + 1.0) * f * (f - 2.0) / 2.0,
                    (f + 1.0) * f * (f - 1.0) / 6.0,
                ];
                shifts.push(Shift::Cubic {
                    base: base as usize,
                    coeffs,
                    weight,
                });
            }
        }
        let continuous = match kernel.density() {
            None => Continuous::None,
            Some(Density::Power { exponent, scale }) => Continuous::Power {
                decay: (-exponent * dy).exp(),
                scale: *scale,
                exponent: *exponent,
            },
            Some(Density::Tabulated(t)) => {
                let z_max = -t.nodes()[0].ln();
                let count = (z_max / dy).ceil() as usize + 1;
                let g = gregory_weights(count);
                let weights = (0..count)
                    .map(|j| dy * g[j] * kernel.log_density(j as f64 * dy))
                    .collect();
                Continuous::Table { weights }
            }
        };
        Ok(FragmentationOperator { dy, shifts, continuous })
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    /// `out = A n`.
    pub fn apply(&self, n: &[f64], out: &mut [f64]) {
        let len = n.len();
        let at = |k: usize| if k < len { n[k] } else { 0.0 };
        out.iter_mut().for_each(|v| *v = 0.0);
        for shift in &self.shifts {
            match *shift {
                Shift::Exact { offset, weight } => {
                    for i in 0..len.saturating_sub(offset) {
                        out[i] += weight * n[i + offset];
                    }
                }
                Shift::Cubic { base, coeffs, weight } => {
                    for (i, o) in out.iter_mut().enumerate() {
                        let c = i + base;
                        if c >= len {
                            break;
                        }
                        // below the grid bottom the stencil reuses the first node
                        let lower = if c >= 1 { at(c - 1) } else { at(c) };
                        *o += weight
                            * (coeffs[0] * lower + coeffs[1] * at(c) + coeffs[2] * at(c + 1) + coeffs[3] * at(c + 2));
                    }
                }
            }
        }
        match &self.continuous {
            Continuous::None => {}
            Continuous::Power { decay, scale, exponent } => {
                // S_i = ∫_0^dy g + e^{-a dy} S_{i+1}, g(z) = e^{-a z} n(y_i + z)
                let h = self.dy / 24.0;
                let e = |j: i32| (-exponent * j as f64 * self.dy).exp();
                let (em1, e1, e2, e3) = (e(-1), e(1), e(2), e(3));
                let mut running = 0.0;
                for i in (0..len).rev() {
                    let cell = if i >= 1 {
                        h * (-em1 * n[i - 1] + 13.0 * n[i] + 13.0 * e1 * at(i + 1) - e2 * at(i + 2))
                    } else {
                        h * (9.0 * n[0] + 19.0 * e1 * at(1) - 5.0 * e2 * at(2) + e3 * at(3))
                    };
                    running = cell + decay * running;
                    out[i] += scale * running;
                }
            }
            Continuous::Table { weights } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let reach = weights.len().min(len - i);
                    *o += weights[..reach]
                        .iter()
                        .zip(&n[i..i + reach])
                        .map(|(w, v)| w * v)
                        .sum::<f64>();
                }
            }
        }
    }
}
