//! Continued-fraction convergents and bounded-denominator rationality tests.

/// A convergent `p / q` of a continued-fraction expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergent {
    pub p: i64,
    pub q: i64,
}

impl Convergent {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// Convergents of `x` with denominators up to `max_denominator`.
pub fn convergents(x: f64, max_denominator: i64) -> Vec<Convergent> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let (mut p_prev2, mut q_prev2) = (0i64, 1i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let p = match a.checked_mul(p_prev).and_then(|v| v.checked_add(p_prev2)) {
            Some(v) => v,
            None => break,
        };
        let q = match a.checked_mul(q_prev).and_then(|v| v.checked_add(q_prev2)) {
            Some(v) => v,
            None => break,
        };
        if q > max_denominator {
            break;
        }
        out.push(Convergent { p, q });
        p_prev2 = p_prev;
        q_prev2 = q_prev;
        p_prev = p;
        q_prev = q;
        let frac = rest - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    out
}

/// Outcome of testing whether a real number is a bounded-denominator rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rationality {
    /// `x = p/q` with integer residual `|q x - p|` below tolerance.
    Rational { p: i64, q: i64, residual: f64 },
    /// No convergent within the denominator bound came close; `residual` is the best seen.
    Irrational { residual: f64 },
    /// The best residual sits in the gray band `(tol, 10 tol]`.
    Ambiguous { p: i64, q: i64, residual: f64 },
}

/// Tests `x` for rationality: a convergent `p/q` (q ≤ `max_denominator`)
/// is accepted when the integer residual `|q x − p|` is at most `tol`.
pub fn detect_rational(x: f64, max_denominator: i64, tol: f64) -> Rationality {
    let mut best: Option<(Convergent, f64)> = None;
    for c in convergents(x, max_denominator) {
        let residual = (c.q as f64 * x - c.p as f64).abs();
        if residual <= tol {
            return Rationality::Rational {
                p: c.p,
                q: c.q,
                residual,
            };
        }
        if best.is_none_or(|(_, r)| residual < r) {
            best = Some((c, residual));
        }
    }
    match best {
        Some((c, r)) if r <= 10.0 * tol => Rationality::Ambiguous {
            p: c.p,
            q: c.q,
            residual: r,
        },
        Some((_, r)) => Rationality::Irrational { residual: r },
        None => Rationality::Irrational {
            residual: f64::INFINITY,
        },
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i64, b: i64) -> Option<i64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b).map(i64::abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergents_of_pi() {
        let c = convergents(std::f64::consts::PI, 1000);
        let pairs: Vec<(i64, i64)> = c.iter().map(|c| (c.p, c.q)).collect();
        assert_eq!(pairs, vec![(3, 1), (22, 7), (333, 106), (355, 113)]);
    }

    #[test]
    fn exact_ratios_are_detected() {
        let r = (0.25f64).ln() / (0.5f64).ln();
        assert!(matches!(
            detect_rational(r, 1_000_000, 1e-9),
            Rationality::Rational { p: 2, q: 1, .. }
        ));
        let r = (0.343f64).ln() / (0.49f64).ln();
        assert!(matches!(
            detect_rational(r, 1_000_000, 1e-9),
            Rationality::Rational { p: 3, q: 2, .. }
        ));
    }

    #[test]
    fn log2_over_log3_is_not_rational() {
        let r = 2f64.ln() / 3f64.ln();
        assert!(matches!(
            detect_rational(r, 1_000_000, 1e-9),
            Rationality::Irrational { .. }
        ));
    }

    #[test]
    fn gcd_lcm() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(lcm(4, 6), Some(12));
    }
}
