//! Acceptance checks. Each criterion prints one line; the process exits
//! non-zero when any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fragasym::asymptotics::{leading_term, phi_eval, poisson_approx, saddle_point, theorem3b_series};
use fragasym::kernel::{condition_h, Atom};
use fragasym::mellin::inverse_mellin_u;
use fragasym::regions::{critical_curve_slope, f_zeros, region_report};
use fragasym::simulator::diagnostics::{linear_fit, support_boundaries, SUPPORT_FRACTION};
use fragasym::simulator::grid::{self_similar_residual, simulate_log_grid, GridConfig};
use fragasym::simulator::picard::{picard_solve, PicardGrid};
use fragasym::simulator::profiles::{rescaled_profiles, GridEvaluator, ProfileOptions};
use fragasym::{FragmentationKernel, InitialDatum};
use num_complex::Complex64;

type Outcome = Result<(bool, String), String>;

fn lg(center: f64, width: f64) -> InitialDatum {
    InitialDatum::log_gaussian(center, width).expect("log-Gaussian datum")
}

fn kernels() -> Vec<(&'static str, FragmentationKernel)> {
    vec![
        ("homogeneous", FragmentationKernel::homogeneous()),
        ("mitosis", FragmentationKernel::mitosis()),
        ("power(1)", FragmentationKernel::power(1.0).unwrap()),
    ]
}

fn c1_kernel_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (name, k) in kernels() {
        let k2 = k.mellin_real(2.0).map_err(|e| e.to_string())?;
        let k1 = k.mellin_real(1.0).map_err(|e| e.to_string())?;
        worst = worst.max((k2 - 1.0).abs());
        ok &= (k2 - 1.0).abs() <= 1e-12 && k1 > 1.0;
        let lo = k.lower_abscissa().max(-5.0) + 0.05;
        let s: Vec<f64> = (0..50).map(|i| lo + i as f64 * (8.0 - lo) / 49.0).collect();
        for w in s.windows(2) {
            let (a, b) = (k.mellin_real(w[0]).unwrap(), k.mellin_real(w[1]).unwrap());
            if !(b < a) {
                return Ok((false, format!("{name}: K not decreasing at s = {}", w[1])));
            }
        }
        for &si in &s {
            if !(k.derivative_real(si, 2).unwrap() > 0.0) {
                return Ok((false, format!("{name}: K'' <= 0 at s = {si}")));
            }
        }
    }
    Ok((
        ok,
        format!("max |K(2)-1| = {worst:.1e}; K(1) > 1, K decreasing, K'' > 0 on 50 points"),
    ))
}

fn c2_region_zeros() -> Outcome {
    let (p, q) = f_zeros(&FragmentationKernel::homogeneous()).map_err(|e| e.to_string())?;
    let ep = (p - (2.0 - 2f64.sqrt())).abs();
    let eq = (q - (2.0 + 2f64.sqrt())).abs();
    let (pm, qm) = f_zeros(&FragmentationKernel::mitosis()).map_err(|e| e.to_string())?;
    Ok((
        ep <= 1e-10 && eq <= 1e-10 && pm < 0.0 && qm > 3.0,
        format!("homogeneous errors {ep:.1e}, {eq:.1e}; mitosis p̄ = {pm:.6}, q̄ = {qm:.6}"),
    ))
}

fn c3_closed_form_saddle() -> Outcome {
    let hom = FragmentationKernel::homogeneous();
    let mit = FragmentationKernel::mitosis();
    let ln2 = 2f64.ln();
    let (mut eh, mut em): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        let t = 0.5 + i as f64 * 2.5;
        for j in 0..20 {
            let lx = -0.05 - j as f64 * 3.0;
            let x = lx.exp();
            let sh = saddle_point(&hom, t, x).map_err(|e| e.to_string())?.s_plus;
            eh = eh.max((sh / (2.0 * t / -lx).sqrt() - 1.0).abs());
            // 2^{2-s} log 2 = -log x / t
            let exact = 2.0 - (-lx / (t * ln2)).ln() / ln2;
            let sm = saddle_point(&mit, t, x).map_err(|e| e.to_string())?.s_plus;
            em = em.max((sm - exact).abs() / exact.abs().max(1.0));
        }
    }
    Ok((
        eh <= 1e-10 && em <= 1e-10,
        format!("max relative errors: homogeneous {eh:.1e}, mitosis {em:.1e}"),
    ))
}

fn c4_self_similar_order() -> Outcome {
    let ln2 = 2f64.ln();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, k) in [
        ("homogeneous", FragmentationKernel::homogeneous()),
        ("mitosis", FragmentationKernel::mitosis()),
    ] {
        let res: Vec<f64> = (2..6)
            .map(|level| {
                let dy = ln2 / f64::from(1u32 << level);
                self_similar_residual(&k, 1.0, -10.0, 40.0, dy, dy / 2.0, (-5.0, 0.0))
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= min >= 3.5;
        detail.push(format!(
            "{name} orders {}",
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join("/")
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn mitosis_run(t_end: f64) -> Result<(InitialDatum, fragasym::simulator::LogGridSolution), String> {
    let d = lg(-5.0, 1.0);
    let sol = simulate_log_grid(&FragmentationKernel::mitosis(), &d, &GridConfig::mitosis_default(t_end))
        .map_err(|e| e.to_string())?;
    Ok((d, sol))
}

fn c5_mass_conservation() -> Outcome {
    let (_, sol) = mitosis_run(20.0)?;
    let m0 = sol.mass_series[0].mass;
    let drift = sol
        .mass_series
        .iter()
        .map(|r| (r.mass - m0).abs() / m0)
        .fold(0.0, f64::max);
    // leak is only required to be small before the support reaches y_min
    let horizon = sol.overflow_time.unwrap_or(f64::INFINITY);
    let leak = sol
        .mass_series
        .iter()
        .filter(|r| r.t < horizon)
        .map(|r| r.leak / m0)
        .fold(0.0, f64::max);
    Ok((
        drift <= 1e-4 && leak <= 1e-6,
        format!(
            "max |M(t)-M(0)|/M(0) = {drift:.1e}, relative leak {leak:.1e}, overflow at {:?}",
            sol.overflow_time
        ),
    ))
}

fn c6_three_way() -> Outcome {
    let k = FragmentationKernel::homogeneous();
    let d = lg(-2.0, 1.0);
    let dy = 0.02;
    let (y_min, y_max) = (-30.0, 14.0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for t in [0.5, 1.0] {
        let cfg = GridConfig {
            y_min,
            y_max,
            dy,
            dt: 0.01,
            t_end: t,
            snapshot_every: None,
        };
        let grid = simulate_log_grid(&k, &d, &cfg).map_err(|e| e.to_string())?;
        let snap = grid.last();
        let picard = picard_solve(&k, &d, t, &PicardGrid { y_min, y_max, dy }).map_err(|e| e.to_string())?;
        let ys: Vec<f64> = (0..64).map(|i| -12.0 + i as f64 * 18.0 / 63.0).collect();
        let mut rows = Vec::new();
        for &y in &ys {
            let ug = grid.interpolate(snap, y).map_err(|e| e.to_string())?;
            let up = picard.evaluate(y.exp()).map_err(|e| e.to_string())?;
            let um = inverse_mellin_u(&d, &k, t, y.exp(), None).map_err(|e| e.to_string())?;
            rows.push((ug, up, um));
        }
        let max = rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        for (ug, up, um) in rows {
            if um > 1e-8 * max {
                count += 1;
                for (a, b) in [(ug, up), (ug, um), (up, um)] {
                    worst = worst.max((a - b).abs() / b.abs().max(a.abs()));
                }
            }
        }
    }
    Ok((
        worst <= 1e-3,
        format!("max pairwise relative deviation {worst:.1e} over {count} points"),
    ))
}

fn c7_bulk_trend() -> Outcome {
    let k = FragmentationKernel::homogeneous();
    let d = lg(-2.0, 1.0);
    let k1 = k.derivative_real(2.0, 1).unwrap();
    let mut errs = Vec::new();
    for t in [25.0, 50.0, 100.0] {
        let x = (k1 * t).exp();
        let u = inverse_mellin_u(&d, &k, t, x, None).map_err(|e| e.to_string())?;
        let lt = leading_term(&d, &k, t, x).map_err(|e| e.to_string())?.value;
        errs.push((u / lt - 1.0).abs());
    }
    Ok((
        errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 0.10,
        format!(
            "|u/T3a - 1| at t = 25, 50, 100: {:.3e}, {:.3e}, {:.3e}",
            errs[0], errs[1], errs[2]
        ),
    ))
}

fn c8_large_size_error() -> Outcome {
    let k = FragmentationKernel::homogeneous();
    let d = InitialDatum::two_sided_power(1.0, 0.0, 1.0, 3.0).map_err(|e| e.to_string())?;
    let ts = [5.0, 10.0, 15.0];
    let mut logs = Vec::new();
    for t in ts {
        let u = inverse_mellin_u(&d, &k, t, 2.0, None).map_err(|e| e.to_string())?;
        let t1 = leading_term(&d, &k, t, 2.0).map_err(|e| e.to_string())?.value;
        logs.push((u / t1 - 1.0).abs().ln());
    }
    let finite = logs.iter().all(|l| l.is_finite());
    let fit = if finite { linear_fit(&ts, &logs).ok() } else { None };
    let ok = match fit {
        Some(f) => logs[0] > logs[1] && logs[1] > logs[2] && f.slope < 0.0 && f.r_squared >= 0.99,
        None => false,
    };
    Ok((
        ok,
        format!(
            "log|u/T1 - 1| at t = 5, 10, 15: {:.2}, {:.2}, {:.2}; fit {:?} (u equals T1 exactly for x > 1 with this datum)",
            logs[0], logs[1], logs[2], fit.map(|f| (f.slope, f.r_squared))
        ),
    ))
}

fn c9_condition_h() -> Outcome {
    let atoms = |locs: &[f64]| -> Vec<Atom> {
        locs.iter()
            .map(|&l| Atom {
                location: l,
                weight: 1.0,
            })
            .collect()
    };
    let a = condition_h(&atoms(&[0.5])).map_err(|e| e.to_string())?;
    let b = condition_h(&atoms(&[0.5, 0.25])).map_err(|e| e.to_string())?;
    let c = condition_h(&atoms(&[0.5, 1.0 / 3.0])).map_err(|e| e.to_string())?;
    let d = condition_h(&atoms(&[0.49, 0.343])).map_err(|e| e.to_string())?;
    let near = |x: Option<f64>, y: f64| x.is_some_and(|x| (x - y).abs() < 1e-9);
    let ok = a.satisfied
        && near(a.theta, 0.5)
        && b.satisfied
        && near(b.theta, 0.5)
        && b.exponents == [1, 2]
        && !c.satisfied
        && d.satisfied
        && near(d.theta, 0.7)
        && d.exponents == [2, 3];
    Ok((
        ok,
        format!(
            "{{1/2}} θ={:?}; {{1/2,1/4}} θ={:?} {:?}; {{1/2,1/3}} satisfied={}; {{0.49,0.343}} θ={:?} {:?}",
            a.theta, b.theta, b.exponents, c.satisfied, d.theta, d.exponents
        ),
    ))
}

fn c10_poisson_duality() -> Outcome {
    let k = FragmentationKernel::mitosis();
    let d = lg(-5.0, 1.0);
    let t = 30.0;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let s = 1.1 + i as f64 * 0.8 / 9.0 * 2.25;
        let x = (k.derivative_real(s, 1).unwrap() * t).exp();
        let series = theorem3b_series(&d, &k, t, x, None).map_err(|e| e.to_string())?;
        let dual = poisson_approx(&d, 0.5, &k, t, x).map_err(|e| e.to_string())?;
        worst = worst.max((series.asymptotic.value / dual - 1.0).abs());
    }
    Ok((
        worst <= 1e-6,
        format!("max relative difference {worst:.1e} over 10 points"),
    ))
}

fn c11_profiles() -> Outcome {
    let k = FragmentationKernel::mitosis();
    let (d, sol) = mitosis_run(20.0)?;
    let eval = GridEvaluator { solution: sol };
    let p = rescaled_profiles(&d, &k, &eval, 20.0, ProfileOptions::default()).map_err(|e| e.to_string())?;
    let y0 = k.derivative_real(2.0, 1).unwrap();
    let dm = (p.r_moments.mean - y0).abs();
    let dv = (p.r_tilde_moments.variance - 1.0).abs();
    // the mass-weighted log-size of lg(-5, 1) starts at mean -3, variance 1 and drifts exactly
    let k2 = k.derivative_real(2.0, 2).unwrap();
    let (mean_drift, var_drift) = (y0 - 3.0 / 20.0, 1.0 + 1.0 / (k2 * 20.0));
    Ok((
        dm <= 0.05 && dv <= 0.10,
        format!(
            "mean(r)/M = {:.4} (K'(2) = {y0:.4}, off by {dm:.3}); var(r̃)/M = {:.4}; ∫r/M = {:.6}; \
             exact drift predicts {mean_drift:.4} and {var_drift:.4}",
            p.r_moments.mean,
            p.r_tilde_moments.variance,
            p.r_moments.integral / p.mass
        ),
    ))
}

fn c12_support_lines() -> Outcome {
    let k = FragmentationKernel::mitosis();
    let d = lg(-5.0, 1.0);
    let dy = 2f64.ln() / 16.0;
    let cfg = GridConfig {
        y_min: -800.0,
        y_max: 5.0,
        dy,
        dt: dy / 4.0,
        t_end: 200.0,
        snapshot_every: Some(5.0),
    };
    let sol = simulate_log_grid(&k, &d, &cfg).map_err(|e| e.to_string())?;
    let bounds: Vec<_> = support_boundaries(&sol, SUPPORT_FRACTION)
        .into_iter()
        .filter(|b| b.t >= 50.0)
        .collect();
    let ts: Vec<f64> = bounds.iter().map(|b| b.t).collect();
    let lower = linear_fit(&ts, &bounds.iter().map(|b| b.lower).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let upper = linear_fit(&ts, &bounds.iter().map(|b| b.upper).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let rep = region_report(&k, &d).map_err(|e| e.to_string())?;
    let (a, b) = rep.boundary_slopes;
    let (lo, hi) = (a.min(b), a.max(b));
    let inside = |s: f64| s >= lo && s <= hi;
    Ok((
        lower.r_squared >= 0.99 && upper.r_squared >= 0.99 && inside(lower.slope) && inside(upper.slope),
        format!(
            "lower slope {:.4} (R² {:.6}), upper slope {:.4} (R² {:.6}), ray interval [{lo:.4}, {hi:.4}], t ∈ [50, 200]",
            lower.slope, lower.r_squared, upper.slope, upper.r_squared
        ),
    ))
}

fn c13_critical_curve() -> Outcome {
    let k = FragmentationKernel::mitosis();
    let target = 4.0 * std::f64::consts::E * 2f64.ln();
    let c = critical_curve_slope(&k).c.ok_or("no critical slope found")?;
    let mut worst: f64 = 0.0;
    for t in [1.0, 2.0, 5.0, 10.0, 20.0] {
        let x = (-c * t).exp();
        let sp = saddle_point(&k, t, x).map_err(|e| e.to_string())?;
        let phi = phi_eval(&k, Complex64::new(sp.s_plus, 0.0), t, x).map_err(|e| e.to_string())?;
        worst = worst.max(phi.norm());
    }
    let err = (c - target).abs();
    Ok((
        err <= 1e-8 && worst <= 1e-8,
        format!("c = {c:.12} (error {err:.1e}); max |φ(s₊)| = {worst:.1e}"),
    ))
}

fn main() -> ExitCode {
    let checks: Vec<(u32, &str, fn() -> Outcome, u64)> = vec![
        (1, "kernel identities", c1_kernel_identities, 1),
        (2, "region zeros", c2_region_zeros, 1),
        (3, "closed-form saddle", c3_closed_form_saddle, 1),
        (4, "self-similar residual order", c4_self_similar_order, 60),
        (5, "mass conservation", c5_mass_conservation, 60),
        (6, "three-way solver agreement", c6_three_way, 300),
        (7, "bulk leading-term trend", c7_bulk_trend, 300),
        (8, "large-size exponential error", c8_large_size_error, 120),
        (9, "Condition H detection", c9_condition_h, 1),
        (10, "Poisson/Fourier duality", c10_poisson_duality, 60),
        (11, "rescaled profiles", c11_profiles, 120),
        (12, "support boundary lines", c12_support_lines, 120),
        (13, "critical curve", c13_critical_curve, 1),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check, limit) in checks {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {detail} ({:.2} s, limit {limit} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
