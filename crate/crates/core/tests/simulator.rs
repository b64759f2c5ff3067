use std::sync::Arc;

use fragasym::quadrature::{gregory_integral, integrate_to_infinity, QuadOptions};
use fragasym::simulator::diagnostics::{dirac_diagnostics, mass_quantile};
use fragasym::simulator::export::{write_mass_csv, write_snapshots_csv};
use fragasym::simulator::grid::{grid_mass, simulate_log_grid, GridConfig};
use fragasym::simulator::growth_frag::growth_frag_transform;
use fragasym::simulator::picard::{picard_solve, PicardGrid};
use fragasym::simulator::profiles::{
    rescaled_profiles, FnEvaluator, GridEvaluator, MellinEvaluator, ProfileOptions, SolutionEvaluator,
};
use fragasym::simulator::FragmentationOperator;
use fragasym::{Error, FragmentationKernel, InitialDatum};
use num_complex::Complex64;

fn lg() -> InitialDatum {
    InitialDatum::log_gaussian(-2.0, 1.0).unwrap()
}

#[test]
fn picard_matches_first_order_duhamel() {
    let k = FragmentationKernel::homogeneous();
    let d = lg();
    let grid = PicardGrid {
        y_min: -25.0,
        y_max: 12.0,
        dy: 0.02,
    };
    let u0: Vec<f64> = (0..grid.len()).map(|i| d.evaluate_log(grid.y(i))).collect();
    let mut au0 = vec![0.0; u0.len()];
    FragmentationOperator::new(&k, grid.dy).unwrap().apply(&u0, &mut au0);
    let err = |t: f64| {
        let p = picard_solve(&k, &d, t, &grid).unwrap();
        p.values
            .iter()
            .zip(u0.iter().zip(&au0))
            .map(|(v, (a, b))| (v - (-t).exp() * (a + t * b)).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(1e-2) / err(1e-3);
    assert!(ratio > 80.0 && ratio < 120.0, "ratio {ratio}");
}

#[test]
fn picard_conserves_mass() {
    for k in [FragmentationKernel::homogeneous(), FragmentationKernel::mitosis()] {
        let p = picard_solve(
            &k,
            &lg(),
            2.0,
            &PicardGrid {
                y_min: -40.0,
                y_max: 12.0,
                dy: 2f64.ln() / 32.0,
            },
        )
        .unwrap();
        assert!((p.mass / p.initial_mass - 1.0).abs() < 1e-6);
        assert!((p.initial_mass / lg().mass() - 1.0).abs() < 1e-10);
        assert_eq!(p.iterations.len(), 4);
    }
}

#[test]
fn grid_and_picard_agree_for_mitosis() {
    let k = FragmentationKernel::mitosis();
    let d = lg();
    let dy = 2f64.ln() / 32.0;
    let (y_min, y_max) = (-30.0, 12.0);
    let sol = simulate_log_grid(
        &k,
        &d,
        &GridConfig {
            y_min,
            y_max,
            dy,
            dt: dy / 8.0,
            t_end: 1.0,
            snapshot_every: None,
        },
    )
    .unwrap();
    let p = picard_solve(&k, &d, 1.0, &PicardGrid { y_min, y_max, dy }).unwrap();
    let g = &sol.last().values;
    let max = g.iter().copied().fold(0.0, f64::max);
    for (i, (a, b)) in g.iter().zip(&p.values).enumerate() {
        if *b > 1e-8 * max {
            assert!((a / b - 1.0).abs() < 1e-3, "y = {}: {a} vs {b}, max {max}", sol.y(i));
        }
    }
}

#[test]
fn snapshots_stay_nonnegative_and_concentrate() {
    let k = FragmentationKernel::mitosis();
    let d = InitialDatum::log_gaussian(-5.0, 1.0).unwrap();
    let sol = simulate_log_grid(&k, &d, &GridConfig::mitosis_default(20.0)).unwrap();
    for s in &sol.snapshots {
        let max = s.values.iter().copied().fold(0.0, f64::max);
        let min = s.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-12 * max);
    }
    let hi: Vec<f64> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&t| mass_quantile(&sol, sol.snapshot_at(t).unwrap(), 0.95))
        .collect();
    assert!(hi[0] > hi[1] && hi[1] > hi[2]);

    let z = [0.0, 1e-6, 1e-4, 1e-3, 1e-2, 0.1];
    let rep = dirac_diagnostics(&sol, &k, &z).unwrap();
    assert!(rep.dissipation_nonpositive && rep.entropy_nonincreasing && rep.interval_shrinking);
    for (row, rec) in rep.rows.iter().zip(&sol.mass_series) {
        assert_eq!(row.entropy[0], rec.mass);
    }
}

#[test]
fn profile_moments_follow_the_exact_drift() {
    // mass-weighted log-size: mean m0 + K'(2) t, variance v0 + K''(2) t
    let k = FragmentationKernel::mitosis();
    let d = InitialDatum::log_gaussian(-5.0, 1.0).unwrap();
    let (m0, v0) = (-3.0, 1.0);
    let (k1, k2) = (k.derivative_real(2.0, 1).unwrap(), k.derivative_real(2.0, 2).unwrap());
    let eval = MellinEvaluator {
        datum: d.clone(),
        kernel: k.clone(),
    };
    for t in [5.0, 20.0] {
        let p = rescaled_profiles(&d, &k, &eval, t, ProfileOptions::default()).unwrap();
        assert!(
            (p.r_moments.mean - (k1 + m0 / t)).abs() < 1e-6,
            "t = {t}: {}",
            p.r_moments.mean
        );
        let want = 1.0 + v0 / (k2 * t);
        assert!((p.r_tilde_moments.variance / want - 1.0).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn cumulative_moment_of_the_homogeneous_kernel() {
    let k = FragmentationKernel::homogeneous();
    for x in [0.1, 0.5, 0.9] {
        assert!((k.cumulative_first_moment(x) - x * x).abs() < 1e-14);
    }
    assert!((k.cumulative_first_moment(1.0) - 1.0).abs() < 1e-14);
    assert!((FragmentationKernel::mitosis().cumulative_first_moment(1.0) - 1.0).abs() < 1e-14);
}

#[test]
fn stability_and_range_errors() {
    let k = FragmentationKernel::mitosis();
    let mut cfg = GridConfig::mitosis_default(1.0);
    cfg.dt = 0.2;
    assert!(matches!(simulate_log_grid(&k, &lg(), &cfg), Err(Error::Stability(_))));
    let sol = simulate_log_grid(&k, &lg(), &GridConfig::mitosis_default(1.0)).unwrap();
    let eval = GridEvaluator { solution: sol };
    assert!(matches!(eval.u(0.75, 0.1), Err(Error::Range(_))));
    assert!(matches!(
        growth_frag_transform(&eval, 5.0, 1.0, 1e-26),
        Err(Error::Range(_))
    ));
}

#[test]
fn growth_frag_mass_grows_exponentially() {
    let k = FragmentationKernel::mitosis();
    let d = lg();
    let t = 2.0;
    let mut cfg = GridConfig::mitosis_default(t);
    cfg.snapshot_every = None;
    let sol = simulate_log_grid(&k, &d, &cfg).unwrap();
    let c = 0.8;
    let (y_min, dy, len) = (sol.y_min, sol.dy, sol.len);
    let eval = GridEvaluator { solution: sol };
    // nodes pulled back onto the grid
    let g: Vec<f64> = (0..len)
        .map(|i| {
            let w = y_min + i as f64 * dy + c * t;
            (2.0 * w).exp() * growth_frag_transform(&eval, c, t, w.exp()).unwrap()
        })
        .collect();
    let m = gregory_integral(&g, dy);
    let want = (c * t).exp() * grid_mass(&eval.solution.last().values, y_min, dy);
    assert!((m / want - 1.0).abs() < 1e-12);
}

#[test]
fn growth_frag_residual_is_second_order() {
    // v built from the exact solution u = x^{-σ} e^{(K(σ)-1)t}
    let k = FragmentationKernel::homogeneous();
    let sigma = 1.5;
    let ks = k.mellin_real(sigma).unwrap();
    let eval = FnEvaluator {
        f: Arc::new(move |t: f64, x: f64| x.powf(-sigma) * ((ks - 1.0) * t).exp()),
    };
    let c = 0.6;
    let v = |t: f64, x: f64| growth_frag_transform(&eval, c, t, x).unwrap();
    let (t, x) = (1.0, 0.8);
    let gain = integrate_to_infinity(
        |y| Complex64::new(2.0 / y * v(t, y), 0.0),
        x,
        QuadOptions::with_rel_tol(1e-13),
    )
    .unwrap()
    .value
    .re;
    let residual = |h: f64| {
        let dt = (v(t + h, x) - v(t - h, x)) / (2.0 * h);
        let dx = (c * (x + h) * v(t, x + h) - c * (x - h) * v(t, x - h)) / (2.0 * h);
        (dt + dx + v(t, x) - gain).abs()
    };
    let ratio = residual(1e-2) / residual(5e-3);
    assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
}

#[test]
fn exports_are_deterministic() {
    let k = FragmentationKernel::mitosis();
    let render = || {
        let sol = simulate_log_grid(&k, &lg(), &GridConfig::mitosis_default(1.0)).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_snapshots_csv(&sol, &mut a).unwrap();
        write_mass_csv(&sol, &mut b).unwrap();
        (a, b)
    };
    let first = render();
    assert_eq!(first, render());
    let text = String::from_utf8(first.1).unwrap();
    assert!(text.starts_with("t,mass,leak\n0.0,"));
}
