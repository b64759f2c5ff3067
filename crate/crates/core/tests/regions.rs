use fragasym::asymptotics::{phi_eval, saddle_point};
use fragasym::regions::{
    classify_growth_frag, critical_curve_slope, f_exponent, f_zeros, g_exponent, region_report, GrowthFragZone,
    MaxGrowthRay,
};
use fragasym::{FragmentationKernel, InitialDatum};
use num_complex::Complex64;

fn smooth() -> InitialDatum {
    InitialDatum::log_gaussian(0.0, 1.0).unwrap()
}

#[test]
fn exponent_examples() {
    let h = FragmentationKernel::homogeneous();
    assert!(f_exponent(&h, 2.0 - 2f64.sqrt()).unwrap().abs() < 1e-14);
    assert!((f_exponent(&h, 2.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((f_exponent(&h, 1.0).unwrap() - 1.0).abs() < 1e-15);
    for s in [0.3, 1.7, 4.0] {
        assert_eq!(g_exponent(&h, s, s).unwrap(), f_exponent(&h, s).unwrap());
    }
    assert!(g_exponent(&h, 0.5, (1.0f64 / 3.0).sqrt()).unwrap().abs() < 1e-14);
    assert!(g_exponent(&h, 3.0, 12f64.sqrt()).unwrap().abs() < 1e-14);
}

#[test]
fn homogeneous_reports() {
    let h = FragmentationKernel::homogeneous();
    let r = region_report(&h, &smooth()).unwrap();
    let (p, q) = (2.0 - 2f64.sqrt(), 2.0 + 2f64.sqrt());
    assert!((r.growth_interval.0 - p).abs() < 1e-12 && (r.growth_interval.1 - q).abs() < 1e-12);
    assert!((r.boundary_slopes.0 + 2.0 / (p * p)).abs() < 1e-10);
    assert!((r.boundary_slopes.1 + 2.0 / (q * q)).abs() < 1e-10);
    assert!(r.boundary_slopes.0 < r.boundary_slopes.1 && r.boundary_slopes.1 < 0.0);

    // p0 = 0.5 < p̄ keeps p̄; q0 = 3 < q̄ switches to s̄(q0) = √12
    let d = InitialDatum::two_sided_power(1.0, 0.5, 1.0, 3.0).unwrap();
    let r = region_report(&h, &d).unwrap();
    assert!((r.growth_interval.0 - p).abs() < 1e-12);
    assert!((r.growth_interval.1 - 12f64.sqrt()).abs() < 1e-10);
    assert!(r.s_bar_q0.is_some());
    assert!(r.boundary_slopes.0 < r.boundary_slopes.1 && r.boundary_slopes.1 < 0.0);
}

#[test]
fn sign_pattern_of_f() {
    for k in [
        FragmentationKernel::homogeneous(),
        FragmentationKernel::mitosis(),
        FragmentationKernel::power(1.0).unwrap(),
    ] {
        let (p, q) = f_zeros(&k).unwrap();
        assert!(f_exponent(&k, p).unwrap().abs() < 1e-10 && f_exponent(&k, q).unwrap().abs() < 1e-10);
        assert!(f_exponent(&k, 1.0).unwrap() > 0.0);
        assert!((f_exponent(&k, 2.0).unwrap() + k.derivative_real(2.0, 1).unwrap()).abs() < 1e-14);
        let lo = k.lower_abscissa().max(p - 10.0);
        for i in 1..100 {
            let inside = p + (q - p) * i as f64 / 100.0;
            assert!(f_exponent(&k, inside).unwrap() > 0.0);
            let below = lo + (p - lo) * i as f64 / 100.0;
            assert!(f_exponent(&k, below).unwrap() < 0.0);
            let above = q + 10.0 * i as f64 / 100.0;
            assert!(f_exponent(&k, above).unwrap() < 0.0);
        }
        // F' = (1 - s) K''
        for s in [lo + 0.1, 0.5, 0.9, 1.1, 3.0, 6.0] {
            let slope = f_exponent(&k, s + 1e-5).unwrap() - f_exponent(&k, s - 1e-5).unwrap();
            assert_eq!(slope > 0.0, s < 1.0, "s = {s}");
        }
        // G(p0, ·) increases for p0 < 1, G(q0, ·) decreases for q0 > 2
        for s in [0.5, 1.0, 2.0, 4.0] {
            assert!(g_exponent(&k, 0.5, s + 0.01).unwrap() > g_exponent(&k, 0.5, s).unwrap());
            assert!(g_exponent(&k, 3.0, s + 0.01).unwrap() < g_exponent(&k, 3.0, s).unwrap());
        }
    }
    let (pm, qm) = f_zeros(&FragmentationKernel::mitosis()).unwrap();
    assert!(pm < 0.0 && qm > 3.0);
}

#[test]
fn growth_frag_classification() {
    let h = FragmentationKernel::homogeneous();
    let d = smooth();
    assert_eq!(
        classify_growth_frag(&h, &d, 10.0).unwrap().zone,
        GrowthFragZone::ZoneToInfinity
    );
    let mid = classify_growth_frag(&h, &d, 1.0).unwrap();
    assert_eq!(
        mid.zone,
        GrowthFragZone::Mixed {
            max_growth_ray: MaxGrowthRay::ToZero
        }
    );
    assert!((mid.upper_threshold - 2.0 / (2.0 - 2f64.sqrt()).powi(2)).abs() < 1e-10);
    assert!((mid.lower_threshold - 2.0 / (2.0 + 2f64.sqrt()).powi(2)).abs() < 1e-10);
    assert!(mid.caveat.is_none());
    assert_eq!(
        classify_growth_frag(&h, &d, 0.1).unwrap().zone,
        GrowthFragZone::ZoneToZero
    );
    assert!(classify_growth_frag(&h, &d, -1.0).is_err());
}

#[test]
fn critical_curves() {
    assert!(critical_curve_slope(&FragmentationKernel::homogeneous()).c.is_none());
    let m = critical_curve_slope(&FragmentationKernel::mitosis());
    assert!((m.c.unwrap() - 4.0 * std::f64::consts::E * 2f64.ln()).abs() < 1e-8);
    assert!((m.s.unwrap() + 1.0 / 2f64.ln()).abs() < 1e-8);
    let k = FragmentationKernel::power(1.0).unwrap();
    let p = critical_curve_slope(&k);
    assert!((p.c.unwrap() - 12.0).abs() < 1e-8 && (p.s.unwrap() + 0.5).abs() < 1e-8);
    let c = p.c.unwrap();
    for t in [0.5, 1.0, 3.0, 8.0, 15.0] {
        let x = (-c * t).exp();
        let s = saddle_point(&k, t, x).unwrap().s_plus;
        assert!(phi_eval(&k, Complex64::new(s, 0.0), t, x).unwrap().norm() < 1e-8 * t);
    }
}
