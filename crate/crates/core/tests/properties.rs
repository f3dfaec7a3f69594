use proptest::prelude::*;
use qcharm_core::boundary::{fourier_analyze, make_boundary_map, BoundaryKind, CircleFunction};
use qcharm_core::constants::colipschitz_constant;
use qcharm_core::domain::DomainSpec;
use qcharm_core::harmonic::{poisson_extend, GradientSample};
use qcharm_core::validation::catalog_domains;
use qcharm_core::Complex64;

#[test]
fn pipeline_positivity_and_monotonicity() {
    for d in catalog_domains() {
        let mut previous = f64::INFINITY;
        for i in 0..=20 {
            let k = 1.0 + 0.1 * i as f64;
            let r = colipschitz_constant(k, &d).unwrap();
            assert!(r.rho > 0.0 && r.rho <= 0.25);
            assert!(r.b >= 1.0);
            assert!(r.phi_max < 0.0);
            assert!(r.ln_c_phi.is_finite() && r.c_phi >= 0.0);
            assert!(r.ln_c.is_finite() && r.c >= 0.0);
            if d == DomainSpec::Disk {
                assert!(r.ln_c <= previous, "C(K) increased at K = {k}");
                previous = r.ln_c;
            }
        }
    }
}

#[test]
fn report_serializes_with_trace() {
    let r = colipschitz_constant(1.5, &DomainSpec::non_convex_showcase()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["K", "rho", "A", "B", "phi_max", "c_phi", "C", "colip", "ln_c", "trace"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["trace"].as_array().unwrap().len(), r.trace.len());
}

#[test]
fn csv_file_round_trip() {
    let f = make_boundary_map(&BoundaryKind::SinePerturbed { lambda: 0.4, k: 2 }, 64).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("boundary.csv");
    f.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let g = CircleFunction::read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(f.samples(), g.samples());
    assert_eq!(f.coeffs(), g.coeffs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twonorm_chain(re1 in -3.0..3.0f64, im1 in -3.0..3.0f64, re2 in -3.0..3.0f64, im2 in -3.0..3.0f64) {
        let s = GradientSample::from_wirtinger(Complex64::new(re1, im1), Complex64::new(re2, im2));
        prop_assert!(s.grad_norm <= s.grad_norm2 * (1.0 + 1e-15));
        prop_assert!(s.grad_norm2 <= std::f64::consts::SQRT_2 * s.grad_norm * (1.0 + 1e-15));
        prop_assert!(s.jacobian <= s.grad_norm * s.l * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn synthesis_inverts_analysis(values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 32)) {
        let samples: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let f = fourier_analyze(samples.clone()).unwrap();
        for (a, b) in f.synthesize().iter().zip(&samples) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn sine_extension_matches_boundary(lambda in 0.0..0.9f64, x in 0.0..std::f64::consts::TAU) {
        let kind = BoundaryKind::SinePerturbed { lambda, k: 1 };
        let w = poisson_extend(&make_boundary_map(&kind, 256).unwrap());
        let t = Complex64::from_polar(1.0, x);
        let expected = Complex64::from_polar(1.0, x + lambda * x.sin());
        prop_assert!((w.eval(t).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn inversion_round_trip(r in 0.0..0.999f64, theta in 0.0..std::f64::consts::TAU, c in 0.0..0.33f64) {
        let d = DomainSpec::Polynomial { c: Complex64::new(c, 0.0), n: 3 };
        let z = Complex64::from_polar(r, theta);
        let back = d.invert_omega(d.omega(z).unwrap()).unwrap();
        prop_assert!((back - z).norm() < 1e-12);
    }
}
