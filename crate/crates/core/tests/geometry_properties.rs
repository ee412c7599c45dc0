use proptest::prelude::*;

use kwsolve::geometry::{coefficient, recover_metric, reduce, transform_s};
use kwsolve::kw::{solve_prescribed, Strategy as Method};
use kwsolve::linsolve::LinearConfig;
use kwsolve::operators::{chern_laplacian, divergence};
use kwsolve::{GeometrySetup, GridSpec, KwConfig, OneForm, ScalarField};

fn setup_strategy() -> impl Strategy<Value = GeometrySetup> {
    (
        1u32..5,
        prop_oneof![Just(-1.0), Just(0.0), Just(1.0), -2.0f64..2.0],
    )
        .prop_map(|(n, t)| GeometrySetup::new(n, t).unwrap())
}

fn drift(g: &GridSpec, a: f64) -> OneForm {
    let comps = vec![
        ScalarField::from_fn(g, |x| a * x[1].sin()).unwrap(),
        ScalarField::from_fn(g, |x| a * x[0].cos()).unwrap(),
    ];
    OneForm::new(comps).unwrap()
}

proptest! {
    #[test]
    fn constant_factor_scales_exactly(kappa in -3.0f64..3.0, setup in setup_strategy(), a in -1.0f64..1.0) {
        let g = GridSpec::new(&[8, 8]).unwrap();
        let s = ScalarField::from_fn(&g, |x| x[0].cos() - 0.3).unwrap();
        let u = ScalarField::constant(&g, kappa).unwrap();
        let hat = transform_s(&s, &u, &drift(&g, a), &setup).unwrap();
        let factor = (-kappa).exp();
        for (h, v) in hat.values().iter().zip(s.values()) {
            prop_assert_eq!(*h, factor * v);
        }
    }

    #[test]
    fn degenerate_coefficient_vanishes(n in 2u32..1000) {
        let t = 1.0 / (1.0 - n as f64);
        prop_assert!(coefficient(n, t).abs() <= 1e-12);
    }

    #[test]
    fn reduction_is_consistent(setup in setup_strategy(), a in -0.5f64..0.5, amp in 0.0f64..1.0) {
        prop_assume!(!setup.is_degenerate());
        let g = GridSpec::new(&[16, 16]).unwrap();
        let alpha = drift(&g, a);
        let s = ScalarField::from_fn(&g, |x| amp * x[0].sin() * x[1].cos() - 0.5).unwrap();
        let s_hat = ScalarField::from_fn(&g, |x| -1.0 - 0.2 * x[1].sin()).unwrap();
        let cfg = LinearConfig::default();
        let red = reduce(&s, &s_hat, &alpha, &setup, &cfg).unwrap();
        prop_assert!(red.g.mean().abs() < 1e-12);
        // Δ^Ch g = (2/k)(mean s - s)
        let k = setup.k_t();
        let lhs = chern_laplacian(&alpha, &red.g).unwrap();
        let rhs = s.map(|v| 2.0 / k * (s.mean() - v)).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-7 * (1.0 + rhs.sup_norm()));
        // shifting g by a constant changes w and φ but not u = w + g
        let w = ScalarField::from_fn(&g, |x| 0.1 * x[0].cos()).unwrap();
        let u = recover_metric(&w, &red).unwrap();
        let mut shifted = red.clone();
        shifted.g = red.g.offset(0.7).unwrap();
        let u2 = recover_metric(&w.offset(-0.7).unwrap(), &shifted).unwrap();
        prop_assert!(u.sup_distance(&u2).unwrap() < 1e-14);
    }
}

#[test]
fn drift_forms_are_divergence_free() {
    let g = GridSpec::new(&[16, 16]).unwrap();
    assert!(divergence(&drift(&g, 0.5)).sup_norm() < 1e-14);
}

// Discrete round trip is exact up to solver tolerance; against the analytic
// curvature the error falls at fourth order.
#[test]
fn round_trip_converges_under_refinement() {
    let setup = GeometrySetup::new(1, 1.0).unwrap();
    let cfg = KwConfig {
        tol: 1e-12,
        ..KwConfig::default()
    };
    let u = |x: &[f64]| 0.3 * x[0].sin();
    let error = |n: usize| {
        let g = GridSpec::new(&[n]).unwrap();
        let s = ScalarField::constant(&g, -1.0).unwrap();
        let u_star = ScalarField::from_fn(&g, u).unwrap();
        // Δ_d u = 0.3 sin x, k = 1
        let s_hat =
            ScalarField::from_fn(&g, |x| (-u(x)).exp() * (-1.0 + 0.5 * 0.3 * x[0].sin())).unwrap();
        let zero = OneForm::zero(&g);
        let out = solve_prescribed(&s, &s_hat, &zero, &setup, Method::Newton, &cfg).unwrap();
        let discrete = transform_s(&s, &u_star, &zero, &setup).unwrap();
        let back = solve_prescribed(&s, &discrete, &zero, &setup, Method::Newton, &cfg).unwrap();
        assert!(back.u.unwrap().sup_distance(&u_star).unwrap() < 1e-9);
        out.u.unwrap().sup_distance(&u_star).unwrap()
    };
    let coarse = error(32);
    let fine = error(64);
    assert!(coarse / fine > 12.0, "{coarse:e} -> {fine:e}");
}
