use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kwsolve::kw::{
    build_subsolution, build_supersolution, is_supersolution, monotone_solve, necessary_check,
    newton_solve, solve_kw,
};
use kwsolve::operators::{laplacian, lee_pairing};
use kwsolve::random::{band_limited, divergence_free_form};
use kwsolve::{GridSpec, KWProblem, KwConfig, ScalarField, Status};

/// `φ = (L w* + c) e^{-w*}` with `L w* ≤ |c|/2`, so `φ < 0` and `w*` solves the
/// discrete problem exactly.
fn manufactured(seed: u64, c: f64, two_d: bool) -> (KWProblem, ScalarField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = if two_d {
        GridSpec::new(&[16, 16]).unwrap()
    } else {
        GridSpec::new(&[32]).unwrap()
    };
    let alpha = divergence_free_form(&spec, 0.5, &mut rng);
    let shape = band_limited(&spec, 2, &mut rng);
    let l_shape = laplacian(&shape)
        .add(&lee_pairing(&alpha, &shape).unwrap())
        .unwrap();
    let amplitude = (0.5 * c.abs() / l_shape.sup_norm()).min(1.0);
    let w_star = shape.scale(amplitude).unwrap();
    let phi = l_shape
        .scale(amplitude)
        .unwrap()
        .zip_map(&w_star, |l, w| (l + c) * (-w).exp())
        .unwrap();
    (KWProblem::new(alpha, c, phi, 1e-10).unwrap(), w_star)
}

fn negative_c() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-0.1), Just(-1.0), Just(-10.0)]
}

fn config() -> KwConfig {
    KwConfig {
        max_iter: 20_000,
        ..KwConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monotone_trace_is_ordered(seed in any::<u64>(), c in negative_c(), two_d in any::<bool>()) {
        let (prob, w_star) = manufactured(seed, c, two_d);
        let cfg = config();
        let upper = build_supersolution(&prob, &cfg).unwrap();
        let lower = build_subsolution(&prob).unwrap().map(|v| v.min(upper.min())).unwrap();
        let report = monotone_solve(&prob, &lower, &upper, &cfg).unwrap();
        prop_assert_eq!(report.status, Status::Converged);
        let diag = report.monotone.unwrap();
        prop_assert!(diag.min_increment >= -1e-10);
        prop_assert!(diag.max_excess <= 1e-10);
        prop_assert!(report.trace.windows(2).all(|w| w[1] >= w[0] - 1e-10));
        prop_assert!(report.solution.unwrap().sup_distance(&w_star).unwrap() < 1e-6);
    }

    #[test]
    fn solutions_are_unique(seed in any::<u64>(), c in negative_c(), two_d in any::<bool>()) {
        let (prob, _) = manufactured(seed, c, two_d);
        let cfg = config();
        let upper = build_supersolution(&prob, &cfg).unwrap();
        let lower = build_subsolution(&prob).unwrap().map(|v| v.min(upper.min())).unwrap();
        let a = monotone_solve(&prob, &lower, &upper, &cfg).unwrap();
        let b = newton_solve(&prob, &upper, &cfg).unwrap();
        let z = newton_solve(&prob, &ScalarField::zeros(prob.phi.spec()), &cfg).unwrap();
        prop_assert!(a.is_converged() && b.is_converged() && z.is_converged());
        let a = a.solution.unwrap();
        prop_assert!(a.sup_distance(&b.solution.unwrap()).unwrap() <= 1e-6);
        prop_assert!(a.sup_distance(&z.solution.unwrap()).unwrap() <= 1e-6);
    }

    #[test]
    fn scaling_shifts_by_log(seed in any::<u64>(), c in negative_c(), factor in 0.2f64..8.0) {
        let (prob, _) = manufactured(seed, c, false);
        let cfg = KwConfig { tol: 1e-11, ..config() };
        let scaled = KWProblem { phi: prob.phi.scale(factor).unwrap(), ..prob.clone() };
        let a = solve_kw(&prob, &cfg).unwrap().solution.unwrap();
        let b = solve_kw(&scaled, &cfg).unwrap().solution.unwrap();
        let dev = a.sub(&b).unwrap().offset(-factor.ln()).unwrap().sup_norm();
        prop_assert!(dev <= 1e-8, "deviation {dev:e}");
    }

    #[test]
    fn supersolution_survives_smaller_phi(seed in any::<u64>(), c in negative_c(), two_d in any::<bool>(), drop in 0.0f64..2.0) {
        let (prob, _) = manufactured(seed, c, two_d);
        let upper = build_supersolution(&prob, &config()).unwrap();
        let bump = band_limited(prob.phi.spec(), 2, &mut ChaCha8Rng::seed_from_u64(seed ^ 1))
            .map(|v| drop * (1.0 + v))
            .unwrap();
        let smaller = KWProblem { phi: prob.phi.sub(&bump).unwrap(), ..prob.clone() };
        prop_assert!(is_supersolution(&upper, &smaller).unwrap().0);
    }

    #[test]
    fn converged_solutions_pass_the_necessary_check(seed in any::<u64>(), c in negative_c(), two_d in any::<bool>()) {
        let (prob, _) = manufactured(seed, c, two_d);
        let report = solve_kw(&prob, &config()).unwrap();
        prop_assert!(report.is_converged());
        let check = necessary_check(&prob, &config().linear).unwrap();
        prop_assert!(check.positive && check.mean_negative);
    }
}
