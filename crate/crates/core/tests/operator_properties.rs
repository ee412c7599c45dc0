use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kwsolve::linsolve::{apply, solve_shifted, LinearConfig, LinearOperatorSpec};
use kwsolve::operators::{chern_laplacian, laplacian, lee_pairing, mean};
use kwsolve::random::{band_limited, divergence_free_form};
use kwsolve::{GridSpec, ScalarField};

fn grid() -> impl Strategy<Value = GridSpec> {
    prop::collection::vec((4usize..9).prop_map(|k| 2 * k), 1..=3)
        .prop_map(|dims| GridSpec::new(&dims).unwrap())
}

proptest! {
    #[test]
    fn constants_are_in_the_kernel(g in grid(), v in -1e3f64..1e3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = divergence_free_form(&g, 1.0, &mut rng);
        let f = ScalarField::constant(&g, v).unwrap();
        prop_assert_eq!(laplacian(&f).sup_norm(), 0.0);
        prop_assert_eq!(chern_laplacian(&alpha, &f).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn drift_term_integrates_to_zero(g in grid(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = divergence_free_form(&g, 1.0, &mut rng);
        let u = band_limited(&g, 3, &mut rng);
        prop_assert!(lee_pairing(&alpha, &u).unwrap().mean().abs() <= 1e-10);
    }

    #[test]
    fn mean_is_linear(g in grid(), a in -10.0f64..10.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = band_limited(&g, 3, &mut rng).offset(0.3).unwrap();
        let v = band_limited(&g, 2, &mut rng).offset(-1.1).unwrap();
        let combo = u.scale(a).unwrap().add(&v).unwrap();
        prop_assert!((mean(&combo) - (a * mean(&u) + mean(&v))).abs() <= 1e-12 * (1.0 + a.abs()));
        prop_assert_eq!(mean(&ScalarField::constant(&g, 1.0).unwrap()), 1.0);
    }

    #[test]
    fn shifted_solve_inverts_apply(seed in any::<u64>(), mu in 0.05f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GridSpec::new(&[16, 12]).unwrap();
        let alpha = divergence_free_form(&g, 0.5, &mut rng);
        let f = band_limited(&g, 3, &mut rng).offset(0.2).unwrap();
        let cfg = LinearConfig::default();
        let (u, _) = solve_shifted(&alpha, mu, &f, &cfg).unwrap();
        let op = LinearOperatorSpec::new(alpha, mu).unwrap();
        let back = apply(&op, &u).unwrap();
        prop_assert!(back.sup_distance(&f).unwrap() <= 1e-7 * (1.0 + f.sup_norm()));
    }

    #[test]
    fn shifted_solve_keeps_sign(seed in any::<u64>(), mu in 0.05f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GridSpec::new(&[32]).unwrap();
        let alpha = divergence_free_form(&g, 0.5, &mut rng);
        let f = band_limited(&g, 3, &mut rng).map(|v| (v + 1.0).max(0.0)).unwrap();
        let (u, _) = solve_shifted(&alpha, mu, &f, &LinearConfig::default()).unwrap();
        prop_assert!(u.min() >= -1e-8);
    }
}
