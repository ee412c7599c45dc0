//! Random smooth test data: band-limited fields and divergence-free Lee forms.

use rand::Rng;

use crate::grid::{GridSpec, OneForm, ScalarField};

fn random_wavevector(
    rank: usize,
    kmax: i64,
    frozen_axis: Option<usize>,
    rng: &mut impl Rng,
) -> Option<Vec<i64>> {
    for _ in 0..64 {
        let k: Vec<i64> = (0..rank)
            .map(|a| {
                if Some(a) == frozen_axis {
                    0
                } else {
                    rng.gen_range(-kmax..=kmax)
                }
            })
            .collect();
        if k.iter().any(|&v| v != 0) {
            return Some(k);
        }
    }
    None
}

fn sum_of_modes(spec: &GridSpec, modes: &[(Vec<i64>, f64, f64)]) -> ScalarField {
    ScalarField::from_fn(spec, |x| {
        modes
            .iter()
            .map(|(k, amp, phase)| {
                let arg: f64 = k.iter().zip(x).map(|(&ki, xi)| ki as f64 * xi).sum();
                amp * (arg + phase).cos()
            })
            .sum()
    })
    .expect("finite trigonometric sum")
}

/// Mean-zero trigonometric polynomial with wavenumbers `|k_i| ≤ kmax`,
/// normalized to sup-norm one.
pub fn band_limited(spec: &GridSpec, kmax: usize, rng: &mut impl Rng) -> ScalarField {
    let kmax = kmax.max(1) as i64;
    let terms = 6;
    let modes: Vec<_> = (0..terms)
        .filter_map(|_| {
            let k = random_wavevector(spec.rank(), kmax, None, rng)?;
            let norm = k.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
            Some((
                k,
                rng.gen_range(-1.0..1.0) / norm,
                rng.gen_range(0.0..std::f64::consts::TAU),
            ))
        })
        .collect();
    let f = sum_of_modes(spec, &modes);
    let s = f.sup_norm();
    if s > 0.0 {
        f.scale(1.0 / s).expect("finite")
    } else {
        f
    }
}

/// Lee form whose `i`-th component does not depend on `x_i`, so its discrete
/// divergence vanishes to rounding. Components have sup-norm at most
/// `amplitude` (rank one forms are constant).
pub fn divergence_free_form(spec: &GridSpec, amplitude: f64, rng: &mut impl Rng) -> OneForm {
    let rank = spec.rank();
    let components = (0..rank)
        .map(|axis| {
            let constant = rng.gen_range(-0.5..0.5);
            if rank == 1 {
                return ScalarField::constant(spec, amplitude * constant).expect("finite");
            }
            let modes: Vec<_> = (0..3)
                .filter_map(|_| {
                    let k = random_wavevector(rank, 2, Some(axis), rng)?;
                    Some((
                        k,
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    ))
                })
                .collect();
            let f = sum_of_modes(spec, &modes);
            let s = f.sup_norm().max(1e-300);
            f.map(|v| amplitude * (0.5 * v / s + constant))
                .expect("finite")
        })
        .collect();
    OneForm::new(components).expect("components share the grid")
}
