//! `c u(·; c) → f` uniformly as `c → -∞`, where `Δ_d u + ⟨α, du⟩ - c u + f = 0`.

use crate::error::{KwError, Result};
use crate::grid::{ensure_same, OneForm, ScalarField};
use crate::linsolve::{solve_shifted, LinearConfig};

/// `(c, sup|c u - f|)` for each `c` in `c_list`.
pub fn asymptotic_suite(
    f: &ScalarField,
    alpha: &OneForm,
    c_list: &[f64],
    config: &LinearConfig,
) -> Result<Vec<(f64, f64)>> {
    ensure_same(alpha.spec(), f.spec())?;
    if let Some(&c) = c_list.iter().find(|&&c| !(c < 0.0)) {
        return Err(KwError::Precondition(format!(
            "every c must be negative, got {c}"
        )));
    }
    let rhs = f.scale(-1.0)?;
    c_list
        .iter()
        .map(|&c| {
            let (u, _) = solve_shifted(alpha, -c, &rhs, config)?;
            let deviation = u.zip_map(f, |ui, fi| c * ui - fi)?.sup_norm();
            Ok((c, deviation))
        })
        .collect()
}
