//! Necessary and sufficient solvability tests for `c < 0`, and explicit
//! instances where the necessary mean condition holds but no solution exists.

use crate::error::{KwError, Result};
use crate::grid::{ensure_same, OneForm, ScalarField};
use crate::linsolve::{solve_shifted, LinearConfig};
use crate::operators::chern_laplacian;

use super::KWProblem;

#[derive(Clone, Debug)]
pub struct NecessaryCheck {
    /// Solution of `Δ_d φ₀ + ⟨α, dφ₀⟩ - c φ₀ = -φ`.
    pub phi0: ScalarField,
    pub positive: bool,
    pub mean_negative: bool,
}

impl NecessaryCheck {
    pub fn passed(&self) -> bool {
        self.positive && self.mean_negative
    }
}

/// A solution can exist only if `φ₀ > 0` and `mean(φ) < 0`.
pub fn necessary_check(prob: &KWProblem, config: &LinearConfig) -> Result<NecessaryCheck> {
    if !(prob.c < 0.0) {
        return Err(KwError::Precondition(format!(
            "needs c < 0, got {}",
            prob.c
        )));
    }
    let (phi0, _) = solve_shifted(&prob.alpha, -prob.c, &prob.phi.scale(-1.0)?, config)?;
    Ok(NecessaryCheck {
        positive: phi0.min() > 0.0,
        mean_negative: prob.phi.mean() < 0.0,
        phi0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SufficientCheck {
    pub certified: bool,
    /// Constant with the largest margin, or `0` when none qualifies.
    pub alpha_star: f64,
    /// `-α/(γ(1-2c)) - ‖φ - α‖_p` at `alpha_star` (0 when not certified).
    pub margin: f64,
}

/// Searches constants `α = -2^{k/4}`, `|k| ≤ 120`, for
/// `‖φ - α‖_p < -α / (γ̂ (1 - 2c))`.
pub fn sufficient_check(prob: &KWProblem, gamma_hat: f64, p: f64) -> Result<SufficientCheck> {
    if !(prob.c < 0.0) {
        return Err(KwError::Precondition(format!(
            "needs c < 0, got {}",
            prob.c
        )));
    }
    if !(gamma_hat > 0.0) || !gamma_hat.is_finite() {
        return Err(KwError::Precondition(format!(
            "gamma must be positive, got {gamma_hat}"
        )));
    }
    let denom = gamma_hat * (1.0 - 2.0 * prob.c);
    let mut best = SufficientCheck {
        certified: false,
        alpha_star: 0.0,
        margin: 0.0,
    };
    for k in -120..=120 {
        let alpha = -(2f64.powf(k as f64 / 4.0));
        let distance = prob.phi.offset(-alpha)?.lp_norm(p);
        let margin = -alpha / denom - distance;
        if margin > 0.0 && (!best.certified || margin > best.margin) {
            best = SufficientCheck {
                certified: true,
                alpha_star: alpha,
                margin,
            };
        }
    }
    Ok(best)
}

/// `φ = -Δ_d ψ - ⟨α, dψ⟩ + c (ψ + alpha_const)`, for which `φ₀ = ψ + alpha_const`
/// changes sign while `mean(φ) = c · alpha_const < 0`.
pub fn construct_unsolvable(
    psi: &ScalarField,
    alpha_const: f64,
    c: f64,
    lee: &OneForm,
) -> Result<ScalarField> {
    ensure_same(psi.spec(), lee.spec())?;
    if !(c < 0.0) {
        return Err(KwError::Precondition(format!("needs c < 0, got {c}")));
    }
    let sup = psi.sup_norm();
    if sup == 0.0 {
        return Err(KwError::Precondition(
            "psi must not vanish identically".into(),
        ));
    }
    let mean = psi.mean();
    if mean.abs() > 1e-10 * (1.0 + sup) {
        return Err(KwError::Precondition(format!(
            "psi must have mean zero, got {mean:e}"
        )));
    }
    let shifted = psi.offset(alpha_const)?;
    if !(shifted.min() < 0.0 && shifted.max() > 0.0) {
        return Err(KwError::Precondition(format!(
            "psi + {alpha_const} does not change sign"
        )));
    }
    let l = chern_laplacian(lee, psi)?;
    l.zip_map(&shifted, |li, si| -li + c * si)
}
