//! Monotone iteration between an ordered sub/super-solution pair.

use crate::error::{KwError, Result};
use crate::grid::ScalarField;
use crate::linsolve::ShiftedSolver;

use super::barriers::{is_subsolution, is_supersolution};
use super::{KWProblem, KwConfig, Method, MonotoneDiagnostics, SolveReport, Status};

/// Iterates `K w_{i+1} = φ e^{w_i} - c + λ w_i` with
/// `K = Δ_d + ⟨α, d·⟩ + λ` from `w_0 = w_minus`.
///
/// Each step solves for the increment, `K (w_{i+1} - w_i) = -F(w_i)`, which
/// is the same iteration but keeps the right-hand side small near the fixed
/// point. `λ = 1 + e^S ‖φ⁻‖_∞` with `S = sup w_plus`, unless overridden.
pub fn monotone_solve(
    prob: &KWProblem,
    w_minus: &ScalarField,
    w_plus: &ScalarField,
    config: &KwConfig,
) -> Result<SolveReport> {
    monotone_run(prob, w_minus, w_plus, config, None).map(|(report, _)| report)
}

/// As [`monotone_solve`], but stops early (status `MaxIter`, flag `true`)
/// once a step falls to `handoff`.
pub(crate) fn monotone_run(
    prob: &KWProblem,
    w_minus: &ScalarField,
    w_plus: &ScalarField,
    config: &KwConfig,
    handoff: Option<f64>,
) -> Result<(SolveReport, bool)> {
    w_minus.ensure_same_grid(w_plus)?;
    w_minus.ensure_same_grid(&prob.phi)?;
    let gap = w_minus.sub(w_plus)?.max();
    if gap > 0.0 {
        return Err(KwError::Precondition(format!(
            "sub-solution exceeds super-solution by {gap:e}"
        )));
    }
    let (ok, margin) = is_subsolution(w_minus, prob)?;
    if !ok {
        return Err(KwError::Precondition(format!(
            "w_minus is not a sub-solution (margin {margin:e})"
        )));
    }
    let (ok, margin) = is_supersolution(w_plus, prob)?;
    if !ok {
        return Err(KwError::Precondition(format!(
            "w_plus is not a super-solution (margin {margin:e})"
        )));
    }

    let lambda = match config.lambda_override {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => {
            return Err(KwError::Precondition(format!(
                "lambda must be positive, got {l}"
            )))
        }
        None => 1.0 + w_plus.max().exp() * prob.phi_minus_sup(),
    };

    let solver = ShiftedSolver::new(&prob.alpha, lambda, &config.linear)?;
    let mut w = w_minus.clone();
    let mut trace = vec![w.max()];
    let mut steps = Vec::new();
    let mut diagnostics = MonotoneDiagnostics {
        lambda,
        min_increment: f64::INFINITY,
        max_excess: gap,
    };
    let mut residual = prob.residual(&w)?;
    let mut status = Status::MaxIter;
    let mut iterations = 0;
    let mut handed_off = false;

    while iterations < config.max_iter {
        let scale = prob.residual_scale(&w);
        let res_sup = residual.sup_norm();
        if res_sup == 0.0 {
            status = Status::Converged;
            break;
        }
        let rhs = residual.scale(-1.0)?;
        let (delta, _) = solver.solve(&rhs)?;
        w = w.add(&delta)?;
        iterations += 1;

        let step = delta.sup_norm();
        diagnostics.min_increment = diagnostics.min_increment.min(delta.min());
        diagnostics.max_excess = diagnostics.max_excess.max(w.sub(w_plus)?.max());
        trace.push(w.max());
        steps.push(step);
        residual = prob.residual(&w)?;

        let verified = residual.sup_norm() <= 10.0 * config.linear.tol * scale;
        if step <= config.tol && verified {
            status = Status::Converged;
            break;
        }
        if handoff.is_some_and(|h| step <= h) {
            handed_off = true;
            break;
        }
    }
    if diagnostics.min_increment == f64::INFINITY {
        diagnostics.min_increment = 0.0;
    }
    let report = SolveReport {
        residual: residual.sup_norm(),
        solution: Some(w),
        status,
        trace,
        steps,
        method: Method::Monotone,
        iterations,
        monotone: Some(diagnostics),
    };
    Ok((report, handed_off))
}
