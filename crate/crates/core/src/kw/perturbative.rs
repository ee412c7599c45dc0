//! Solvers for `Δ_d u + ⟨α, du⟩ = (2/k_t)(ŝ e^u - s)` near the trivial
//! solution, usable for any sign of `c`: a Picard iteration that is a
//! contraction when `ŝ` oscillates little, and a homotopy in the data.

use crate::error::{KwError, Result};
use crate::geometry::GeometrySetup;
use crate::grid::{ensure_same, OneForm, ScalarField};
use crate::linsolve::solve_potential;
use crate::operators::chern_laplacian;

use super::newton::newton_core;
use super::{KwConfig, Method, SolveReport, Status};

/// Consecutive step increases treated as divergence.
const GROWTH_LIMIT: usize = 10;
/// Nested halvings of the homotopy step before giving up.
const MAX_REFINEMENTS: usize = 12;

fn scale_factor(setup: &GeometrySetup) -> Result<f64> {
    if setup.is_degenerate() {
        return Err(KwError::DegenerateParameter { k_t: setup.k_t() });
    }
    Ok(2.0 / setup.k_t())
}

/// `Δ_d u + ⟨α, du⟩ + scale·(s - ŝ e^u)`.
fn curvature_residual(
    alpha: &OneForm,
    s: &ScalarField,
    s_hat: &ScalarField,
    scale: f64,
    u: &ScalarField,
) -> Result<ScalarField> {
    let lu = chern_laplacian(alpha, u)?;
    let values = (0..u.len())
        .map(|i| lu.values()[i] + scale * (s.values()[i] - s_hat.values()[i] * u.values()[i].exp()))
        .collect();
    Ok(ScalarField::from_values_unchecked(u.spec(), values))
}

fn residual_scale(s: &ScalarField, s_hat: &ScalarField, scale: f64, u: &ScalarField) -> f64 {
    1.0 + scale.abs() * (s.sup_norm() + s_hat.sup_norm() * u.max().exp())
}

fn check_inputs(
    s: &ScalarField,
    s_hat: &ScalarField,
    alpha: &OneForm,
    config: &KwConfig,
) -> Result<OneForm> {
    s.ensure_same_grid(s_hat)?;
    ensure_same(alpha.spec(), s.spec())?;
    alpha
        .clone()
        .validate_gauduchon(config.linear.gauduchon_tol)
}

/// Picard iteration `u ↦ L^{-1}((2/k_t)[ŝ - s - ŝ(1 + u - e^u)])` from `u = 0`,
/// with `L u = Δ_d u + ⟨α, du⟩ - (2/k_t) ŝ u`.
pub fn fixed_point_solve(
    s: &ScalarField,
    s_hat: &ScalarField,
    alpha: &OneForm,
    setup: &GeometrySetup,
    config: &KwConfig,
) -> Result<SolveReport> {
    let alpha = check_inputs(s, s_hat, alpha, config)?;
    let k = scale_factor(setup)?;
    let potential = s_hat.scale(-k)?;
    let spec = s.spec();
    let tolerance = config.tol.max(10.0 * config.linear.tol);

    let mut u = ScalarField::zeros(spec);
    let mut trace = vec![0.0];
    let mut steps: Vec<f64> = Vec::new();
    let mut growth = 0;
    let mut status = Status::MaxIter;
    let mut iterations = 0;
    let mut residual = curvature_residual(&alpha, s, s_hat, k, &u)?.sup_norm();

    while iterations < config.max_iter.min(200) {
        let rhs = (0..u.len())
            .map(|i| {
                let (si, hi, ui) = (s.values()[i], s_hat.values()[i], u.values()[i]);
                k * (hi - si - hi * (1.0 + ui - ui.exp()))
            })
            .collect();
        let rhs = ScalarField::from_values_unchecked(spec, rhs);
        let (next, _) = solve_potential(&alpha, &potential, &rhs, &config.linear)?;
        iterations += 1;
        let step = next.sup_distance(&u)?;
        if !step.is_finite() || !next.values().iter().all(|v| v.is_finite()) {
            return Err(KwError::Diverged {
                iteration: iterations,
                step,
            });
        }
        if steps.last().is_some_and(|&last| step > last) {
            growth += 1;
            if growth >= GROWTH_LIMIT {
                return Err(KwError::Diverged {
                    iteration: iterations,
                    step,
                });
            }
        } else {
            growth = 0;
        }
        u = next;
        trace.push(u.max());
        steps.push(step);
        residual = curvature_residual(&alpha, s, s_hat, k, &u)?.sup_norm();
        if step <= config.tol && residual <= tolerance * residual_scale(s, s_hat, k, &u) {
            status = Status::Converged;
            break;
        }
    }
    Ok(SolveReport {
        solution: Some(u),
        status,
        trace,
        steps,
        residual,
        method: Method::FixedPoint,
        iterations,
        monotone: None,
    })
}

/// Follows `Δ_d u + ⟨α, du⟩ + (2/k_t)(s - ŝ_τ e^u) = 0` with
/// `ŝ_τ = s + τ(ŝ - s)` from the exact solution `u = 0` at `τ = 0` through
/// `τ = j/steps`, Newton-correcting from the previous point. A failed
/// correction halves the increment in `τ` before giving up.
///
/// Scaling both curvatures by `τ` instead would force
/// `mean(ŝ e^u) = mean(s)` along the whole path, so that branch reaches
/// `u = 0` as `τ → 0` only when `mean(ŝ) = mean(s)`.
pub fn continuation_solve(
    s: &ScalarField,
    s_hat: &ScalarField,
    alpha: &OneForm,
    setup: &GeometrySetup,
    steps: usize,
    config: &KwConfig,
) -> Result<SolveReport> {
    let alpha = check_inputs(s, s_hat, alpha, config)?;
    let k = scale_factor(setup)?;
    if steps == 0 {
        return Err(KwError::Precondition(
            "continuation needs at least one step".into(),
        ));
    }
    let spec = s.spec();
    let mut u = ScalarField::zeros(spec);
    let mut tau = 0.0;
    let mut trace = vec![0.0];
    let mut residuals = Vec::new();
    let mut iterations = 0;
    let mut last_residual = 0.0;

    let correct = |target: f64, start: &ScalarField| -> Result<_> {
        let blend = s.zip_map(s_hat, |a, b| a + target * (b - a))?;
        newton_core(
            &alpha,
            |u| curvature_residual(&alpha, s, &blend, k, u),
            |u| blend.zip_map(u, |h, ui| -k * h * ui.exp()),
            |u| config.tol * residual_scale(s, &blend, k, u),
            start,
            config.newton_max_iter,
            &config.linear,
        )
    };

    for j in 1..=steps {
        let goal = j as f64 / steps as f64;
        let mut dtau = goal - tau;
        let mut refinements = 0;
        while tau < goal {
            let target = if goal - tau <= dtau { goal } else { tau + dtau };
            match correct(target, &u) {
                Ok(run) if run.converged => {
                    iterations += run.iterations;
                    u = run.solution;
                    tau = target;
                    last_residual = run.residual;
                    trace.push(u.max());
                    residuals.push(run.residual);
                }
                outcome => {
                    refinements += 1;
                    if refinements > MAX_REFINEMENTS {
                        let residual = match outcome {
                            Ok(run) => run.residual,
                            Err(KwError::LineSearchStall { residual, .. }) => residual,
                            Err(_) => f64::NAN,
                        };
                        return Err(KwError::ContinuationFailed {
                            tau: target,
                            residual,
                        });
                    }
                    dtau *= 0.5;
                }
            }
        }
    }
    Ok(SolveReport {
        solution: Some(u),
        status: Status::Converged,
        trace,
        steps: residuals,
        residual: last_residual,
        method: Method::Continuation,
        iterations,
        monotone: None,
    })
}
