//! Damped Newton–Krylov iteration.

use crate::error::{KwError, Result};
use crate::grid::{OneForm, ScalarField};
use crate::linsolve::{solve_potential_partial, LinearConfig};

use super::{KWProblem, KwConfig, Method, SolveReport, Status};

const MAX_HALVINGS: usize = 40;

pub(crate) struct NewtonRun {
    pub solution: ScalarField,
    pub converged: bool,
    pub trace: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton for `G(u) = 0` where `G'(u) = Δ_d + ⟨α, d·⟩ + q(u)`. Stops once
/// `sup|G| ≤ threshold(u)`; each step is halved until the 2-norm of `G`
/// decreases.
pub(crate) fn newton_core(
    alpha: &OneForm,
    residual: impl Fn(&ScalarField) -> Result<ScalarField>,
    potential: impl Fn(&ScalarField) -> Result<ScalarField>,
    threshold: impl Fn(&ScalarField) -> f64,
    u0: &ScalarField,
    max_iter: usize,
    linear: &LinearConfig,
) -> Result<NewtonRun> {
    let mut u = u0.clone();
    let mut g = residual(&u)?;
    let mut trace = vec![u.max()];
    let mut residuals = vec![g.sup_norm()];
    let mut iterations = 0;
    loop {
        let g_sup = g.sup_norm();
        if g_sup <= threshold(&u) {
            return Ok(NewtonRun {
                solution: u,
                converged: true,
                trace,
                residuals,
                residual: g_sup,
                iterations,
            });
        }
        if iterations >= max_iter || !g_sup.is_finite() {
            return Ok(NewtonRun {
                solution: u,
                converged: false,
                trace,
                residuals,
                residual: g_sup,
                iterations,
            });
        }
        let q = potential(&u)?;
        // Inexact Newton: a direction that reduces the linear residual by half
        // is still a descent direction for the 2-norm of G.
        let (delta, stats) = solve_potential_partial(alpha, &q, &g.scale(-1.0)?, linear)?;
        let g_norm = g.lp_norm(2.0);
        if !stats.converged && !(stats.residual_rms <= 0.5 * g_norm) {
            return Err(KwError::LinearNotConverged {
                iterations: stats.iterations,
                residual: stats.residual_sup,
            });
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = u.zip_map(&delta, |a, d| a + t * d)?;
            let g_trial = residual(&trial)?;
            let norm = g_trial.lp_norm(2.0);
            if norm.is_finite() && norm < g_norm {
                accepted = Some((trial, g_trial));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, g_trial)) => {
                u = trial;
                g = g_trial;
            }
            None => {
                return Err(KwError::LineSearchStall {
                    iteration: iterations,
                    residual: g_sup,
                })
            }
        }
        trace.push(u.max());
        residuals.push(g.sup_norm());
    }
}

/// Damped Newton on `F(w) = Δ_d w + ⟨α, dw⟩ + c - φ e^w` from `w0`.
pub fn newton_solve(prob: &KWProblem, w0: &ScalarField, config: &KwConfig) -> Result<SolveReport> {
    w0.ensure_same_grid(&prob.phi)?;
    let run = newton_core(
        &prob.alpha,
        |w| prob.residual(w),
        |w| prob.phi.zip_map(w, |p, wi| -p * wi.exp()),
        |w| config.tol * prob.residual_scale(w),
        w0,
        config.newton_max_iter,
        &config.linear,
    )?;
    Ok(SolveReport {
        solution: Some(run.solution),
        status: if run.converged {
            Status::Converged
        } else {
            Status::MaxIter
        },
        trace: run.trace,
        steps: run.residuals,
        residual: run.residual,
        method: Method::Newton,
        iterations: run.iterations,
        monotone: None,
    })
}
