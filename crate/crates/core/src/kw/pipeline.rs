//! End-to-end solve: from `(s, ŝ, α, n, t)` to the conformal factor `u`.

use crate::error::{KwError, Result};
use crate::geometry::{degenerate_solve, recover_metric, reduce, GeometrySetup, ReducedProblem};
use crate::grid::{OneForm, ScalarField};

use super::barriers::{build_subsolution, build_supersolution};
use super::criteria::necessary_check;
use super::monotone::{monotone_run, monotone_solve};
use super::newton::newton_solve;
use super::perturbative::{continuation_solve, fixed_point_solve};
use super::{KWProblem, KwConfig, Method, SolveReport, Status, ZERO_C_TOL};

/// Method used when `c ≥ 0`, where no general existence theory applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Newton,
    FixedPoint,
    Continuation { steps: usize },
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Newton => "newton",
            Strategy::FixedPoint => "fixed-point",
            Strategy::Continuation { .. } => "continuation",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrescribedSolution {
    /// Conformal factor, present whenever the chosen method produced an iterate.
    pub u: Option<ScalarField>,
    /// The report's `solution` is `w` for the monotone and Newton paths and
    /// `u` itself for the other methods.
    pub report: SolveReport,
    /// Absent in the degenerate case.
    pub reduced: Option<ReducedProblem>,
}

/// Monotone step size at which the pipeline switches to Newton.
const HANDOFF: f64 = 1e-3;

/// Keeps the monotone diagnostics and adds its iteration count.
fn merge(mut report: SolveReport, monotone: &SolveReport) -> SolveReport {
    report.iterations += monotone.iterations;
    if report.monotone.is_none() {
        report.monotone = monotone.monotone.clone();
    }
    report
}

/// `c < 0`: necessary check, then sub/super-solutions and monotone iteration.
///
/// The monotone contraction factor is about `1 - |c|/λ`, which is close to
/// one for small `|c|`, so once a step falls to `HANDOFF` the iterate (already
/// between `w_-` and `w_+`) is finished by Newton; the report keeps the
/// monotone diagnostics. If Newton fails from there the monotone iteration
/// resumes. When no super-solution can be certified, Newton starts from the
/// constant `log(c/φ̄)` and then from the sub-solution. A failed necessary
/// check is the only unsolvability verdict.
pub fn solve_negative(prob: &KWProblem, config: &KwConfig) -> Result<SolveReport> {
    let check = necessary_check(prob, &config.linear)?;
    if !check.passed() {
        return Ok(SolveReport::unsolvable(Method::Monotone));
    }
    let lower = build_subsolution(prob)?;
    match build_supersolution(prob, config) {
        Ok(upper) => {
            let floor = upper.min();
            let lower = lower.map(|v| v.min(floor))?;
            let (report, handed_off) = monotone_run(prob, &lower, &upper, config, Some(HANDOFF))?;
            if report.status != Status::MaxIter {
                return Ok(report);
            }
            let last = report
                .solution
                .as_ref()
                .expect("monotone report carries its iterate");
            let polished = newton_solve(prob, last, config);
            let polished = match polished {
                Ok(p) if p.is_converged() || !handed_off => p,
                Err(e) if !handed_off => return Err(e),
                _ => {
                    // Newton left the basin: finish monotonically instead.
                    let resumed = match monotone_solve(prob, last, &upper, config) {
                        Err(KwError::Precondition(_)) => {
                            monotone_solve(prob, &lower, &upper, config)?
                        }
                        other => other?,
                    };
                    if resumed.status != Status::MaxIter {
                        return Ok(merge(resumed, &report));
                    }
                    let last = resumed.solution.as_ref().expect("monotone iterate");
                    merge(newton_solve(prob, last, config)?, &resumed)
                }
            };
            Ok(merge(polished, &report))
        }
        Err(KwError::CannotCertify(_)) => {
            let level = (prob.c / prob.phi.mean()).ln();
            let start = ScalarField::constant(prob.phi.spec(), level)?;
            match newton_solve(prob, &start, config) {
                Ok(report) if report.is_converged() => Ok(report),
                first => match newton_solve(prob, &lower, config) {
                    Ok(report) if report.is_converged() => Ok(report),
                    second => first.or(second),
                },
            }
        }
        Err(e) => Err(e),
    }
}

fn newton_start(prob: &KWProblem) -> Result<ScalarField> {
    let phi_bar = prob.phi.mean();
    let level = if prob.c > 0.0 && phi_bar > 0.0 {
        (prob.c / phi_bar).ln()
    } else {
        0.0
    };
    ScalarField::constant(prob.phi.spec(), level)
}

/// Solves the equation for given `(α, c, φ)`: the monotone pipeline for
/// `c < 0`, Newton from `log(c/φ̄)` (or zero) otherwise.
pub fn solve_kw(prob: &KWProblem, config: &KwConfig) -> Result<SolveReport> {
    if prob.c < -ZERO_C_TOL {
        solve_negative(prob, config)
    } else {
        newton_solve(prob, &newton_start(prob)?, config)
    }
}

pub fn solve_prescribed(
    s: &ScalarField,
    s_hat: &ScalarField,
    alpha: &OneForm,
    setup: &GeometrySetup,
    strategy: Strategy,
    config: &KwConfig,
) -> Result<PrescribedSolution> {
    s.ensure_same_grid(s_hat)?;
    let alpha = alpha
        .clone()
        .validate_gauduchon(config.linear.gauduchon_tol)?;

    if setup.is_degenerate() {
        let u = degenerate_solve(s, s_hat)?;
        let residual = (0..u.len())
            .map(|i| (s_hat.values()[i] * u.values()[i].exp() - s.values()[i]).abs())
            .fold(0.0, f64::max);
        let report = SolveReport {
            solution: Some(u.clone()),
            status: Status::Converged,
            trace: vec![u.max()],
            steps: Vec::new(),
            residual,
            method: Method::Pointwise,
            iterations: 0,
            monotone: None,
        };
        return Ok(PrescribedSolution {
            u: Some(u),
            report,
            reduced: None,
        });
    }

    let reduced = reduce(s, s_hat, &alpha, setup, &config.linear)?;
    let prob = KWProblem {
        alpha: alpha.clone(),
        c: reduced.c,
        phi: reduced.phi.clone(),
    };

    let report = if prob.c < -ZERO_C_TOL {
        solve_negative(&prob, config)?
    } else if prob.c.abs() <= ZERO_C_TOL && s_hat.sup_norm() < 1e-12 {
        let w = ScalarField::zeros(s.spec());
        let residual = prob.residual(&w)?.sup_norm();
        SolveReport {
            solution: Some(w),
            status: Status::Converged,
            trace: vec![0.0],
            steps: Vec::new(),
            residual,
            method: Method::Linear,
            iterations: 0,
            monotone: None,
        }
    } else {
        match strategy {
            Strategy::Newton => newton_solve(&prob, &newton_start(&prob)?, config)?,
            Strategy::FixedPoint => fixed_point_solve(s, s_hat, &alpha, setup, config)?,
            Strategy::Continuation { steps } => {
                continuation_solve(s, s_hat, &alpha, setup, steps, config)?
            }
        }
    };

    let u = match (&report.solution, report.method) {
        (None, _) => None,
        (Some(u), Method::FixedPoint | Method::Continuation) => Some(u.clone()),
        (Some(w), _) => Some(recover_metric(w, &reduced)?),
    };
    Ok(PrescribedSolution {
        u,
        report,
        reduced: Some(reduced),
    })
}
