//! Bracketing the critical constant `c_-(φ)`: the equation is solvable for
//! `c_-(φ) < c < 0` and not below it.

use crate::error::{KwError, Result};
use crate::grid::{OneForm, ScalarField};

use super::pipeline::solve_negative;
use super::{KWProblem, KwConfig, Status};

/// First probe `c = -START`; later probes double.
pub const START: f64 = 0.01;
/// Bisection stops once `c_hi - c_lo ≤ WIDTH · |c_hi|`.
pub const WIDTH: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evidence {
    Solved,
    NecessaryFailed,
    SolverFailed,
    SearchLimit,
}

impl Evidence {
    pub fn name(self) -> &'static str {
        match self {
            Evidence::Solved => "solved",
            Evidence::NecessaryFailed => "necessary-failed",
            Evidence::SolverFailed => "solver-failed",
            Evidence::SearchLimit => "search-limit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub c: f64,
    pub evidence: Evidence,
}

#[derive(Clone, Debug)]
pub struct Bracket {
    pub c_lo: f64,
    pub c_hi: f64,
    pub lo_evidence: Evidence,
    pub hi_evidence: Evidence,
    /// Every probe down to the search floor solved: `c_-(φ) = -∞` as far as
    /// the search can tell.
    pub unbounded: bool,
    pub probes: Vec<Probe>,
}

fn probe(phi: &ScalarField, alpha: &OneForm, c: f64, config: &KwConfig) -> Result<Evidence> {
    let prob = KWProblem {
        alpha: alpha.clone(),
        c,
        phi: phi.clone(),
    };
    Ok(match solve_negative(&prob, config) {
        Ok(report) => match report.status {
            Status::Converged => Evidence::Solved,
            Status::CertifiedUnsolvable => Evidence::NecessaryFailed,
            _ => Evidence::SolverFailed,
        },
        Err(KwError::LinearNotConverged { .. })
        | Err(KwError::LineSearchStall { .. })
        | Err(KwError::SingularOperator(_))
        | Err(KwError::CannotCertify(_)) => Evidence::SolverFailed,
        Err(e) => return Err(e),
    })
}

/// Geometric descent `c = -0.01·2^k` down to `search_floor`, then bisection
/// between the last solved and first failed probe. Only a failed necessary
/// check certifies unsolvability; a solver failure is recorded as such.
pub fn critical_c_bracket(
    phi: &ScalarField,
    alpha: &OneForm,
    search_floor: f64,
    config: &KwConfig,
) -> Result<Bracket> {
    let mean = phi.mean();
    if !(mean < 0.0) {
        return Err(KwError::NecessaryConditionViolated { mean });
    }
    if !(search_floor < -START) {
        return Err(KwError::Precondition(format!(
            "search floor must lie below {}, got {search_floor}",
            -START
        )));
    }
    let alpha = alpha
        .clone()
        .validate_gauduchon(config.linear.gauduchon_tol)?;
    let mut probes = Vec::new();
    let run = |c: f64, probes: &mut Vec<Probe>| -> Result<Evidence> {
        let evidence = probe(phi, &alpha, c, config)?;
        probes.push(Probe { c, evidence });
        Ok(evidence)
    };

    // Find a solvable starting point near zero.
    let mut c_hi = -START;
    let mut first = run(c_hi, &mut probes)?;
    let mut shrink = 0;
    while first != Evidence::Solved {
        shrink += 1;
        if shrink > 30 {
            return Err(KwError::CannotCertify(
                "no solvable probe near c = 0".into(),
            ));
        }
        c_hi *= 0.5;
        first = run(c_hi, &mut probes)?;
    }
    let top = c_hi;

    // Descend until a probe fails or the floor is passed.
    let mut failure = None;
    let mut c = c_hi;
    loop {
        let next = (2.0 * c).max(search_floor);
        let evidence = run(next, &mut probes)?;
        if evidence != Evidence::Solved {
            failure = Some((next, evidence));
            break;
        }
        c_hi = next;
        if next <= search_floor {
            break;
        }
        c = next;
    }

    let Some((mut c_lo, mut lo_evidence)) = failure else {
        return Ok(Bracket {
            c_lo: search_floor,
            c_hi: top,
            lo_evidence: Evidence::SearchLimit,
            hi_evidence: Evidence::Solved,
            unbounded: true,
            probes,
        });
    };

    while c_hi - c_lo > WIDTH * c_hi.abs() {
        let mid = 0.5 * (c_lo + c_hi);
        let evidence = run(mid, &mut probes)?;
        if evidence == Evidence::Solved {
            c_hi = mid;
        } else {
            c_lo = mid;
            lo_evidence = evidence;
        }
    }
    Ok(Bracket {
        c_lo,
        c_hi,
        lo_evidence,
        hi_evidence: Evidence::Solved,
        unbounded: false,
        probes,
    })
}
