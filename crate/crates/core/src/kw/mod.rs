//! Existence machinery for `Δ_d w + ⟨α, dw⟩ + c = φ e^w`.

mod asymptotic;
mod barriers;
mod criteria;
mod critical;
mod monotone;
mod newton;
mod perturbative;
mod pipeline;

pub use asymptotic::asymptotic_suite;
pub use barriers::{build_subsolution, build_supersolution, is_subsolution, is_supersolution};
pub use criteria::{
    construct_unsolvable, necessary_check, sufficient_check, NecessaryCheck, SufficientCheck,
};
pub use critical::{critical_c_bracket, Bracket, Evidence, Probe};
pub use monotone::monotone_solve;
pub use newton::newton_solve;
pub use perturbative::{continuation_solve, fixed_point_solve};
pub use pipeline::{solve_kw, solve_negative, solve_prescribed, PrescribedSolution, Strategy};

use crate::error::{KwError, Result};
use crate::grid::{ensure_same, OneForm, ScalarField};
use crate::linsolve::LinearConfig;
use crate::operators::chern_laplacian;

/// `|c|` below this counts as zero.
pub const ZERO_C_TOL: f64 = 1e-12;

/// Nonlinear solver settings (`kw_tol`, `kw_maxiter`, `kw_lambda_override`).
#[derive(Clone, Debug, PartialEq)]
pub struct KwConfig {
    /// Sup-norm step tolerance of the monotone and fixed-point iterations,
    /// and residual tolerance of Newton.
    pub tol: f64,
    pub max_iter: usize,
    pub newton_max_iter: usize,
    pub lambda_override: Option<f64>,
    pub linear: LinearConfig,
}

impl Default for KwConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 500,
            newton_max_iter: 50,
            lambda_override: None,
            linear: LinearConfig::default(),
        }
    }
}

/// `Δ_d w + ⟨α, dw⟩ + c = φ e^w` on a shared grid.
#[derive(Clone, Debug)]
pub struct KWProblem {
    pub alpha: OneForm,
    pub c: f64,
    pub phi: ScalarField,
}

impl KWProblem {
    /// Checks grids, finiteness of `c` and the Gauduchon condition on `alpha`.
    pub fn new(alpha: OneForm, c: f64, phi: ScalarField, gauduchon_tol: f64) -> Result<Self> {
        ensure_same(alpha.spec(), phi.spec())?;
        if !c.is_finite() {
            return Err(KwError::Precondition(format!("c must be finite, got {c}")));
        }
        let alpha = alpha.validate_gauduchon(gauduchon_tol)?;
        Ok(Self { alpha, c, phi })
    }

    /// `F(w) = Δ_d w + ⟨α, dw⟩ + c - φ e^w`.
    pub fn residual(&self, w: &ScalarField) -> Result<ScalarField> {
        let lw = chern_laplacian(&self.alpha, w)?;
        let values = lw
            .values()
            .iter()
            .zip(self.phi.values())
            .zip(w.values())
            .map(|((l, p), wi)| l + self.c - p * wi.exp())
            .collect();
        Ok(ScalarField::from_values_unchecked(w.spec(), values))
    }

    /// Scale of the terms in the residual at `w`: `1 + |c| + sup|φ| e^{sup w}`.
    pub fn residual_scale(&self, w: &ScalarField) -> f64 {
        1.0 + self.c.abs() + self.phi.sup_norm() * w.max().exp()
    }

    /// `sup|φ⁻|` with `φ⁻ = max(-φ, 0)`.
    pub fn phi_minus_sup(&self) -> f64 {
        self.phi.values().iter().fold(0.0, |m, &p| m.max(-p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
    CertifiedUnsolvable,
    NotCertified,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max-iter",
            Status::CertifiedUnsolvable => "certified-unsolvable",
            Status::NotCertified => "not-certified",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Monotone,
    Newton,
    FixedPoint,
    Continuation,
    /// Pointwise logarithm in the degenerate case.
    Pointwise,
    /// Linear solve when `c = 0` and `φ ≡ 0`.
    Linear,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Monotone => "monotone",
            Method::Newton => "newton",
            Method::FixedPoint => "fixed-point",
            Method::Continuation => "continuation",
            Method::Pointwise => "pointwise",
            Method::Linear => "linear",
        }
    }
}

/// Per-run record of the monotone ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneDiagnostics {
    pub lambda: f64,
    /// Smallest pointwise increment `w_{i+1} - w_i` over all steps.
    pub min_increment: f64,
    /// Largest pointwise `w_i - w_+` over all iterates.
    pub max_excess: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Absent only when the problem was certified unsolvable.
    pub solution: Option<ScalarField>,
    pub status: Status,
    /// Maximum value of each iterate, starting with the initial guess.
    pub trace: Vec<f64>,
    /// Sup-norm step (or residual, for Newton) per iteration.
    pub steps: Vec<f64>,
    pub residual: f64,
    pub method: Method,
    pub iterations: usize,
    pub monotone: Option<MonotoneDiagnostics>,
}

impl SolveReport {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub(crate) fn unsolvable(method: Method) -> Self {
        Self {
            solution: None,
            status: Status::CertifiedUnsolvable,
            trace: Vec::new(),
            steps: Vec::new(),
            residual: f64::NAN,
            method,
            iterations: 0,
            monotone: None,
        }
    }
}
