//! Matrix-free linear elliptic solves:
//!
//! * `Δ_d u + ⟨α, du⟩ = f` on mean-zero fields (singular, needs `mean f = 0`),
//! * `Δ_d u + ⟨α, du⟩ + μ u = f` with `μ > 0`,
//! * `Δ_d u + ⟨α, du⟩ + q u = f` with a variable potential `q` (Newton steps).
//!
//! All of them run restarted GMRES, since the drift term makes the operator
//! non-symmetric.

mod gmres;

use rand::Rng;

use crate::error::{KwError, Result};
use crate::grid::{ensure_same, GridSpec, OneForm, ScalarField};
use crate::operators::{add_drift_diffusion, add_neg_second_derivative, grad_sup_norm};
use crate::random::band_limited;
use crate::spectral::{SpectralInverse, ZeroMode};
use gmres::{gmres, GmresSettings};

/// Divergence sup-norm below which a Lee form counts as Gauduchon.
pub const DEFAULT_GAUDUCHON_TOL: f64 = 1e-8;

/// Krylov solver settings (`lin_tol`, `lin_maxiter`, `lin_restart`).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    /// Right-precondition with the exact inverse of `Δ_d + shift`.
    pub precondition: bool,
    pub gauduchon_tol: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            restart: 50,
            precondition: true,
            gauduchon_tol: DEFAULT_GAUDUCHON_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual_sup: f64,
    /// Root-mean-square residual (2-norm under the unit-volume measure).
    pub residual_rms: f64,
    pub converged: bool,
}

/// `u ↦ Δ_d u + ⟨α, du⟩ + μ u`.
#[derive(Clone, Debug)]
pub struct LinearOperatorSpec {
    pub alpha: OneForm,
    pub shift: f64,
}

impl LinearOperatorSpec {
    pub fn new(alpha: OneForm, shift: f64) -> Result<Self> {
        if !(shift >= 0.0) || !shift.is_finite() {
            return Err(KwError::Precondition(format!(
                "shift must be >= 0, got {shift}"
            )));
        }
        Ok(Self { alpha, shift })
    }

    pub fn is_singular(&self) -> bool {
        self.shift == 0.0
    }

    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        apply(self, u)
    }
}

#[derive(Clone, Copy)]
enum Potential<'a> {
    Constant(f64),
    Field(&'a [f64]),
}

/// Discrete `Δ_d + ⟨α, d·⟩ + potential`, applied into caller buffers.
struct Operator<'a> {
    spec: &'a GridSpec,
    alpha: Option<&'a OneForm>,
    potential: Potential<'a>,
}

impl Operator<'_> {
    fn apply_into(&self, src: &[f64], dst: &mut [f64]) {
        match self.potential {
            Potential::Constant(mu) => dst.iter_mut().zip(src).for_each(|(d, s)| *d = mu * s),
            Potential::Field(q) => dst
                .iter_mut()
                .zip(src.iter().zip(q))
                .for_each(|(d, (s, qi))| *d = qi * s),
        }
        for axis in 0..self.spec.rank() {
            match self.alpha {
                Some(alpha) => {
                    add_drift_diffusion(self.spec, axis, alpha.component(axis).values(), src, dst)
                }
                None => add_neg_second_derivative(self.spec, axis, 1.0, src, dst),
            }
        }
    }
}

fn drift(alpha: &OneForm) -> Option<&OneForm> {
    (!alpha.is_zero()).then_some(alpha)
}

pub fn apply(op: &LinearOperatorSpec, u: &ScalarField) -> Result<ScalarField> {
    ensure_same(op.alpha.spec(), u.spec())?;
    let operator = Operator {
        spec: u.spec(),
        alpha: drift(&op.alpha),
        potential: Potential::Constant(op.shift),
    };
    let mut out = vec![0.0; u.len()];
    operator.apply_into(u.values(), &mut out);
    ScalarField::from_values(u.spec(), out)
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_gauduchon(alpha: &OneForm, tol: f64) -> Result<()> {
    if alpha.is_gauduchon_validated() {
        return Ok(());
    }
    let divergence = crate::operators::divergence(alpha).sup_norm();
    if divergence > tol {
        return Err(KwError::NonGauduchon {
            divergence,
            tolerance: tol,
        });
    }
    Ok(())
}

fn preconditioner(
    spec: &GridSpec,
    shift: f64,
    zero: ZeroMode,
    config: &LinearConfig,
) -> Option<SpectralInverse> {
    config
        .precondition
        .then(|| SpectralInverse::new(spec, shift, zero))
}

fn run(
    operator: &Operator<'_>,
    inverse: Option<&SpectralInverse>,
    project: bool,
    f: &ScalarField,
    config: &LinearConfig,
    allow_partial: bool,
) -> Result<(ScalarField, SolveStats)> {
    let spec = f.spec();
    let b = f.values();
    let b_rms = rms(b);
    let b_sup = sup(b);
    let tol = config.tol;
    let accept = |r: &[f64]| rms(r) <= tol * b_rms && sup(r) <= tol * (1.0 + b_sup);
    let settings = GmresSettings {
        tol,
        max_iter: config.max_iter,
        restart: config.restart,
        project,
    };
    let apply = |src: &[f64], dst: &mut [f64]| operator.apply_into(src, dst);
    let precond_fn = inverse.map(|inv| move |src: &[f64], dst: &mut [f64]| inv.apply(src, dst));
    let precond: Option<&dyn Fn(&[f64], &mut [f64])> = precond_fn.as_ref().map(|p| p as _);
    let result = gmres(&apply, precond, b, &accept, &settings);
    let stats = SolveStats {
        iterations: result.iterations,
        residual_sup: sup(&result.residual),
        residual_rms: rms(&result.residual),
        converged: result.converged,
    };
    if !stats.converged && !allow_partial {
        return Err(KwError::LinearNotConverged {
            iterations: stats.iterations,
            residual: stats.residual_sup,
        });
    }
    Ok((ScalarField::from_values(spec, result.x)?, stats))
}

/// Mean-zero solution of `Δ_d g + ⟨α, dg⟩ = f`, requiring `mean f ≈ 0`
/// and a divergence-free `α`.
pub fn solve_meanzero(
    alpha: &OneForm,
    f: &ScalarField,
    config: &LinearConfig,
) -> Result<(ScalarField, SolveStats)> {
    ensure_same(alpha.spec(), f.spec())?;
    let mean = f.mean();
    if mean.abs() > 1e-10 * (1.0 + f.sup_norm()) {
        return Err(KwError::SolvabilityViolated { mean });
    }
    check_gauduchon(alpha, config.gauduchon_tol)?;
    let centered = f.offset(-mean)?;
    let operator = Operator {
        spec: f.spec(),
        alpha: drift(alpha),
        potential: Potential::Constant(0.0),
    };
    let inverse = preconditioner(f.spec(), 0.0, ZeroMode::Project, config);
    run(&operator, inverse.as_ref(), true, &centered, config, false)
}

/// Unique solution of `Δ_d u + ⟨α, du⟩ + μ u = f` for `μ > 0`.
pub fn solve_shifted(
    alpha: &OneForm,
    mu: f64,
    f: &ScalarField,
    config: &LinearConfig,
) -> Result<(ScalarField, SolveStats)> {
    ShiftedSolver::new(alpha, mu, config)?.solve(f)
}

/// [`solve_shifted`] for a fixed operator and many right-hand sides; the
/// preconditioner is built once.
pub struct ShiftedSolver<'a> {
    alpha: &'a OneForm,
    mu: f64,
    config: &'a LinearConfig,
    inverse: Option<SpectralInverse>,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(alpha: &'a OneForm, mu: f64, config: &'a LinearConfig) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(KwError::Precondition(format!(
                "shift must be positive, got {mu}"
            )));
        }
        Ok(Self {
            alpha,
            mu,
            config,
            inverse: preconditioner(alpha.spec(), mu, ZeroMode::Identity, config),
        })
    }

    pub fn solve(&self, f: &ScalarField) -> Result<(ScalarField, SolveStats)> {
        ensure_same(self.alpha.spec(), f.spec())?;
        let operator = Operator {
            spec: f.spec(),
            alpha: drift(self.alpha),
            potential: Potential::Constant(self.mu),
        };
        run(
            &operator,
            self.inverse.as_ref(),
            false,
            f,
            self.config,
            false,
        )
    }
}

/// Solution of `Δ_d u + ⟨α, du⟩ + q u = f` for a variable potential `q`.
/// Fails when the operator is numerically singular.
pub fn solve_potential(
    alpha: &OneForm,
    potential: &ScalarField,
    f: &ScalarField,
    config: &LinearConfig,
) -> Result<(ScalarField, SolveStats)> {
    potential_solve(alpha, potential, f, config, false)
}

/// Like [`solve_potential`], but returns the best iterate when the Krylov
/// loop stops short of the tolerance; `SolveStats::converged` tells which.
pub(crate) fn solve_potential_partial(
    alpha: &OneForm,
    potential: &ScalarField,
    f: &ScalarField,
    config: &LinearConfig,
) -> Result<(ScalarField, SolveStats)> {
    potential_solve(alpha, potential, f, config, true)
}

fn potential_solve(
    alpha: &OneForm,
    potential: &ScalarField,
    f: &ScalarField,
    config: &LinearConfig,
    allow_partial: bool,
) -> Result<(ScalarField, SolveStats)> {
    ensure_same(alpha.spec(), f.spec())?;
    ensure_same(potential.spec(), f.spec())?;
    if potential.sup_norm() < 1e-12 {
        return Err(KwError::SingularOperator(
            "vanishing potential leaves constants in the kernel".into(),
        ));
    }
    let q_mean = potential.mean();
    let shift = if q_mean.abs() > 1e-12 {
        q_mean.abs()
    } else {
        0.0
    };
    let inverse = preconditioner(f.spec(), shift, ZeroMode::Identity, config);
    let operator = Operator {
        spec: f.spec(),
        alpha: drift(alpha),
        potential: Potential::Field(potential.values()),
    };
    run(&operator, inverse.as_ref(), false, f, config, allow_partial)
}

/// Heuristic estimate of the a-priori constant in
/// `‖u‖_∞ + ‖∇u‖_∞ ≤ γ ‖L u‖_p` for `L = Δ_d + ⟨α, d·⟩ - c`, `c < 0`.
///
/// This is a lower bound for the true constant sampled over the given probes,
/// times a safety factor of 2. It is NOT a rigorous bound.
pub fn estimate_gamma_from_probes(
    alpha: &OneForm,
    c: f64,
    p: f64,
    probes: &[ScalarField],
    config: &LinearConfig,
) -> Result<f64> {
    if !(c < 0.0) {
        return Err(KwError::Precondition(format!(
            "gamma estimate needs c < 0, got {c}"
        )));
    }
    let mut best: f64 = 0.0;
    for f in probes {
        let denom = f.lp_norm(p);
        if denom == 0.0 {
            continue;
        }
        let (u, _) = solve_shifted(alpha, -c, f, config)?;
        let ratio = (u.sup_norm() + grad_sup_norm(&u)) / denom;
        best = best.max(ratio);
    }
    Ok(2.0 * best)
}

/// Probes with the constant field `1` plus `samples - 1` random band-limited
/// fields drawn from `rng`.
pub fn gamma_probes(spec: &GridSpec, samples: usize, rng: &mut impl Rng) -> Vec<ScalarField> {
    let mut probes = Vec::with_capacity(samples);
    if samples > 0 {
        probes.push(ScalarField::constant(spec, 1.0).expect("finite"));
    }
    for _ in 1..samples {
        probes.push(band_limited(spec, 3, rng));
    }
    probes
}

pub fn estimate_gamma(
    alpha: &OneForm,
    c: f64,
    p: f64,
    samples: usize,
    seed: u64,
    config: &LinearConfig,
) -> Result<f64> {
    use rand::SeedableRng;
    if samples == 0 {
        return Err(KwError::Precondition("need at least one sample".into()));
    }
    if !(p > alpha.spec().rank() as f64) {
        return Err(KwError::Precondition(format!(
            "p must exceed the grid rank {}, got {p}",
            alpha.spec().rank()
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let probes = gamma_probes(alpha.spec(), samples, &mut rng);
    estimate_gamma_from_probes(alpha, c, p, &probes, config)
}
