//! Conformal transformation laws for the Gauduchon scalar curvatures and the
//! reduction of the prescribed-curvature equation to Kazdan–Warner form.
//!
//! For a conformal metric `e^u h`, with `k_t = n t - t + 1`,
//!
//! ```text
//! e^u ŝ(t) = s(t) + (k_t / 2) (Δ_d u + ⟨α, du⟩)
//! ```
//!
//! Writing `u = w + g` with `g` the mean-zero solution of
//! `Δ_d g + ⟨α, dg⟩ = (2/k_t)(mean(s) - s)` turns this into
//! `Δ_d w + ⟨α, dw⟩ + c = φ e^w` with `c = (2/k_t) mean(s)` and
//! `φ = (2/k_t) e^g ŝ`.

use crate::error::{KwError, Result};
use crate::grid::{ensure_same, OneForm, ScalarField};
use crate::linsolve::{solve_meanzero, LinearConfig};
use crate::operators::{chern_laplacian, grad_sq, laplacian, lee_pairing};

/// `|k_t|` below this is treated as the degenerate parameter.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Smallest admissible `|ŝ|` in the degenerate case.
pub const VANISHING_TOL: f64 = 1e-10;

/// `n t - t + 1`.
pub fn coefficient(n: u32, t: f64) -> f64 {
    n as f64 * t - t + 1.0
}

/// Complex dimension `n` and connection parameter `t`
/// (`t = 1` Chern, `t = 0` Lichnerowicz, `t = -1` Bismut).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometrySetup {
    n: u32,
    t: f64,
    k_t: f64,
}

impl GeometrySetup {
    pub fn new(n: u32, t: f64) -> Result<Self> {
        if n < 1 {
            return Err(KwError::Precondition(
                "complex dimension must be >= 1".into(),
            ));
        }
        if !t.is_finite() {
            return Err(KwError::Precondition(format!("t must be finite, got {t}")));
        }
        Ok(Self {
            n,
            t,
            k_t: coefficient(n, t),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k_t(&self) -> f64 {
        self.k_t
    }

    pub fn is_degenerate(&self) -> bool {
        self.k_t.abs() < DEGENERATE_TOL
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            return Err(KwError::DegenerateParameter { k_t: self.k_t });
        }
        Ok(())
    }
}

/// The Kazdan–Warner data `(c, g, φ)` obtained from `(s, ŝ)`.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    pub c: f64,
    pub g: ScalarField,
    pub phi: ScalarField,
    pub setup: GeometrySetup,
}

/// Curvature `ŝ` of `e^u h`: `e^{-u} (s + (k_t/2) Δ^{Ch} u)`.
pub fn transform_s(
    s: &ScalarField,
    u: &ScalarField,
    alpha: &OneForm,
    setup: &GeometrySetup,
) -> Result<ScalarField> {
    s.ensure_same_grid(u)?;
    let chern = chern_laplacian(alpha, u)?;
    let half_k = 0.5 * setup.k_t;
    let values = s
        .values()
        .iter()
        .zip(u.values())
        .zip(chern.values())
        .map(|((si, ui), li)| (-ui).exp() * (si + half_k * li))
        .collect();
    ScalarField::from_values(s.spec(), values)
}

/// Second scalar curvature of `e^{2f} h`.
pub fn transform_s2(
    s2: &ScalarField,
    f: &ScalarField,
    alpha: &OneForm,
    setup: &GeometrySetup,
) -> Result<ScalarField> {
    s2.ensure_same_grid(f)?;
    let n = setup.n as f64;
    let t = setup.t;
    let lap_coef = n * (1.0 - t) + t;
    let grad_coef = (1.0 - t).powi(2) * (1.0 - n * n) / 2.0;
    let lee_coef = lap_coef - (n + 1.0) * (1.0 - t).powi(2) / 2.0;
    let lap = laplacian(f);
    let grad = grad_sq(f);
    let lee = lee_pairing(alpha, f)?;
    let values = (0..f.len())
        .map(|i| {
            let bracket = s2.values()[i]
                + lap_coef * lap.values()[i]
                + grad_coef * grad.values()[i]
                + lee_coef * lee.values()[i];
            (-2.0 * f.values()[i]).exp() * bracket
        })
        .collect();
    ScalarField::from_values(f.spec(), values)
}

/// Integral of `s` against the unit-volume measure.
pub fn gauduchon_degree(s: &ScalarField) -> f64 {
    s.mean()
}

pub fn reduce(
    s: &ScalarField,
    s_hat: &ScalarField,
    alpha: &OneForm,
    setup: &GeometrySetup,
    config: &LinearConfig,
) -> Result<ReducedProblem> {
    setup.require_nondegenerate()?;
    s.ensure_same_grid(s_hat)?;
    ensure_same(alpha.spec(), s.spec())?;
    let scale = 2.0 / setup.k_t;
    let degree = gauduchon_degree(s);
    let c = scale * degree;
    let rhs = s.map(|v| scale * (degree - v))?;
    let g = if rhs.sup_norm() == 0.0 {
        let divergence = crate::operators::divergence(alpha).sup_norm();
        if !alpha.is_gauduchon_validated() && divergence > config.gauduchon_tol {
            return Err(KwError::NonGauduchon {
                divergence,
                tolerance: config.gauduchon_tol,
            });
        }
        ScalarField::zeros(s.spec())
    } else {
        solve_meanzero(alpha, &rhs, config)?.0
    };
    let phi = g.zip_map(s_hat, |gi, si| scale * gi.exp() * si)?;
    Ok(ReducedProblem {
        c,
        g,
        phi,
        setup: *setup,
    })
}

/// Log-conformal factor `u = w + g`.
pub fn recover_metric(w: &ScalarField, problem: &ReducedProblem) -> Result<ScalarField> {
    w.add(&problem.g)
}

/// Pointwise solution `u = log(s/ŝ)` for the degenerate parameter `k_t = 0`.
pub fn degenerate_solve(s: &ScalarField, s_hat: &ScalarField) -> Result<ScalarField> {
    s.ensure_same_grid(s_hat)?;
    let mut values = Vec::with_capacity(s.len());
    for (index, (&si, &hi)) in s.values().iter().zip(s_hat.values()).enumerate() {
        if hi.abs() < VANISHING_TOL {
            return Err(KwError::VanishingCurvature { index });
        }
        let ratio = si / hi;
        if !(ratio > 0.0) {
            return Err(KwError::NonPositiveRatio { index, ratio });
        }
        values.push(ratio.ln());
    }
    ScalarField::from_values(s.spec(), values)
}
