//! Sub- and super-solutions.

use crate::error::{KwError, Result};
use crate::grid::ScalarField;
use crate::linsolve::solve_meanzero;
use crate::operators::chern_laplacian;

use super::{KWProblem, KwConfig};

/// Relative slack in the sign tests, measured against `residual_scale`.
const SIGN_TOL: f64 = 1e-12;

/// `Δ_d w + ⟨α, dw⟩ + c - φ e^w ≤ 0` everywhere; returns the flag and the
/// maximum of the left-hand side.
pub fn is_subsolution(w: &ScalarField, prob: &KWProblem) -> Result<(bool, f64)> {
    let r = prob.residual(w)?;
    let margin = r.max();
    Ok((margin <= SIGN_TOL * prob.residual_scale(w), margin))
}

/// `Δ_d w + ⟨α, dw⟩ + c - φ e^w ≥ 0` everywhere; returns the flag and the
/// minimum of the left-hand side.
pub fn is_supersolution(w: &ScalarField, prob: &KWProblem) -> Result<(bool, f64)> {
    let r = prob.residual(w)?;
    let margin = r.min();
    Ok((margin >= -SIGN_TOL * prob.residual_scale(w), margin))
}

fn require_negative_c(prob: &KWProblem) -> Result<()> {
    if !(prob.c < 0.0) {
        return Err(KwError::Precondition(format!(
            "needs c < 0, got {}",
            prob.c
        )));
    }
    Ok(())
}

/// Constant sub-solution `min(0, log(-c/‖φ⁻‖) - 0.1)`, or `0` when `φ ≥ 0`.
pub fn build_subsolution(prob: &KWProblem) -> Result<ScalarField> {
    require_negative_c(prob)?;
    let spec = prob.phi.spec();
    let neg = prob.phi_minus_sup();
    let level = if neg > 0.0 {
        ((-prob.c / neg).ln() - 0.1).min(0.0)
    } else {
        0.0
    };
    let w = ScalarField::constant(spec, level)?;
    let (ok, margin) = is_subsolution(&w, prob)?;
    if !ok {
        return Err(KwError::Precondition(format!(
            "constant {level} fails the sub-solution test (margin {margin:e})"
        )));
    }
    Ok(w)
}

/// `w = a v + b` with `Lv` precomputed; `None` when no `b` works for this `a`.
///
/// Writing `E = e^b`, the defining inequality `a Lv + c - φ e^{a v} E ≥ 0`
/// bounds `E` below where `φ < 0` and above where `φ > 0`.
fn candidate_for_slope(a: f64, v: &[f64], lv: &[f64], phi: &[f64], c: f64) -> Option<f64> {
    let mut lower: f64 = 0.0;
    let mut upper = f64::INFINITY;
    for ((&vi, &li), &p) in v.iter().zip(lv).zip(phi) {
        let drive = a * li + c;
        let weight = p * (a * vi).exp();
        if !weight.is_finite() || !drive.is_finite() {
            return None;
        }
        if p < 0.0 {
            lower = lower.max(drive / weight);
        } else if p > 0.0 {
            if drive < 0.0 {
                return None;
            }
            upper = upper.min(drive / weight);
        } else if drive < 0.0 {
            return None;
        }
    }
    if lower <= 0.0 {
        // Only possible when φ ≥ 0 wherever the drive is negative; any tiny E works.
        lower = f64::MIN_POSITIVE;
    }
    let e = if upper.is_finite() {
        if !(lower < upper) {
            return None;
        }
        (1.02 * lower).min((lower * upper).sqrt())
    } else {
        1.02 * lower
    };
    let b = e.ln();
    b.is_finite().then_some(b)
}

/// Super-solution of the form `a v + b`, with `v` the mean-zero solution of
/// `Δ_d v + ⟨α, dv⟩ = φ - φ̄`.
///
/// Candidates are the classical choices (`a = 3c/φ̄`, `b = log a - a·min v + 0.1`
/// when `φ ≤ 0`; the largest `a` satisfying `|e^{av} - 1| ≤ -φ̄/(2‖φ‖_∞)` with
/// `b = log a` otherwise) together with a scan over `a` where `b` is the
/// smallest admissible offset for that slope. Every candidate is checked with
/// [`is_supersolution`]; the one with the smallest maximum is returned, which
/// keeps the monotone iteration's shift small.
pub fn build_supersolution(prob: &KWProblem, config: &KwConfig) -> Result<ScalarField> {
    require_negative_c(prob)?;
    let phi_bar = prob.phi.mean();
    if !(phi_bar < 0.0) {
        return Err(KwError::NecessaryConditionViolated { mean: phi_bar });
    }
    let spec = prob.phi.spec();
    let c = prob.c;
    let centered = prob.phi.offset(-phi_bar)?;
    let v = if centered.sup_norm() <= 1e-14 * (1.0 + phi_bar.abs()) {
        ScalarField::zeros(spec)
    } else {
        solve_meanzero(&prob.alpha, &centered, &config.linear)?.0
    };
    let lv = chern_laplacian(&prob.alpha, &v)?;
    let (v_min, v_max) = (v.min(), v.max());
    let osc = v_max - v_min;

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let phi_nonpositive = prob.phi.values().iter().all(|&p| p <= 0.0);
    if phi_nonpositive {
        let a = 1.5 * 2.0 * c / phi_bar;
        candidates.push((a, a.ln() - a * v_min + 0.1));
    } else {
        let bound = -phi_bar / (2.0 * prob.phi.sup_norm());
        let fits = |a: f64| {
            v.values()
                .iter()
                .all(|&vi| ((a * vi).exp() - 1.0).abs() <= bound)
        };
        let mut a_max = if osc > 0.0 { 1.0 / osc } else { 1.0 };
        while !fits(a_max) && a_max > 1e-300 {
            a_max *= 0.5;
        }
        let (mut lo, mut hi) = (a_max, 2.0 * a_max);
        while fits(hi) && hi < 1e300 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo * phi_bar / 2.0 <= c {
            candidates.push((lo, lo.ln()));
        }
    }
    let mut slopes = vec![0.0];
    slopes.extend((-40..=20).map(|k| 2f64.powf(k as f64 * 0.5)));
    for a in slopes {
        if let Some(b) = candidate_for_slope(a, v.values(), lv.values(), prob.phi.values(), c) {
            candidates.push((a, b));
        }
    }

    let mut best: Option<(f64, ScalarField)> = None;
    for (a, b) in candidates {
        if !a.is_finite() || !b.is_finite() {
            continue;
        }
        let w = match v.map(|vi| a * vi + b) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let top = w.max();
        if !top.is_finite() || top > 700.0 {
            continue;
        }
        if best.as_ref().is_some_and(|(m, _)| *m <= top) {
            continue;
        }
        if is_supersolution(&w, prob)?.0 {
            best = Some((top, w));
        }
    }
    best.map(|(_, w)| w)
        .ok_or_else(|| KwError::CannotCertify(format!("no candidate a v + b passed for c = {c}")))
}
