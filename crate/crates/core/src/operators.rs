//! Fourth-order periodic finite-difference operators.
//!
//! Sign convention: `laplacian` is the Hodge Laplacian `Δ_d = -Σ ∂²/∂x_i²`,
//! so its spectrum is nonnegative and constants span the kernel.

use crate::error::Result;
use crate::grid::{ensure_same, GridSpec, OneForm, ScalarField};

/// Calls `f(p, [m2, m1, p1, p2], len)` for runs of `len` consecutive points
/// starting at `p` whose periodic neighbours two and one steps behind and
/// ahead along `axis` are also consecutive, starting at `m2, m1, p1, p2`.
#[inline(always)]
fn for_each_run(spec: &GridSpec, axis: usize, mut f: impl FnMut(usize, [usize; 4], usize)) {
    let n = spec.dims()[axis];
    let stride = spec.stride(axis);
    let outer: usize = spec.dims()[..axis].iter().product();
    let table: Vec<[usize; 4]> = (0..n)
        .map(|j| [(j + n - 2) % n, (j + n - 1) % n, (j + 1) % n, (j + 2) % n].map(|i| i * stride))
        .collect();
    for o in 0..outer {
        let base = o * n * stride;
        if stride == 1 {
            // Interior of the line in one run, the four wrapped points singly.
            f(base + 2, [base, base + 1, base + 3, base + 4], n - 4);
            for j in [0, 1, n - 2, n - 1] {
                f(base + j, table[j].map(|i| base + i), 1);
            }
        } else {
            for (j, t) in table.iter().enumerate() {
                f(base + j * stride, t.map(|i| base + i), stride);
            }
        }
    }
}

/// `dst += scale · (-∂²src/∂x_axis²)`.
pub(crate) fn add_neg_second_derivative(
    spec: &GridSpec,
    axis: usize,
    scale: f64,
    src: &[f64],
    dst: &mut [f64],
) {
    let h = spec.spacing(axis);
    let c = scale / (12.0 * h * h);
    for_each_run(spec, axis, |p, [m2, m1, p1, p2], len| {
        let out = &mut dst[p..p + len];
        let (x0, x1, x2) = (&src[m2..m2 + len], &src[m1..m1 + len], &src[p..p + len]);
        let (x3, x4) = (&src[p1..p1 + len], &src[p2..p2 + len]);
        for k in 0..len {
            let d2 = 16.0 * (x1[k] + x3[k] - 2.0 * x2[k]) - (x0[k] + x4[k] - 2.0 * x2[k]);
            out[k] -= c * d2;
        }
    });
}

/// `dst += weight · ∂src/∂x_axis`, with `weight` either a scalar or a field.
pub(crate) fn add_weighted_first_derivative(
    spec: &GridSpec,
    axis: usize,
    weight: Weight<'_>,
    src: &[f64],
    dst: &mut [f64],
) {
    let h = spec.spacing(axis);
    let c = 1.0 / (12.0 * h);
    for_each_run(spec, axis, |p, [m2, m1, p1, p2], len| {
        let out = &mut dst[p..p + len];
        let (x0, x1) = (&src[m2..m2 + len], &src[m1..m1 + len]);
        let (x3, x4) = (&src[p1..p1 + len], &src[p2..p2 + len]);
        for k in 0..len {
            let d1 = 8.0 * (x3[k] - x1[k]) - (x4[k] - x0[k]);
            let w = match weight {
                Weight::Scalar(a) => a,
                Weight::Field(a) => a[p + k],
            };
            out[k] += w * c * d1;
        }
    });
}

/// `dst += -∂²src/∂x_axis² + a · ∂src/∂x_axis` in a single sweep.
pub(crate) fn add_drift_diffusion(
    spec: &GridSpec,
    axis: usize,
    a: &[f64],
    src: &[f64],
    dst: &mut [f64],
) {
    let h = spec.spacing(axis);
    let c2 = 1.0 / (12.0 * h * h);
    let c1 = 1.0 / (12.0 * h);
    for_each_run(spec, axis, |p, [m2, m1, p1, p2], len| {
        let out = &mut dst[p..p + len];
        let w = &a[p..p + len];
        let (x0, x1, x2) = (&src[m2..m2 + len], &src[m1..m1 + len], &src[p..p + len]);
        let (x3, x4) = (&src[p1..p1 + len], &src[p2..p2 + len]);
        for k in 0..len {
            let d2 = 16.0 * (x1[k] + x3[k] - 2.0 * x2[k]) - (x0[k] + x4[k] - 2.0 * x2[k]);
            let d1 = 8.0 * (x3[k] - x1[k]) - (x4[k] - x0[k]);
            out[k] += w[k] * c1 * d1 - c2 * d2;
        }
    });
}

#[derive(Clone, Copy)]
pub(crate) enum Weight<'a> {
    Scalar(f64),
    Field(&'a [f64]),
}

pub(crate) fn partial_into(spec: &GridSpec, axis: usize, src: &[f64], dst: &mut [f64]) {
    dst.iter_mut().for_each(|v| *v = 0.0);
    add_weighted_first_derivative(spec, axis, Weight::Scalar(1.0), src, dst);
}

/// Fourth-order centered derivative along one axis.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let mut out = vec![0.0; f.len()];
    partial_into(f.spec(), axis, f.values(), &mut out);
    ScalarField::from_values_unchecked(f.spec(), out)
}

/// Hodge Laplacian `Δ_d f = -Σ ∂²f/∂x_i²`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let spec = f.spec();
    let mut out = vec![0.0; f.len()];
    for axis in 0..spec.rank() {
        add_neg_second_derivative(spec, axis, 1.0, f.values(), &mut out);
    }
    ScalarField::from_values_unchecked(spec, out)
}

/// Pairing `⟨α, df⟩ = Σ α_i ∂_i f` in the flat metric.
pub fn lee_pairing(alpha: &OneForm, f: &ScalarField) -> Result<ScalarField> {
    ensure_same(alpha.spec(), f.spec())?;
    let spec = f.spec();
    let mut out = vec![0.0; f.len()];
    for (axis, a) in alpha.components().iter().enumerate() {
        add_weighted_first_derivative(spec, axis, Weight::Field(a.values()), f.values(), &mut out);
    }
    Ok(ScalarField::from_values_unchecked(spec, out))
}

/// `Σ ∂_i α_i`. Vanishes exactly when the Lee form is co-closed.
pub fn divergence(alpha: &OneForm) -> ScalarField {
    let spec = alpha.spec();
    let mut out = vec![0.0; spec.len()];
    for (axis, a) in alpha.components().iter().enumerate() {
        add_weighted_first_derivative(spec, axis, Weight::Scalar(1.0), a.values(), &mut out);
    }
    ScalarField::from_values_unchecked(spec, out)
}

/// Normalized integral: total volume is one, so this is the grid average.
pub fn mean(f: &ScalarField) -> f64 {
    f.mean()
}

/// Chern Laplacian `Δ_d f + ⟨α, df⟩`.
pub fn chern_laplacian(alpha: &OneForm, f: &ScalarField) -> Result<ScalarField> {
    let lap = laplacian(f);
    lap.add(&lee_pairing(alpha, f)?)
}

/// `|df|² = Σ (∂_i f)²`.
pub fn grad_sq(f: &ScalarField) -> ScalarField {
    let spec = f.spec();
    let mut out = vec![0.0; f.len()];
    let mut d = vec![0.0; f.len()];
    for axis in 0..spec.rank() {
        partial_into(spec, axis, f.values(), &mut d);
        out.iter_mut().zip(&d).for_each(|(o, v)| *o += v * v);
    }
    ScalarField::from_values_unchecked(spec, out)
}

/// `sup |∇f|`.
pub fn grad_sup_norm(f: &ScalarField) -> f64 {
    grad_sq(f).values().iter().fold(0.0, |m, v| m.max(v.sqrt()))
}
