//! Periodic sampling lattices on `[0, 2π)^rank` and the fields that live on them.
//!
//! Values are stored row-major with the last axis fastest. Every field keeps
//! the invariant that all of its values are finite.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{KwError, Result};

pub const MAX_RANK: usize = 4;
pub const MIN_POINTS: usize = 8;

/// Periodic grid with `dims[i]` points on axis `i`, spacing `2π / dims[i]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dims: Vec<usize>,
}

impl GridSpec {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_RANK {
            return Err(KwError::InvalidGrid(format!(
                "rank must be between 1 and {MAX_RANK}, got {}",
                dims.len()
            )));
        }
        for (axis, &n) in dims.iter().enumerate() {
            if n < MIN_POINTS {
                return Err(KwError::InvalidGrid(format!(
                    "axis {axis} has {n} points, need at least {MIN_POINTS}"
                )));
            }
            if n % 2 != 0 {
                return Err(KwError::InvalidGrid(format!(
                    "axis {axis} has odd size {n}"
                )));
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
        })
    }

    /// Same number of points on every axis.
    pub fn cube(rank: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; rank])
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.dims[axis] as f64
    }

    /// Coordinate of grid index `j` along `axis`.
    pub fn coord(&self, axis: usize, j: usize) -> f64 {
        j as f64 * self.spacing(axis)
    }

    /// Distance between consecutive points along `axis` in the flat value array.
    pub fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.rank());
        multi
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&j, &n)| acc * n + j)
    }

    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.rank()];
        for axis in (0..self.rank()).rev() {
            out[axis] = index % self.dims[axis];
            index /= self.dims[axis];
        }
        out
    }

    /// Physical coordinates of the point with flat index `index`.
    pub fn point(&self, index: usize) -> Vec<f64> {
        self.multi_index(index)
            .iter()
            .enumerate()
            .map(|(axis, &j)| self.coord(axis, j))
            .collect()
    }

    /// Same grid with every axis refined by a factor of two.
    pub fn doubled(&self) -> Self {
        Self {
            dims: self.dims.iter().map(|n| 2 * n).collect(),
        }
    }
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridSpec{:?}", self.dims)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(KwError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Real-valued sample of a function on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(spec: &GridSpec, fill: f64) -> Result<Self> {
        check_finite(&[fill])?;
        Ok(Self {
            spec: spec.clone(),
            values: vec![fill; spec.len()],
        })
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        Self {
            spec: spec.clone(),
            values: vec![0.0; spec.len()],
        }
    }

    pub fn from_values(spec: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(KwError::SizeMismatch {
                expected: spec.len(),
                found: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self {
            spec: spec.clone(),
            values,
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(spec: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..spec.len()).map(|i| f(&spec.point(i))).collect();
        Self::from_values(spec, values)
    }

    pub(crate) fn from_values_unchecked(spec: &GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self {
            spec: spec.clone(),
            values,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        ensure_same(&self.spec, &other.spec)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(&self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values(&self.spec, values)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        self.map(|v| factor * v)
    }

    pub fn offset(&self, shift: f64) -> Result<Self> {
        self.map(|v| v + shift)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Average over the grid, i.e. the integral against unit-volume measure.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `(mean |f|^p)^(1/p)`; `p = ∞` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let m = self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / self.len() as f64;
        m.powf(1.0 / p)
    }

    /// `sup |self - other|`.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

pub(crate) fn ensure_same(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(KwError::SpecMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// Covector field with one component per axis, in flat orthonormal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    spec: GridSpec,
    components: Vec<ScalarField>,
    gauduchon: bool,
}

impl OneForm {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let spec = components
            .first()
            .map(|c| c.spec().clone())
            .ok_or_else(|| KwError::InvalidGrid("one-form needs components".into()))?;
        if components.len() != spec.rank() {
            return Err(KwError::SpecMismatch(format!(
                "one-form has {} components on a rank-{} grid",
                components.len(),
                spec.rank()
            )));
        }
        for c in &components {
            ensure_same(&spec, c.spec())?;
        }
        Ok(Self {
            spec,
            components,
            gauduchon: false,
        })
    }

    pub fn zero(spec: &GridSpec) -> Self {
        Self {
            spec: spec.clone(),
            components: (0..spec.rank()).map(|_| ScalarField::zeros(spec)).collect(),
            gauduchon: false,
        }
    }

    pub fn constant(spec: &GridSpec, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != spec.rank() {
            return Err(KwError::SpecMismatch(format!(
                "{} coefficients for rank {}",
                coefficients.len(),
                spec.rank()
            )));
        }
        let components = coefficients
            .iter()
            .map(|&a| ScalarField::constant(spec, a))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    /// True when every component is identically zero.
    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.values().iter().all(|&v| v == 0.0))
    }

    /// Whether [`OneForm::validate_gauduchon`] has accepted this form.
    pub fn is_gauduchon_validated(&self) -> bool {
        self.gauduchon
    }

    /// Checks that the discrete divergence is below `tolerance` in sup-norm
    /// and flags the form as validated.
    pub fn validate_gauduchon(mut self, tolerance: f64) -> Result<Self> {
        let divergence = crate::operators::divergence(&self).sup_norm();
        if divergence > tolerance {
            return Err(KwError::NonGauduchon {
                divergence,
                tolerance,
            });
        }
        self.gauduchon = true;
        Ok(self)
    }
}
