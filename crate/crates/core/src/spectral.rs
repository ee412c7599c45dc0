//! Exact inverse of the constant-coefficient stencil operator `Δ_d + shift`
//! in Fourier space, used as a Krylov preconditioner.

use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

/// Eigenvalue of the fourth-order `-∂²` stencil for integer wavenumber `k`.
pub fn stencil_symbol(k: f64, h: f64) -> f64 {
    (30.0 - 32.0 * (k * h).cos() + 2.0 * (2.0 * k * h).cos()) / (12.0 * h * h)
}

/// Zero-mode treatment when the shift vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroMode {
    /// Drop the constant mode (pseudo-inverse on mean-zero fields).
    Project,
    /// Leave the constant mode untouched.
    Identity,
}

const TILE: usize = 16;

/// Real transform along the last axis, complex transforms along the others,
/// on the half spectrum `(n_0, …, n_{r-2}, n_{r-1}/2 + 1)`.
pub struct SpectralInverse {
    /// Dimensions of the half spectrum.
    half: Vec<usize>,
    inverse_symbol: Vec<f64>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    backward: Vec<Arc<dyn Fft<f64>>>,
}

fn wavenumber(j: usize, n: usize) -> f64 {
    if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

impl SpectralInverse {
    pub fn new(spec: &GridSpec, shift: f64, zero_mode: ZeroMode) -> Self {
        let rank = spec.rank();
        let last = spec.dims()[rank - 1];
        let mut half = spec.dims().to_vec();
        half[rank - 1] = last / 2 + 1;

        let mut real_planner = RealFftPlanner::<f64>::new();
        let r2c = real_planner.plan_fft_forward(last);
        let c2r = real_planner.plan_fft_inverse(last);
        let mut planner = FftPlanner::new();
        let leading = &spec.dims()[..rank - 1];
        let forward = leading
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let backward = leading
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();

        // Row-major outer sums, last axis fastest.
        let mut symbol = vec![shift];
        for axis in 0..rank {
            let n = spec.dims()[axis];
            let h = spec.spacing(axis);
            let axis_symbol: Vec<f64> = (0..half[axis])
                .map(|j| stencil_symbol(wavenumber(j, n), h))
                .collect();
            symbol = symbol
                .iter()
                .flat_map(|&base| axis_symbol.iter().map(move |&s| base + s))
                .collect();
        }
        let scale = 1.0 / spec.len() as f64;
        let inverse_symbol = symbol
            .into_iter()
            .enumerate()
            .map(|(i, lambda)| {
                let inv = if i == 0 && shift.abs() < 1e-14 {
                    match zero_mode {
                        ZeroMode::Project => 0.0,
                        ZeroMode::Identity => 1.0,
                    }
                } else {
                    1.0 / lambda
                };
                inv * scale
            })
            .collect();
        Self {
            half,
            inverse_symbol,
            r2c,
            c2r,
            forward,
            backward,
        }
    }

    /// Complex transforms along every axis but the last.
    fn transform(&self, buf: &mut [Complex<f64>], plans: &[Arc<dyn Fft<f64>>]) {
        let mut lines = Vec::new();
        let mut scratch = Vec::new();
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.half[axis];
            let stride: usize = self.half[axis + 1..].iter().product();
            scratch.resize(plan.get_inplace_scratch_len(), Complex::new(0.0, 0.0));
            // Gather TILE neighbouring lines at a time so that both the reads
            // and the writes walk memory in short contiguous runs.
            let tile = TILE.min(stride);
            lines.resize(tile * n, Complex::new(0.0, 0.0));
            for chunk in buf.chunks_exact_mut(n * stride) {
                let mut k0 = 0;
                while k0 < stride {
                    let width = tile.min(stride - k0);
                    let lines = &mut lines[..width * n];
                    for (j, row) in chunk.chunks_exact(stride).enumerate() {
                        let row = &row[k0..k0 + width];
                        lines[j..]
                            .iter_mut()
                            .step_by(n)
                            .zip(row)
                            .for_each(|(l, &v)| *l = v);
                    }
                    plan.process_with_scratch(lines, &mut scratch);
                    for (j, row) in chunk.chunks_exact_mut(stride).enumerate() {
                        let row = &mut row[k0..k0 + width];
                        lines[j..]
                            .iter()
                            .step_by(n)
                            .zip(row)
                            .for_each(|(&l, v)| *v = l);
                    }
                    k0 += width;
                }
            }
        }
    }

    /// `dst = (Δ_d + shift)^{-1} src` (with the chosen zero-mode treatment).
    pub fn apply(&self, src: &[f64], dst: &mut [f64]) {
        let last = self.r2c.len();
        let m = last / 2 + 1;
        let mut buf = vec![Complex::new(0.0, 0.0); src.len() / last * m];
        let mut row = vec![0.0; last];
        let mut scratch = self.r2c.make_scratch_vec();
        for (input, output) in src.chunks_exact(last).zip(buf.chunks_exact_mut(m)) {
            row.copy_from_slice(input);
            self.r2c
                .process_with_scratch(&mut row, output, &mut scratch)
                .expect("buffer lengths match the plan");
        }
        self.transform(&mut buf, &self.forward);
        buf.iter_mut()
            .zip(&self.inverse_symbol)
            .for_each(|(c, s)| *c *= *s);
        self.transform(&mut buf, &self.backward);
        let mut scratch = self.c2r.make_scratch_vec();
        for (input, output) in buf.chunks_exact_mut(m).zip(dst.chunks_exact_mut(last)) {
            // The zero and Nyquist coefficients of a real line are real.
            input[0].im = 0.0;
            if last % 2 == 0 {
                input[m - 1].im = 0.0;
            }
            self.c2r
                .process_with_scratch(input, output, &mut scratch)
                .expect("buffer lengths match the plan");
        }
    }
}
