//! Restarted, right-preconditioned GMRES with optional mean-zero projection.

pub(crate) struct GmresSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    /// Keep every Krylov vector, iterate and residual mean-zero.
    pub project: bool,
}

pub(crate) struct GmresRun {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Solves `A x = b`. `accept` decides convergence from the true residual;
/// the Arnoldi loop stops early once its residual estimate drops below
/// `tol·‖b‖`, and the target shrinks if `accept` is not yet satisfied.
pub(crate) fn gmres(
    apply: &dyn Fn(&[f64], &mut [f64]),
    precond: Option<&dyn Fn(&[f64], &mut [f64])>,
    b: &[f64],
    accept: &dyn Fn(&[f64]) -> bool,
    settings: &GmresSettings,
) -> GmresRun {
    let n = b.len();
    let m = settings.restart.max(1);
    let mut rhs = b.to_vec();
    if settings.project {
        project_mean(&mut rhs);
    }
    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let b_norm = norm(&rhs);
    let mut iterations = 0;

    if b_norm == 0.0 || accept(&r) {
        return GmresRun {
            x,
            residual: r,
            iterations,
            converged: true,
        };
    }

    let mut target = settings.tol * b_norm;
    let floor = 1e-15 * b_norm;
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];

    let mut best = b_norm;
    let mut stalled_cycles = 0;

    let precondition = |src: &[f64], dst: &mut [f64]| {
        match precond {
            Some(p) => p(src, dst),
            None => dst.copy_from_slice(src),
        }
        if settings.project {
            project_mean(dst);
        }
    };

    loop {
        let beta = norm(&r);
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut k = 0;
        let mut estimate = beta;

        while k < m && iterations < settings.max_iter {
            precondition(&basis[k], &mut z);
            apply(&z, &mut w);
            if settings.project {
                project_mean(&mut w);
            }
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][k] = hij;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
            }
            let h_next = norm(&w);
            h[k + 1][k] = h_next;

            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            estimate = g[k + 1].abs();

            iterations += 1;
            k += 1;
            if estimate <= target || h_next <= 1e-14 * beta {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        if k > 0 {
            let mut y = vec![0.0; k];
            for i in (0..k).rev() {
                let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
                y[i] = (g[i] - s) / h[i][i];
            }
            let mut update = vec![0.0; n];
            for (yi, v) in y.iter().zip(&basis) {
                update.iter_mut().zip(v).for_each(|(u, vi)| *u += yi * vi);
            }
            precondition(&update, &mut z);
            x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
        }

        apply(&x, &mut w);
        r.iter_mut()
            .zip(rhs.iter().zip(&w))
            .for_each(|(ri, (bi, ai))| *ri = bi - ai);
        if settings.project {
            project_mean(&mut r);
        }
        if accept(&r) {
            return GmresRun {
                x,
                residual: r,
                iterations,
                converged: true,
            };
        }
        if iterations >= settings.max_iter || k == 0 {
            return GmresRun {
                x,
                residual: r,
                iterations,
                converged: false,
            };
        }
        let r_norm = norm(&r);
        if r_norm < 0.999 * best {
            best = r_norm;
            stalled_cycles = 0;
        } else {
            stalled_cycles += 1;
            if stalled_cycles >= 20 {
                return GmresRun {
                    x,
                    residual: r,
                    iterations,
                    converged: false,
                };
            }
        }
        if estimate <= target {
            target = (target * 0.1).max(floor);
        }
    }
}
