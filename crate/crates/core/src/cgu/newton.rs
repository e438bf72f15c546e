//! Damped Gauss-Newton for small nonlinear least-squares systems.
//!
//! The solvers here have dozens of residuals and a handful of parameters,
//! so a finite-difference Jacobian with a spectral pseudo-inverse of the
//! normal equations is both simple and robust.

use crate::error::Result;
use crate::matfun::{spectral, HermitianMatrix};

pub(crate) struct GaussNewtonOptions {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub step_tol: f64,
    pub fd_step: f64,
    pub max_halvings: usize,
}

impl Default for GaussNewtonOptions {
    fn default() -> Self {
        GaussNewtonOptions {
            max_iter: 200,
            residual_tol: 1e-10,
            step_tol: 1e-12,
            fd_step: 1e-7,
            max_halvings: 40,
        }
    }
}

pub(crate) struct GaussNewtonResult {
    pub params: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Minimize ‖f(x)‖² from `x0`. Convergence means the residual dropped below
/// `residual_tol` in the max norm; a stalled step with a large residual
/// reports `converged: false` rather than erroring, so callers can treat
/// branches uniformly.
pub(crate) fn gauss_newton(
    f: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    x0: Vec<f64>,
    opts: &GaussNewtonOptions,
) -> Result<GaussNewtonResult> {
    let mut x = x0;
    let p = x.len();
    let mut r = f(&x);
    let m = r.len();

    if p == 0 {
        let residual_inf = inf_norm(&r);
        return Ok(GaussNewtonResult {
            params: x,
            residual_inf,
            iterations: 0,
            converged: residual_inf <= opts.residual_tol,
        });
    }

    for iter in 0..opts.max_iter {
        let residual_inf = inf_norm(&r);
        if residual_inf <= opts.residual_tol {
            return Ok(GaussNewtonResult { params: x, residual_inf, iterations: iter, converged: true });
        }

        // finite-difference Jacobian, column per parameter
        let mut jac = vec![vec![0.0f64; p]; m];
        for j in 0..p {
            let mut xp = x.clone();
            xp[j] += opts.fd_step;
            let rp = f(&xp);
            for i in 0..m {
                jac[i][j] = (rp[i] - r[i]) / opts.fd_step;
            }
        }

        // normal equations J'J d = -J'r via spectral pseudo-inverse
        let mut jtj = vec![vec![0.0f64; p]; p];
        let mut jtr = vec![0.0f64; p];
        for i in 0..m {
            for a in 0..p {
                jtr[a] += jac[i][a] * r[i];
                for b in a..p {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }
        let h = HermitianMatrix::from_real(jtj)?;
        let (eigs, vecs) = spectral(&h)?;
        let clamp = eigs.first().copied().unwrap_or(0.0).abs().max(1e-300) * 1e-12;
        let mut delta = vec![0.0f64; p];
        for k in 0..p {
            if eigs[k] <= clamp {
                continue;
            }
            let mut proj = 0.0;
            for a in 0..p {
                proj += vecs[(a, k)].re * jtr[a];
            }
            let coeff = proj / eigs[k];
            for a in 0..p {
                delta[a] -= coeff * vecs[(a, k)].re;
            }
        }

        let step_norm = sq_norm(&delta).sqrt();
        if step_norm < opts.step_tol {
            return Ok(GaussNewtonResult {
                params: x,
                residual_inf,
                iterations: iter,
                converged: residual_inf <= opts.residual_tol,
            });
        }

        // backtracking on the squared norm
        let base = sq_norm(&r);
        let mut scale = 1.0f64;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + scale * d).collect();
            let rt = f(&trial);
            if sq_norm(&rt) < base {
                x = trial;
                r = rt;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Ok(GaussNewtonResult {
                params: x,
                residual_inf,
                iterations: iter,
                converged: residual_inf <= opts.residual_tol,
            });
        }
    }

    let residual_inf = inf_norm(&r);
    Ok(GaussNewtonResult {
        params: x,
        residual_inf,
        iterations: opts.max_iter,
        converged: residual_inf <= opts.residual_tol,
    })
}
