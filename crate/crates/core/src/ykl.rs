//! Optimality certification for a proposed measurement, via the
//! Yuen-Kennedy-Lax conditions: the two stationarity equations on the
//! solution matrix X and the operator inequality on the Lagrangian Υ.
//!
//! Everything runs in the n-dimensional coordinate space obtained by
//! symmetrically orthogonalizing the codewords: state i has coordinates
//! equal to column i of sqrt(Γ). The ambient mode space never appears.

use serde::{Deserialize, Serialize};

use crate::coherent::{gram, weighted_gram, Codebook};
use crate::error::{Error, Result};
use crate::matfun::{min_eig, psd_sqrt, ComplexMatrix, HermitianMatrix, C64};

/// Default certification tolerance: above accumulated eigensolver error at
/// the dimensions used here, below any genuine condition violation seen in
/// perturbation tests.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Codeword coordinates: column i of sqrt(Γ) is state i expressed in the
/// orthonormal basis that symmetric orthogonalization produces.
pub fn state_coordinates(cb: &Codebook) -> Result<ComplexMatrix> {
    Ok(psd_sqrt(&gram(cb))?.into_mat())
}

/// A candidate measurement for an ensemble, in sqrt(Γ) coordinates.
///
/// `x` is the solution matrix with entries x_ij = sqrt(p_j) <w_i|psi_j>;
/// `w` holds the measurement basis vectors as columns. The conditional
/// matrix has rows indexed by the transmitted word: row i, column j is the
/// probability of deciding j when i was sent, so rows sum to one whenever
/// x is consistent with a complete measurement.
#[derive(Clone, Debug, Serialize)]
pub struct MeasurementSolution {
    x: ComplexMatrix,
    w: ComplexMatrix,
    p_e: f64,
    conditionals: Vec<Vec<f64>>,
}

/// On-disk form: only the two matrices; error and conditionals are
/// recomputed against the codebook on load.
#[derive(Deserialize)]
struct SolutionFile {
    x: ComplexMatrix,
    w: ComplexMatrix,
}

impl MeasurementSolution {
    /// Assemble from the two matrices, validating shapes and unitarity of
    /// the measurement basis, and deriving conditionals and error
    /// probability from x.
    pub fn from_parts(x: ComplexMatrix, w: ComplexMatrix, priors: &[f64]) -> Result<Self> {
        let n = priors.len();
        if !x.is_square() || x.rows() != n || !w.is_square() || w.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "solution matrices must be {n}x{n} to match {n} priors"
            )));
        }
        let u_res = w.unitarity_residual();
        if u_res > 1e-9 {
            return Err(Error::NotUnitary(u_res));
        }
        let conditionals: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| x[(j, i)].norm_sqr() / priors[i]).collect())
            .collect();
        let p_e = 1.0 - (0..n).map(|i| priors[i] * conditionals[i][i]).sum::<f64>();
        Ok(MeasurementSolution { x, w, p_e, conditionals })
    }

    /// Build the solution a measurement basis induces on a codebook:
    /// x = W† sqrt(Γ) diag(sqrt(p)).
    pub fn from_measurement(cb: &Codebook, w: ComplexMatrix) -> Result<Self> {
        let s = state_coordinates(cb)?;
        let mut m = w.dagger().mul(&s);
        let n = cb.len();
        for j in 0..n {
            let root = cb.priors()[j].sqrt();
            for i in 0..n {
                m[(i, j)] *= root;
            }
        }
        Self::from_parts(m, w, cb.priors())
    }

    pub fn from_json(cb: &Codebook, text: &str) -> Result<Self> {
        let file: SolutionFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("solution JSON: {e}")))?;
        Self::from_parts(file.x, file.w, cb.priors())
    }

    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn error_probability(&self) -> f64 {
        self.p_e
    }

    /// Row i, column j: probability of deciding j given i transmitted.
    pub fn conditionals(&self) -> &[Vec<f64>] {
        &self.conditionals
    }
}

/// Certification report: residuals of the two stationarity equations, the
/// worst eigenvalue over the n operator inequalities, and per-condition
/// verdicts at the tolerance used.
#[derive(Clone, Debug, Serialize)]
pub struct YklReport {
    pub eq1_residual: f64,
    pub eq2_residual: f64,
    pub ineq_min_eig: f64,
    pub eq1_pass: bool,
    pub eq2_pass: bool,
    pub ineq_pass: bool,
    pub pass: bool,
    pub tol: f64,
}

/// The Lagrangian operator Υ = Σ_i p_i ψ_i Π_i, with ψ_i the state
/// projector and Π_i the projector onto measurement vector i. Both operator
/// orderings are averaged; for a stationary measurement they already agree,
/// and the deviation is logged at debug level.
pub fn build_upsilon(cb: &Codebook, w: &ComplexMatrix) -> Result<HermitianMatrix> {
    upsilon_from_gram(&gram(cb), cb.priors(), w)
}

/// [`build_upsilon`] for callers holding only a Gram matrix and priors.
pub fn upsilon_from_gram(
    gram: &HermitianMatrix,
    priors: &[f64],
    w: &ComplexMatrix,
) -> Result<HermitianMatrix> {
    let n = gram.dim();
    if priors.len() != n || !w.is_square() || w.rows() != n {
        return Err(Error::DimensionMismatch(
            "Gram, priors and measurement basis sizes must agree".into(),
        ));
    }
    let u_res = w.unitarity_residual();
    if u_res > 1e-9 {
        return Err(Error::NotUnitary(u_res));
    }
    let s = psd_sqrt(gram)?.into_mat();
    // Υ = Σ_i p_i |s_i><s_i|w_i><w_i| : rank-one accumulation
    let mut upsilon = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let si = s.col(i);
        let wi = w.col(i);
        let overlap: C64 = crate::matfun::cdot(&si, &wi);
        let coeff = overlap * priors[i];
        for r in 0..n {
            let left = si[r] * coeff;
            for c in 0..n {
                upsilon[(r, c)] += left * wi[c].conj();
            }
        }
    }
    let herm_res = upsilon.hermiticity_residual();
    log::debug!("upsilon hermiticity residual {herm_res:.3e}");
    Ok(HermitianMatrix::symmetrize(upsilon))
}

/// Check a solution against all three optimality conditions.
pub fn verify(cb: &Codebook, sol: &MeasurementSolution, tol: f64) -> Result<YklReport> {
    verify_gram(&gram(cb), &weighted_gram(cb), cb.priors(), sol, tol)
}

/// [`verify`] from precomputed Gram data: `gram` for state coordinates,
/// `wgram` for the first equation, priors for the rest.
pub fn verify_gram(
    gram: &HermitianMatrix,
    wgram: &HermitianMatrix,
    priors: &[f64],
    sol: &MeasurementSolution,
    tol: f64,
) -> Result<YklReport> {
    let n = gram.dim();
    if sol.x.rows() != n || priors.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solution dimension {} does not match ensemble size {n}",
            sol.x.rows()
        )));
    }
    let eq1_residual = sol.x.dagger().mul(&sol.x).max_abs_diff(wgram.mat());

    let x = &sol.x;
    let mut eq2_residual: f64 = 0.0;
    for k in 0..n {
        for m in 0..n {
            let r = (x[(k, m)] * x[(m, m)].conj() - x[(k, k)] * x[(m, k)].conj()).norm();
            eq2_residual = eq2_residual.max(r);
        }
    }

    let upsilon = upsilon_from_gram(gram, priors, &sol.w)?;
    let s = psd_sqrt(gram)?.into_mat();
    let mut ineq_min_eig = f64::INFINITY;
    for i in 0..n {
        let si = s.col(i);
        let mut a = upsilon.mat().clone();
        for r in 0..n {
            let left = si[r] * priors[i];
            for c in 0..n {
                a[(r, c)] -= left * si[c].conj();
            }
        }
        ineq_min_eig = ineq_min_eig.min(min_eig(&HermitianMatrix::symmetrize(a))?);
    }

    let eq1_pass = eq1_residual <= tol;
    let eq2_pass = eq2_residual <= tol;
    let ineq_pass = ineq_min_eig >= -tol;
    Ok(YklReport {
        eq1_residual,
        eq2_residual,
        ineq_min_eig,
        eq1_pass,
        eq2_pass,
        ineq_pass,
        pass: eq1_pass && eq2_pass && ineq_pass,
        tol,
    })
}
