//! Dense complex matrix kernel: spectral decomposition of Hermitian matrices,
//! PSD square roots, polar decomposition, PSD certification.
//!
//! Sized for desk-scale problems (n up to a couple thousand); everything is
//! row-major `Vec<Complex64>` with no blocking or parallelism.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max sweeps before the Jacobi eigensolver gives up.
const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative eigenvalue clamp for PSD square roots. Gram matrices of
/// near-parallel coherent states are nearly singular at large photon number,
/// so slightly negative eigenvalues are expected and flattened to zero.
const PSD_CLAMP: f64 = 1e-10;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![C64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(ComplexMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mulvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `rhs`.
    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖A - A^dag‖_max for a square matrix.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// ‖A^dag A - I‖_max.
    pub fn unitarity_residual(&self) -> f64 {
        self.dagger().mul(self).max_abs_diff(&ComplexMatrix::identity(self.cols))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Wire format: rows of [re, im] pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(de)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Square complex matrix that is exactly Hermitian in storage.
///
/// Construction tolerates an asymmetry up to `1e-12 * max(1, ‖A‖_max)` and
/// then stores `(A + A^dag)/2`, so downstream algorithms never see drift.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let res = mat.hermiticity_residual();
        if res > 1e-12 * mat.max_abs().max(1.0) {
            return Err(Error::NotHermitian(res));
        }
        Ok(Self::symmetrize(mat))
    }

    /// Store `(A + A^dag)/2` without a tolerance check. For internal products
    /// like `R * R` that are Hermitian by construction.
    pub(crate) fn symmetrize(mat: ComplexMatrix) -> Self {
        assert!(mat.is_square());
        let n = mat.rows();
        let mut out = mat.clone();
        for i in 0..n {
            out[(i, i)] = C64::new(mat[(i, i)].re, 0.0);
            for j in i + 1..n {
                let v = (mat[(i, j)] + mat[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        HermitianMatrix { mat: out }
    }

    pub fn from_real(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = ComplexMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| C64::new(x, 0.0)).collect())
                .collect(),
        )?;
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }
}

impl std::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;
    fn index(&self, ij: (usize, usize)) -> &C64 {
        &self.mat[ij]
    }
}

impl std::fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hermitian{:?}", self.mat)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.mat.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let mat = ComplexMatrix::deserialize(de)?;
        HermitianMatrix::new(mat).map_err(D::Error::custom)
    }
}

/// ⟨a|b⟩ with the convention of conjugating the first argument.
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Spectral decomposition A = Q diag(λ) Q^dag with eigenvalues sorted in
/// descending order and a deterministic eigenvector phase (the
/// largest-magnitude component of each column is made real positive).
///
/// Cyclic complex Jacobi: each rotation zeroes one off-diagonal pair, sweeps
/// repeat until the largest off-diagonal entry falls below `1e-14 * scale`.
pub fn spectral(a: &HermitianMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim();
    let mut m = a.mat().clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;

    let off = |m: &ComplexMatrix| -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                r = r.max(m[(i, j)].norm());
            }
        }
        r
    };

    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if off(&m) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= tol * 0.01 {
                    continue;
                }
                // Factor out the phase, then the classic real Jacobi angle.
                let phase = apq / mag;
                let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G differs from identity in rows/cols p,q:
                //   G_pp = c        G_pq = s
                //   G_qp = -s e^{-i phi}   G_qq = c e^{-i phi}
                let emphi = phase.conj();
                // A <- G^dag A G, columns first (A G), then rows (G^dag ...).
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * (s * emphi);
                    m[(k, q)] = akp * s + akq * (c * emphi);
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * (s * phase);
                    m[(q, k)] = apk * s + aqk * (c * phase);
                }
                m[(p, q)] = C64::ZERO;
                m[(q, p)] = C64::ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                // V <- V G accumulates eigenvectors.
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * (s * emphi);
                    v[(k, q)] = vkp * s + vkq * (c * emphi);
                }
            }
        }
    }
    if !converged && off(&m) > tol {
        return Err(Error::EigNonConvergence(off(&m)));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut q = ComplexMatrix::zeros(n, n);
    for (newj, &oldj) in order.iter().enumerate() {
        let mut col = v.col(oldj);
        let (mut best, mut bestmag) = (0, 0.0);
        for (i, z) in col.iter().enumerate() {
            if z.norm() > bestmag {
                bestmag = z.norm();
                best = i;
            }
        }
        if bestmag > 0.0 {
            let ph = col[best] / bestmag;
            for z in col.iter_mut() {
                *z *= ph.conj();
            }
        }
        q.set_col(newj, &col);
    }
    Ok((eigenvalues, q))
}

/// Smallest eigenvalue.
pub fn min_eig(a: &HermitianMatrix) -> Result<f64> {
    let (vals, _) = spectral(a)?;
    Ok(*vals.last().expect("nonempty matrix"))
}

/// True iff the smallest eigenvalue is ≥ -tol.
pub fn is_psd(a: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(min_eig(a)? >= -tol)
}

/// Apply `f` to the eigenvalues: Q f(λ) Q^dag.
fn eig_map(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let (vals, q) = spectral(a)?;
    let n = a.dim();
    let mut scaled = q.clone();
    for j in 0..n {
        let fj = C64::new(f(vals[j]), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    Ok(HermitianMatrix::symmetrize(scaled.mul(&q.dagger())))
}

/// Principal PSD square root. Eigenvalues in `[-clamp, 0)` are flattened to
/// zero, where `clamp = 1e-10 * max(|λ|)`; anything more negative is rejected.
pub fn psd_sqrt(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (vals, q) = spectral(a)?;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let clamp = PSD_CLAMP * scale;
    if let Some(&bad) = vals.iter().find(|&&v| v < -clamp) {
        return Err(Error::NotPsd(bad));
    }
    let n = a.dim();
    let mut scaled = q.clone();
    for j in 0..n {
        let s = C64::new(vals[j].max(0.0).sqrt(), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Ok(HermitianMatrix::symmetrize(scaled.mul(&q.dagger())))
}

/// Hermitian inverse via the spectral decomposition. Rejects matrices whose
/// eigenvalue spread exceeds the `1e-12` relative condition floor.
pub fn hermitian_inverse(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (vals, _) = spectral(a)?;
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let vmin = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if vmax == 0.0 || vmin <= 1e-12 * vmax {
        return Err(Error::SingularMatrix(vmin / vmax.max(f64::MIN_POSITIVE)));
    }
    eig_map(a, |v| 1.0 / v)
}

/// Left polar decomposition M = U P with U unitary and P = sqrt(M^dag M).
///
/// Computed from the spectral decomposition of M^dag M; M must be square and
/// well conditioned (smallest singular value above `1e-12` of the largest).
pub fn polar(m: &ComplexMatrix) -> Result<(ComplexMatrix, HermitianMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "polar decomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let gram = HermitianMatrix::symmetrize(m.dagger().mul(m));
    let (vals, q) = spectral(&gram)?;
    let smax = vals.first().map_or(0.0, |v| v.max(0.0)).sqrt();
    let smin = vals.last().map_or(0.0, |v| v.max(0.0)).sqrt();
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::SingularMatrix(smin / smax.max(f64::MIN_POSITIVE)));
    }
    let n = m.rows();
    // P = Q s Q^dag, U = M Q s^{-1} Q^dag.
    let mut qs = q.clone();
    let mut qsinv = q.clone();
    for j in 0..n {
        let s = vals[j].max(0.0).sqrt();
        for i in 0..n {
            qs[(i, j)] *= C64::new(s, 0.0);
            qsinv[(i, j)] *= C64::new(1.0 / s, 0.0);
        }
    }
    let p = HermitianMatrix::symmetrize(qs.mul(&q.dagger()));
    let u = m.mul(&qsinv.mul(&q.dagger()));
    Ok((u, p))
}
