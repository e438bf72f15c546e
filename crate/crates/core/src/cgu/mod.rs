//! Minimum-error measurements for codebooks built from several group orbits.
//!
//! A compound geometrically uniform codebook splits under the commutant of
//! its symmetry group: a Fourier change of basis turns the weighted Gram
//! matrix into small blocks, one per irreducible character, and the
//! Yuen-Kennedy-Lax equations reduce to one unitary unknown per block.
//! [`block_reduce`] builds that basis, [`solve_blocks_ykl`] runs a damped
//! Gauss-Newton search over the block unitaries and verifies each candidate
//! against the full optimality conditions.
//!
//! The [`reduced`] submodule solves the same equations under an entrywise
//! symmetry ansatz instead, which also covers ensembles whose symmetry group
//! has no convenient character table.

mod newton;
mod reduced;

pub use reduced::{find_fig1_subcode, symmetry_reduced_solve, Fig1Match, ReducedSolution, SymmetryPattern};

use serde::Serialize;

use crate::coherent::{gram, weighted_gram, Codebook};
use crate::error::{Error, Result};
use crate::matfun::{
    cdot, hermitian_inverse, min_eig, psd_sqrt, spectral, ComplexMatrix, HermitianMatrix, C64,
};
use crate::symmetry::{characters_from_rep, is_gram_invariant, orbits, PermutationGroup};
use crate::ykl::{verify_gram, MeasurementSolution, DEFAULT_TOL};
use newton::{gauss_newton, GaussNewtonOptions};

const BLOCK_RESIDUAL_TOL: f64 = 1e-9;
const BRANCH_CAP: usize = 256;

/// Weighted Gram matrix in a symmetry-adapted basis.
///
/// The Fourier matrix `F` is unitary and `F^dag (weighted Gram) F` is block
/// diagonal: block `lambda` appears `dim(lambda)` times, each copy of size
/// `mult(lambda)`, and the off-block residual is below `1e-9` by
/// construction.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    labels: Vec<String>,
    dims: Vec<usize>,
    blocks: Vec<HermitianMatrix>,
    fourier: ComplexMatrix,
    col_offsets: Vec<usize>,
    orbit_list: Vec<Vec<usize>>,
    gram: HermitianMatrix,
    wgram: HermitianMatrix,
    priors: Vec<f64>,
}

impl BlockSystem {
    pub fn irrep_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Copies of each block in the full matrix.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn block(&self, irrep: usize) -> &HermitianMatrix {
        &self.blocks[irrep]
    }

    pub fn blocks(&self) -> &[HermitianMatrix] {
        &self.blocks
    }

    pub fn fourier(&self) -> &ComplexMatrix {
        &self.fourier
    }

    /// Orbits of the group action on codeword indices.
    pub fn orbit_list(&self) -> &[Vec<usize>] {
        &self.orbit_list
    }

    pub fn dimension(&self) -> usize {
        self.fourier.rows()
    }

    /// Assemble the full-space matrix from one block per irrep, repeating
    /// each block `dims[irrep]` times: `F blockdiag(..) F^dag`.
    pub fn expand(&self, block_mats: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if block_mats.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} block matrices, got {}",
                self.blocks.len(),
                block_mats.len()
            )));
        }
        let n = self.dimension();
        let mut bd = ComplexMatrix::zeros(n, n);
        for (k, bm) in block_mats.iter().enumerate() {
            let m = self.blocks[k].dim();
            if bm.rows() != m || bm.cols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "block {k} should be {m}x{m}, got {}x{}",
                    bm.rows(),
                    bm.cols()
                )));
            }
            for r in 0..self.dims[k] {
                let off = self.col_offsets[k] + r * m;
                for i in 0..m {
                    for j in 0..m {
                        bd[(off + i, off + j)] = bm[(i, j)];
                    }
                }
            }
        }
        Ok(self.fourier.mul(&bd).mul(&self.fourier.dagger()))
    }
}

/// Fourier column for a one-dimensional character: entries
/// `conj(chi(g)) / sqrt(|G|)` at position `g(base)`.
fn character_column(
    group: &PermutationGroup,
    chars: &[C64],
    base: usize,
    n: usize,
) -> Vec<C64> {
    let order = group.order();
    let scale = 1.0 / (order as f64).sqrt();
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (e, g) in group.elements().iter().enumerate() {
        v[g.apply(base)] = chars[e].conj() * scale;
    }
    v
}

/// Block-diagonalize the weighted Gram matrix of `cb` in the
/// symmetry-adapted basis of `group`.
///
/// The group must act on codeword indices leaving both the Gram matrix and
/// the priors invariant. Supported actions are abelian groups with free
/// orbits and the multiplicity-free pair action of the symmetric group; the
/// rest report `UnsupportedRepresentation`.
pub fn block_reduce(cb: &Codebook, group: &PermutationGroup) -> Result<BlockSystem> {
    let n = cb.len();
    if group.degree() != n {
        return Err(Error::DimensionMismatch(format!(
            "group degree {} does not match codebook size {n}",
            group.degree()
        )));
    }
    let g = gram(cb);
    let gw = weighted_gram(cb);
    for p in group.generators() {
        if !is_gram_invariant(&g, p, BLOCK_RESIDUAL_TOL) {
            return Err(Error::GramNotInvariant);
        }
        if !is_gram_invariant(&gw, p, BLOCK_RESIDUAL_TOL) {
            // Gram passed, so the priors must vary along an orbit.
            return Err(Error::GramNotInvariant);
        }
    }

    let rep = characters_from_rep(group)?;
    let od = orbits(group);
    let k = rep.irrep_count();

    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut col_offsets = Vec::with_capacity(k);

    if rep.dims().iter().all(|&d| d == 1) {
        // Abelian path: one column per (character, orbit); needs free orbits
        // so every orbit carries the regular representation.
        for orbit in od.orbits() {
            if orbit.len() != group.order() {
                return Err(Error::UnsupportedRepresentation(format!(
                    "orbit of size {} under a group of order {} (free orbits required)",
                    orbit.len(),
                    group.order()
                )));
            }
        }
        for irrep in 0..k {
            col_offsets.push(columns.len());
            for orbit in od.orbits() {
                columns.push(character_column(group, rep.char_values(irrep), orbit[0], n));
            }
        }
    } else if rep.mults().iter().all(|&m| m == 1) {
        // Multiplicity-free path: orthonormalize projected axis vectors
        // inside each isotypic component.
        for irrep in 0..k {
            col_offsets.push(columns.len());
            let p = rep.projector(irrep).mat();
            let mut found: Vec<Vec<C64>> = Vec::new();
            for b in 0..n {
                if found.len() == rep.dim(irrep) {
                    break;
                }
                let mut v = p.col(b);
                for u in &found {
                    let c = cdot(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= c * ui;
                    }
                }
                let norm = cdot(&v, &v).re.sqrt();
                if norm > 1e-8 {
                    for vi in v.iter_mut() {
                        *vi /= norm;
                    }
                    found.push(v);
                }
            }
            if found.len() != rep.dim(irrep) {
                return Err(Error::UnsupportedRepresentation(format!(
                    "isotypic component {} spans {} directions, expected {}",
                    rep.label(irrep),
                    found.len(),
                    rep.dim(irrep)
                )));
            }
            columns.extend(found);
        }
    } else {
        return Err(Error::UnsupportedRepresentation(
            "blocks need dimension one or multiplicity one per character".into(),
        ));
    }

    if columns.len() != n {
        return Err(Error::UnsupportedRepresentation(format!(
            "symmetry-adapted basis has {} columns for dimension {n}",
            columns.len()
        )));
    }

    let mut fourier = ComplexMatrix::zeros(n, n);
    for (j, v) in columns.iter().enumerate() {
        fourier.set_col(j, v);
    }
    let ur = fourier.unitarity_residual();
    if ur > BLOCK_RESIDUAL_TOL {
        return Err(Error::UnsupportedRepresentation(format!(
            "symmetry-adapted basis is not unitary (residual {ur:.3e})"
        )));
    }

    // Blocks from the first copy of each irrep, then check the whole
    // conjugated matrix against the promised block-diagonal form.
    let conj = fourier.dagger().mul(gw.mat()).mul(&fourier);
    let mut blocks = Vec::with_capacity(k);
    let mut mults = Vec::with_capacity(k);
    for irrep in 0..k {
        let m = rep.mult(irrep);
        let off = col_offsets[irrep];
        let block = ComplexMatrix::from_fn(m, m, |i, j| conj[(off + i, off + j)]);
        blocks.push(HermitianMatrix::symmetrize(block));
        mults.push(m);
    }

    let dims = rep.dims().to_vec();
    let mut residual = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            let (ip, rp, sp) = locate_column(&col_offsets, &dims, &mults, p);
            let (iq, rq, sq) = locate_column(&col_offsets, &dims, &mults, q);
            let expected = if ip == iq && rp == rq {
                blocks[ip].mat()[(sp, sq)]
            } else {
                C64::new(0.0, 0.0)
            };
            residual = residual.max((conj[(p, q)] - expected).norm());
        }
    }
    if residual > BLOCK_RESIDUAL_TOL {
        return Err(Error::UnsupportedRepresentation(format!(
            "block reduction residual {residual:.3e} exceeds {BLOCK_RESIDUAL_TOL:.0e}"
        )));
    }

    Ok(BlockSystem {
        labels: rep.labels().to_vec(),
        dims,
        blocks,
        fourier,
        col_offsets,
        orbit_list: od.orbits().to_vec(),
        gram: g,
        wgram: gw,
        priors: cb.priors().to_vec(),
    })
}

fn locate_column(
    col_offsets: &[usize],
    dims: &[usize],
    mults: &[usize],
    col: usize,
) -> (usize, usize, usize) {
    let mut irrep = col_offsets.len() - 1;
    for (i, &off) in col_offsets.iter().enumerate() {
        if col < off {
            irrep = i - 1;
            break;
        }
    }
    let local = col - col_offsets[irrep];
    let m = mults[irrep];
    debug_assert!(local < dims[irrep] * m);
    (irrep, local / m, local % m)
}

/// Per-branch bookkeeping from [`solve_blocks_ykl_detailed`].
#[derive(Debug, Clone, Serialize)]
pub struct SolveDiagnostics {
    pub branches_total: usize,
    pub branches_converged: usize,
    pub branches_passing: usize,
    pub chosen_branch: usize,
    pub eq2_residual: f64,
    pub ineq_min_eig: f64,
    pub iterations: usize,
}

struct BlockClass {
    members: Vec<usize>,
    m: usize,
    sqrt_block: ComplexMatrix,
    real: bool,
    param_offset: usize,
    param_count: usize,
}

fn givens(m: usize, i: usize, j: usize, theta: f64) -> ComplexMatrix {
    let mut g = ComplexMatrix::identity(m);
    let (c, s) = (theta.cos(), theta.sin());
    g[(i, i)] = C64::new(c, 0.0);
    g[(j, j)] = C64::new(c, 0.0);
    g[(i, j)] = C64::new(-s, 0.0);
    g[(j, i)] = C64::new(s, 0.0);
    g
}

fn exp_i_hermitian(h: &HermitianMatrix) -> Result<ComplexMatrix> {
    let (vals, q) = spectral(h)?;
    let n = h.dim();
    let mut scaled = q.clone();
    for j in 0..n {
        let phase = C64::from_polar(1.0, vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled.mul(&q.dagger()))
}

impl BlockClass {
    /// `V = diag(signs) * rotation(params)`, unitary by construction.
    fn unitary(&self, params: &[f64], signs: &[i8]) -> ComplexMatrix {
        let m = self.m;
        let mut v = if self.real {
            let mut rot = ComplexMatrix::identity(m);
            let mut idx = 0;
            for i in 0..m {
                for j in (i + 1)..m {
                    rot = rot.mul(&givens(m, i, j, params[idx]));
                    idx += 1;
                }
            }
            rot
        } else {
            let mut h = ComplexMatrix::zeros(m, m);
            for i in 0..m {
                h[(i, i)] = C64::new(params[i], 0.0);
            }
            let mut idx = m;
            for i in 0..m {
                for j in (i + 1)..m {
                    h[(i, j)] = C64::new(params[idx], params[idx + 1]);
                    h[(j, i)] = h[(i, j)].conj();
                    idx += 2;
                }
            }
            exp_i_hermitian(&HermitianMatrix::symmetrize(h)).expect("small Hermitian exponential")
        };
        for i in 0..m {
            if signs[i] < 0 {
                for j in 0..m {
                    let x = v[(i, j)];
                    v[(i, j)] = -x;
                }
            }
        }
        v
    }
}

/// Sign seeds for one class: both signs for scalars, first entry pinned
/// positive for larger blocks (a global flip is a rotation away).
fn class_sign_options(m: usize) -> Vec<Vec<i8>> {
    if m == 1 {
        return vec![vec![1], vec![-1]];
    }
    let free = m - 1;
    let mut out = Vec::with_capacity(1 << free);
    for mask in 0..(1usize << free) {
        let mut s = vec![1i8; m];
        for b in 0..free {
            if mask >> b & 1 == 1 {
                s[1 + b] = -1;
            }
        }
        out.push(s);
    }
    out
}

/// Solve the Yuen-Kennedy-Lax equations block by block.
///
/// Every candidate factorization `X_lambda = V_lambda sqrt(Gamma_lambda)`
/// satisfies the first condition exactly; the Gauss-Newton iteration drives
/// the second condition's residuals to zero over the block unitaries, seeded
/// from the pretty good measurement and from diagonal sign flips. Branches
/// are verified against the full conditions; the lowest error probability
/// that passes wins, ties broken by branch order.
pub fn solve_blocks_ykl(bs: &BlockSystem, priors: &[f64]) -> Result<MeasurementSolution> {
    solve_blocks_ykl_detailed(bs, priors).map(|(sol, _)| sol)
}

/// [`solve_blocks_ykl`] plus branch statistics for logging and CLI output.
pub fn solve_blocks_ykl_detailed(
    bs: &BlockSystem,
    priors: &[f64],
) -> Result<(MeasurementSolution, SolveDiagnostics)> {
    let n = bs.dimension();
    if priors.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} priors for a {n}-state block system",
            priors.len()
        )));
    }
    if priors
        .iter()
        .zip(&bs.priors)
        .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::InvalidParameter(
            "priors do not match the ones the block system was built from".into(),
        ));
    }

    // positive definite blocks or the unitary factor is not determined
    let scale = bs
        .blocks
        .iter()
        .fold(0.0f64, |m, b| m.max(b.mat().max_abs()))
        .max(1e-300);
    for b in &bs.blocks {
        let me = min_eig(b)?;
        if me <= 1e-10 * scale {
            return Err(Error::LinearDependence(me / scale));
        }
    }

    // share one unitary across numerically identical blocks
    let mut classes: Vec<BlockClass> = Vec::new();
    for (idx, b) in bs.blocks.iter().enumerate() {
        let mut assigned = false;
        for c in classes.iter_mut() {
            if bs.blocks[c.members[0]].mat().max_abs_diff(b.mat()) <= 1e-12 {
                c.members.push(idx);
                assigned = true;
                break;
            }
        }
        if !assigned {
            let m = b.dim();
            let real = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .all(|(i, j)| b.mat()[(i, j)].im.abs() <= 1e-12);
            classes.push(BlockClass {
                members: vec![idx],
                m,
                sqrt_block: psd_sqrt(b)?.into_mat(),
                real,
                param_offset: 0,
                param_count: if real { m * (m - 1) / 2 } else { m * m },
            });
        }
    }
    let mut total_params = 0;
    for c in classes.iter_mut() {
        c.param_offset = total_params;
        total_params += c.param_count;
    }

    // branch seeds: Cartesian product of per-class sign choices
    let options: Vec<Vec<Vec<i8>>> = classes.iter().map(|c| class_sign_options(c.m)).collect();
    let total: usize = options.iter().map(|o| o.len()).product();
    let branch_count = total.min(BRANCH_CAP);
    if total > BRANCH_CAP {
        log::warn!("{total} sign branches, truncating to {BRANCH_CAP}");
    }
    let branch_signs = |mut b: usize| -> Vec<&Vec<i8>> {
        let mut out = Vec::with_capacity(classes.len());
        for opts in options.iter().rev() {
            out.push(&opts[b % opts.len()]);
            b /= opts.len();
        }
        out.reverse();
        out
    };

    let class_of: Vec<usize> = {
        let mut map = vec![0usize; bs.blocks.len()];
        for (ci, c) in classes.iter().enumerate() {
            for &m in &c.members {
                map[m] = ci;
            }
        }
        map
    };

    let build_x = |params: &[f64], signs: &[&Vec<i8>]| -> ComplexMatrix {
        let block_mats: Vec<ComplexMatrix> = (0..bs.blocks.len())
            .map(|irrep| {
                let c = &classes[class_of[irrep]];
                let v = c.unitary(
                    &params[c.param_offset..c.param_offset + c.param_count],
                    signs[class_of[irrep]],
                );
                v.mul(&c.sqrt_block)
            })
            .collect();
        bs.expand(&block_mats).expect("block shapes fixed above")
    };

    let s = psd_sqrt(&bs.gram)?.into_mat();
    let mut m_mat = s.clone();
    for j in 0..n {
        let w = C64::new(priors[j].sqrt(), 0.0);
        for i in 0..n {
            m_mat[(i, j)] *= w;
        }
    }
    let gw_inv = hermitian_inverse(&bs.wgram)?;

    let opts = GaussNewtonOptions::default();
    let mut converged = 0usize;
    let mut passing = 0usize;
    let mut best: Option<(f64, usize, MeasurementSolution, f64, f64, usize)> = None;
    let mut best_residual = f64::INFINITY;

    for branch in 0..branch_count {
        let signs = branch_signs(branch);
        let mut residual_fn = |params: &[f64]| -> Vec<f64> {
            let x = build_x(params, &signs);
            let mut r = Vec::with_capacity(n * (n - 1) * 2);
            for k in 0..n {
                for mi in 0..n {
                    if k == mi {
                        continue;
                    }
                    let v = x[(k, mi)] * x[(mi, mi)].conj() - x[(k, k)] * x[(mi, k)].conj();
                    r.push(v.re);
                    r.push(v.im);
                }
            }
            r
        };
        let run = gauss_newton(&mut residual_fn, vec![0.0; total_params], &opts)?;
        best_residual = best_residual.min(run.residual_inf);
        if !run.converged {
            continue;
        }
        converged += 1;

        let x = build_x(&run.params, &signs);
        let w = m_mat.mul(gw_inv.mat()).mul(&x.dagger());
        let sol = MeasurementSolution::from_parts(x, w, priors)?;
        let report = verify_gram(&bs.gram, &bs.wgram, priors, &sol, DEFAULT_TOL)?;
        if !report.pass {
            continue;
        }
        passing += 1;
        let pe = sol.error_probability();
        if best.as_ref().is_none_or(|(bp, ..)| pe < *bp) {
            best = Some((
                pe,
                branch,
                sol,
                report.eq2_residual,
                report.ineq_min_eig,
                run.iterations,
            ));
        }
    }

    match best {
        Some((_, branch, sol, eq2, ineq, iterations)) => Ok((
            sol,
            SolveDiagnostics {
                branches_total: branch_count,
                branches_converged: converged,
                branches_passing: passing,
                chosen_branch: branch,
                eq2_residual: eq2,
                ineq_min_eig: ineq,
                iterations,
            },
        )),
        None if converged == 0 => Err(Error::SolveFailed(format!(
            "no branch converged out of {branch_count} (best residual {best_residual:.3e})"
        ))),
        None => Err(Error::NoValidBranch(branch_count)),
    }
}

/// Closed-form optimal success probability for phase-coded pulse position
/// modulation with alternating amplitudes `alpha`, `beta` over `n` slots.
///
/// Certified only where it has been checked against the block solver:
/// equal moduli with a real relative phase, which pins `beta = -alpha`
/// since equal amplitudes are rejected as degenerate.
pub fn pcppm_mpe_ps(n: usize, alpha: C64, beta: C64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two pulse positions, got {n}"
        )));
    }
    let sep = (alpha - beta).norm();
    if sep <= 1e-12 * (1.0 + alpha.norm() + beta.norm()) {
        return Err(Error::InvalidParameter(
            "identical amplitudes make the codebook degenerate".into(),
        ));
    }
    let cross = alpha.conj() * beta;
    if (alpha.norm() - beta.norm()).abs() > 1e-9 * (1.0 + alpha.norm())
        || cross.im.abs() > 1e-9 * (1.0 + cross.norm())
    {
        return Err(Error::FormulaDomain(
            "pcppm closed form needs equal moduli and a real relative phase".into(),
        ));
    }

    let nf = n as f64;
    let na = alpha.norm_sqr();
    let nb = beta.norm_sqr();
    let e1 = (-na).exp();
    let e2 = (-(alpha - beta).norm_sqr() / 2.0).exp();
    let e3 = (-(na + nb) / 2.0).exp();
    let radicands = [
        1.0 + (nf - 1.0) * e1 + e2 + (nf - 1.0) * e3,
        1.0 + (nf - 1.0) * e1 - e2 - (nf - 1.0) * e3,
        1.0 - e1 + e2 - e3,
        1.0 - e1 - e2 + e3,
    ];
    for r in radicands {
        if r < -1e-12 {
            return Err(Error::FormulaDomain(format!("negative radicand {r:.3e}")));
        }
    }
    let root = |r: f64| r.max(0.0).sqrt();
    let total = root(radicands[0])
        + root(radicands[1])
        + (nf - 1.0) * (root(radicands[2]) + root(radicands[3]));
    Ok(total * total / (4.0 * nf * nf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{pcppm_codebook, ppm_codebook, two_pulse_ppm_codebook};
    use crate::gu;
    use crate::symmetry::{cyclic_group, symmetric_group_on_pairs, two_orbit_cyclic_group};
    use crate::ykl::verify;
    use num_complex::Complex64;

    fn real(x: f64) -> C64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn pcppm_blocks_match_circulant_eigenvalue_formulas() {
        let (n, alpha, beta) = (4usize, real(0.8), real(-0.3));
        let cb = pcppm_codebook(n, alpha, beta).unwrap();
        let group = two_orbit_cyclic_group(n).unwrap();
        let bs = block_reduce(&cb, &group).unwrap();

        assert_eq!(bs.irrep_count(), n);
        assert_eq!(bs.dims(), &[1, 1, 1, 1]);
        assert_eq!(bs.orbit_list().len(), 2);
        assert_eq!(bs.dimension(), 2 * n);

        let na = alpha.norm_sqr();
        let nb = beta.norm_sqr();
        let overlap = (alpha.conj() * beta - real((na + nb) / 2.0)).exp().re;
        let e3 = (-(na + nb) / 2.0f64).exp();
        let nf = n as f64;
        let scale = 2.0 * nf; // weighted blocks carry the 1/(2n) prior

        let b0 = bs.block(0).mat();
        assert!((b0[(0, 0)].re * scale - (1.0 + (nf - 1.0) * (-na).exp())).abs() < 1e-9);
        assert!((b0[(1, 1)].re * scale - (1.0 + (nf - 1.0) * (-nb).exp())).abs() < 1e-9);
        let c = overlap + (nf - 1.0) * e3;
        assert!((b0[(0, 1)].re * scale - c).abs() < 1e-9);
        // frozen prototype values for this exact parameter point
        assert!((b0[(0, 0)].re * scale - 2.581877).abs() < 1e-5);
        assert!((b0[(1, 1)].re * scale - 3.741794).abs() < 1e-5);
        assert!((b0[(0, 1)].re * scale - 2.628664).abs() < 1e-5);

        let d = overlap - e3;
        for irrep in 1..n {
            let b = bs.block(irrep).mat();
            assert!((b[(0, 0)].re * scale - (1.0 - (-na).exp())).abs() < 1e-9);
            assert!((b[(1, 1)].re * scale - (1.0 - (-nb).exp())).abs() < 1e-9);
            assert!((b[(0, 1)].re * scale - d).abs() < 1e-9);
            assert!(b[(0, 1)].im.abs() < 1e-9);
        }

        // round trip: expanding the blocks rebuilds the weighted Gram
        let mats: Vec<ComplexMatrix> = bs.blocks().iter().map(|b| b.mat().clone()).collect();
        let back = bs.expand(&mats).unwrap();
        assert!(back.max_abs_diff(bs.wgram.mat()) < 1e-12);
    }

    #[test]
    fn single_orbit_input_degenerates_to_the_pgm() {
        let alpha = real(1.0);
        let cb = ppm_codebook(5, alpha).unwrap();
        let group = cyclic_group(5).unwrap();
        let bs = block_reduce(&cb, &group).unwrap();
        assert!(bs.blocks().iter().all(|b| b.dim() == 1));

        let (sol, diag) = solve_blocks_ykl_detailed(&bs, cb.priors()).unwrap();
        let pgm = gu::pgm(&cb).unwrap();
        assert!((sol.error_probability() - pgm.error_probability()).abs() < 1e-12);

        // entrywise match after aligning each state's column phase
        let n = cb.len();
        for j in 0..n {
            let mut phase = C64::new(1.0, 0.0);
            for i in 0..n {
                if sol.x()[(i, j)].norm() > 1e-6 {
                    phase = pgm.x()[(i, j)] / sol.x()[(i, j)];
                    phase /= phase.norm();
                    break;
                }
            }
            for i in 0..n {
                assert!((sol.x()[(i, j)] * phase - pgm.x()[(i, j)]).norm() < 1e-9);
            }
        }
        // the four nontrivial circulant eigenvalues coincide, so sign
        // branches come from two block classes only
        assert_eq!(diag.branches_total, 4);
        assert!(diag.ineq_min_eig > -1e-8);
    }

    #[test]
    fn pair_orbit_blocks_are_the_isotypic_overlaps() {
        let cb = two_pulse_ppm_codebook(5, real(0.9)).unwrap();
        let group = symmetric_group_on_pairs(5).unwrap();
        let bs = block_reduce(&cb, &group).unwrap();

        let psi = crate::ykl::state_coordinates(&cb).unwrap().col(0);
        let rep = characters_from_rep(&group).unwrap();
        let iso = gu::isotypic_overlaps(&psi, &rep).unwrap();
        for (irrep, b) in bs.blocks().iter().enumerate() {
            assert_eq!(b.dim(), 1);
            let expected = iso.overlaps()[irrep] / rep.dim(irrep) as f64;
            assert!((b.mat()[(0, 0)].re - expected).abs() < 1e-9);
        }

        let sol = solve_blocks_ykl(&bs, cb.priors()).unwrap();
        let ps = gu::two_pulse_ppm_mpe_ps(5, 0.81).unwrap();
        assert!((sol.error_probability() - (1.0 - ps)).abs() < 1e-9);
    }

    #[test]
    fn two_amplitude_solver_beats_the_pgm() {
        let cb = pcppm_codebook(4, real(0.8), real(-0.3)).unwrap();
        let group = two_orbit_cyclic_group(4).unwrap();
        let bs = block_reduce(&cb, &group).unwrap();
        let (sol, diag) = solve_blocks_ykl_detailed(&bs, cb.priors()).unwrap();

        assert!((sol.error_probability() - 0.450603525).abs() < 5e-7);
        let pgm = gu::pgm(&cb).unwrap();
        assert!((pgm.error_probability() - 0.454075).abs() < 5e-5);
        assert!(sol.error_probability() <= pgm.error_probability() + 1e-10);

        let report = verify(&cb, &sol, DEFAULT_TOL).unwrap();
        assert!(report.pass);
        assert!(diag.branches_passing >= 1);
        assert!(diag.chosen_branch < diag.branches_total);
    }

    #[test]
    fn closed_form_matches_the_block_solver() {
        for nbar in [0.5f64, 1.5] {
            let alpha = real(nbar.sqrt());
            let cb = pcppm_codebook(4, alpha, -alpha).unwrap();
            let group = two_orbit_cyclic_group(4).unwrap();
            let bs = block_reduce(&cb, &group).unwrap();
            let sol = solve_blocks_ykl(&bs, cb.priors()).unwrap();
            let ps = pcppm_mpe_ps(4, alpha, -alpha).unwrap();
            assert!(
                (ps - (1.0 - sol.error_probability())).abs() < 1e-8,
                "nbar {nbar}: formula {ps} vs solver {}",
                1.0 - sol.error_probability()
            );
        }
    }

    #[test]
    fn complex_amplitude_pair_still_solves() {
        let (alpha, beta) = (Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.4));
        let cb = pcppm_codebook(3, alpha, beta).unwrap();
        let group = two_orbit_cyclic_group(3).unwrap();
        let bs = block_reduce(&cb, &group).unwrap();
        assert!(bs
            .blocks()
            .iter()
            .any(|b| b.mat()[(0, 1)].im.abs() > 1e-6));

        let sol = solve_blocks_ykl(&bs, cb.priors()).unwrap();
        let report = verify(&cb, &sol, DEFAULT_TOL).unwrap();
        assert!(report.pass, "{report:?}");
        let pgm = gu::pgm(&cb).unwrap();
        assert!(sol.error_probability() <= pgm.error_probability() + 1e-10);
    }

    #[test]
    fn degenerate_and_off_domain_inputs_are_rejected() {
        let alpha = real(0.7);
        assert!(matches!(
            pcppm_mpe_ps(4, alpha, alpha),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            pcppm_mpe_ps(1, alpha, -alpha),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            pcppm_mpe_ps(4, real(0.8), real(-0.3)),
            Err(Error::FormulaDomain(_))
        ));
        assert!(matches!(
            pcppm_mpe_ps(4, real(1.0), Complex64::new(0.0, 1.0)),
            Err(Error::FormulaDomain(_))
        ));

        // equal amplitudes collapse the trivial block
        let cb = pcppm_codebook(4, alpha, alpha).unwrap();
        let group = two_orbit_cyclic_group(4).unwrap();
        let bs = block_reduce(&cb, &group).unwrap();
        assert!(matches!(
            solve_blocks_ykl(&bs, cb.priors()),
            Err(Error::LinearDependence(_))
        ));
    }

    #[test]
    fn mismatched_priors_are_rejected() {
        let cb = pcppm_codebook(3, real(0.8), real(-0.8)).unwrap();
        let group = two_orbit_cyclic_group(3).unwrap();
        let bs = block_reduce(&cb, &group).unwrap();
        let skew = vec![0.5, 0.1, 0.1, 0.1, 0.1, 0.1];
        assert!(matches!(
            solve_blocks_ykl(&bs, &skew),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            solve_blocks_ykl(&bs, &[0.5, 0.5]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn wrong_group_is_rejected() {
        let cb = pcppm_codebook(4, real(0.8), real(-0.3)).unwrap();
        let group = cyclic_group(8).unwrap();
        assert!(matches!(
            block_reduce(&cb, &group),
            Err(Error::GramNotInvariant)
        ));
        let small = cyclic_group(4).unwrap();
        assert!(matches!(
            block_reduce(&cb, &small),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
