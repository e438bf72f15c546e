//! Pretty good measurement, plus the closed forms available when a group
//! acts transitively on the codebook (geometrically uniform sets): isotypic
//! overlaps of the seed state, the optimal measurement vector, and the PPM
//! and two-pulse PPM error formulas.

use crate::coherent::{gram, weighted_gram, Codebook};
use crate::error::{Error, Result};
use crate::matfun::{cdot, polar, psd_sqrt, spectral, C64};
use crate::symmetry::{DoubleCoset, PermutationGroup, RepresentationData};
use crate::util::binomial;
use crate::ykl::MeasurementSolution;

/// Relative eigenvalue floor below which a Gram matrix is treated as
/// rank-deficient.
const RANK_TOL: f64 = 1e-12;

/// Squared overlap of the seed state with each isotypic component.
#[derive(Clone, Debug)]
pub struct IsotypicOverlaps {
    labels: Vec<String>,
    dims: Vec<usize>,
    overlaps: Vec<f64>,
}

impl IsotypicOverlaps {
    fn new(labels: Vec<String>, dims: Vec<usize>, overlaps: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = overlaps.iter().find(|&&o| o < -1e-12) {
            return Err(Error::InvalidParameter(format!(
                "negative isotypic overlap {bad:.3e}"
            )));
        }
        let total: f64 = overlaps.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "isotypic overlaps sum to {total}, expected 1 (state not normalized?)"
            )));
        }
        Ok(IsotypicOverlaps { labels, dims, overlaps })
    }

    pub fn len(&self) -> usize {
        self.overlaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.overlaps.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn overlaps(&self) -> &[f64] {
        &self.overlaps
    }
}

/// The pretty good measurement of an arbitrary ensemble, computed through
/// the polar decomposition of sqrt(Γ) diag(sqrt p): the positive factor is
/// the solution matrix X, the unitary factor the measurement basis.
pub fn pgm(cb: &Codebook) -> Result<MeasurementSolution> {
    let wg = weighted_gram(cb);
    let (eigs, _) = spectral(&wg)?;
    let max = eigs.first().copied().unwrap_or(0.0);
    let min = eigs.last().copied().unwrap_or(0.0);
    if min <= RANK_TOL * max.max(1.0) {
        return Err(Error::LinearDependence(min));
    }
    let s = psd_sqrt(&gram(cb))?.into_mat();
    let n = cb.len();
    let mut m = s;
    for j in 0..n {
        let root = cb.priors()[j].sqrt();
        for i in 0..n {
            m[(i, j)] *= root;
        }
    }
    let (u, p) = polar(&m)?;
    MeasurementSolution::from_parts(p.into_mat(), u, cb.priors())
}

/// Overlaps of a normalized state with each isotypic projector.
pub fn isotypic_overlaps(psi: &[C64], rep: &RepresentationData) -> Result<IsotypicOverlaps> {
    if psi.len() != rep.degree() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs representation degree {}",
            psi.len(),
            rep.degree()
        )));
    }
    let overlaps = rep
        .projectors()
        .iter()
        .map(|p| {
            let image = p.mat().mulvec(psi);
            let o = cdot(psi, &image);
            debug_assert!(o.im.abs() < 1e-10);
            o.re
        })
        .collect();
    IsotypicOverlaps::new(rep.labels().to_vec(), rep.dims().to_vec(), overlaps)
}

/// Same overlaps evaluated through double cosets of the seed stabilizer:
/// o_λ = (d_λ/|S|) Σ_i χ_λ(C_i) <ψ|U(g_i)|ψ>, with χ_λ(C_i) the
/// per-|G0| character sum and |S| = [G : G0] the orbit size. Valid when ψ
/// is invariant under `g0`.
pub fn isotypic_overlaps_via_cosets(
    psi: &[C64],
    rep: &RepresentationData,
    group: &PermutationGroup,
    g0: &PermutationGroup,
    cosets: &[DoubleCoset],
) -> Result<IsotypicOverlaps> {
    if psi.len() != rep.degree() || group.degree() != rep.degree() {
        return Err(Error::DimensionMismatch(
            "state, representation and group dimensions must agree".into(),
        ));
    }
    let setsize = (group.order() / g0.order()) as f64;
    // <ψ|U(g_i)|ψ> for each double coset representative
    let rep_overlaps: Vec<C64> = cosets
        .iter()
        .map(|c| {
            let g = c.representative();
            let mut image = vec![C64::new(0.0, 0.0); psi.len()];
            for (k, &v) in psi.iter().enumerate() {
                image[g.apply(k)] = v;
            }
            cdot(psi, &image)
        })
        .collect();
    let mut overlaps = Vec::with_capacity(rep.irrep_count());
    for lam in 0..rep.irrep_count() {
        let mut acc = C64::new(0.0, 0.0);
        for (i, coset) in cosets.iter().enumerate() {
            acc += rep_overlaps[i]
                * crate::symmetry::characters::double_coset_char_sum_complex(
                    rep, lam, coset, g0,
                );
        }
        debug_assert!(acc.im.abs() < 1e-9);
        overlaps.push(rep.dim(lam) as f64 / setsize * acc.re);
    }
    IsotypicOverlaps::new(rep.labels().to_vec(), rep.dims().to_vec(), overlaps)
}

/// The measurement seed vector w = Σ_λ sqrt(d_λ/|S|) P_λ ψ / sqrt(o_λ).
/// Components with vanishing overlap contribute nothing and are skipped
/// (logged); the result is renormalized in that case.
pub fn gu_optimal_vector(psi: &[C64], rep: &RepresentationData) -> Result<Vec<C64>> {
    let overlaps = isotypic_overlaps(psi, rep)?;
    let setsize = rep.degree() as f64;
    let mut w = vec![C64::new(0.0, 0.0); psi.len()];
    for (lam, &o) in overlaps.overlaps().iter().enumerate() {
        if o <= 1e-12 {
            log::info!(
                "isotypic component {} carries no overlap; skipped",
                rep.label(lam)
            );
            continue;
        }
        let coeff = (rep.dim(lam) as f64 / setsize).sqrt() / o.sqrt();
        let image = rep.projector(lam).mat().mulvec(psi);
        for (k, v) in image.into_iter().enumerate() {
            w[k] += v * coeff;
        }
    }
    let norm = cdot(&w, &w).re.sqrt();
    if norm < 1e-12 {
        return Err(Error::SolveFailed("optimal vector vanished".into()));
    }
    for v in &mut w {
        *v /= norm;
    }
    Ok(w)
}

/// Success probability of the optimal measurement on a GU set:
/// P_s = (Σ_λ sqrt(d_λ o_λ))² / |S|.
pub fn gu_success_probability(overlaps: &IsotypicOverlaps, setsize: usize) -> f64 {
    let root_sum: f64 = overlaps
        .dims()
        .iter()
        .zip(overlaps.overlaps())
        .map(|(&d, &o)| (d as f64 * o.max(0.0)).sqrt())
        .sum();
    root_sum * root_sum / setsize as f64
}

/// Minimum error probability for N-ary PPM at mean photon number n̄:
/// P_e = ((N−1)/N²) [sqrt(1+(N−1)κ²) − sqrt(1−κ²)]², κ² = e^{−n̄}.
pub fn ppm_mpe_pe(n: usize, nbar: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("PPM needs N >= 2, got {n}")));
    }
    if nbar < 0.0 || nbar.is_nan() {
        return Err(Error::InvalidParameter(format!("mean photon number {nbar} out of range")));
    }
    let k2 = (-nbar).exp();
    let nf = n as f64;
    let diff = (1.0 + (nf - 1.0) * k2).sqrt() - (1.0 - k2).sqrt();
    Ok((nf - 1.0) / (nf * nf) * diff * diff)
}

/// Optimal success probability for two-pulse PPM (codewords = pulse pairs):
/// P_s = [(sqrt(r_a) + (N−1) sqrt(r_b) + (C(N,2)−N) sqrt(r_c)) / C(N,2)]²
/// with radicands r_λ = 1 + χ_λ(C_1)κ² + χ_λ(C_2)κ⁴ and κ² = e^{−n̄},
/// n̄ the per-pulse mean photon number.
pub fn two_pulse_ppm_mpe_ps(n: usize, nbar: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "two-pulse PPM needs N >= 4, got {n}"
        )));
    }
    if nbar < 0.0 || nbar.is_nan() {
        return Err(Error::InvalidParameter(format!("mean photon number {nbar} out of range")));
    }
    let k2 = (-nbar).exp();
    let k4 = k2 * k2;
    let nf = n as f64;
    let r_a = 1.0 + 2.0 * (nf - 2.0) * k2 + binomial(n - 2, 2) as f64 * k4;
    let r_b = 1.0 + (nf - 4.0) * k2 - (nf - 3.0) * k4;
    let r_c = 1.0 - 2.0 * k2 + k4;
    for r in [r_a, r_b, r_c] {
        if r < -1e-12 {
            return Err(Error::FormulaDomain(format!(
                "negative radicand {r:.3e} at N={n}, nbar={nbar}"
            )));
        }
    }
    let pairs = binomial(n, 2) as f64;
    let total = r_a.max(0.0).sqrt()
        + (nf - 1.0) * r_b.max(0.0).sqrt()
        + (pairs - nf) * r_c.max(0.0).sqrt();
    Ok((total / pairs) * (total / pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{ppm_codebook, two_pulse_ppm_codebook};
    use crate::symmetry::{
        characters_from_rep, cyclic_group, double_cosets, symmetric_group_on_pairs,
    };
    use crate::ykl::{state_coordinates, verify, DEFAULT_TOL};

    #[test]
    fn pgm_on_orthogonal_states_always_succeeds() {
        let cb = ppm_codebook(4, C64::new(20.0, 0.0)).unwrap();
        let sol = pgm(&cb).unwrap();
        assert!((sol.error_probability()).abs() < 1e-9);
    }

    #[test]
    fn pgm_matches_binary_ppm_closed_form() {
        for nbar in [0.1f64, 0.5, 1.0, 2.0] {
            let cb = ppm_codebook(2, C64::new(nbar.sqrt(), 0.0)).unwrap();
            let sol = pgm(&cb).unwrap();
            let k4 = (-2.0 * nbar).exp();
            let expect = 0.5 * (1.0 + (1.0 - k4).sqrt());
            assert!((1.0 - sol.error_probability() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn pgm_rejects_dependent_codewords() {
        let w = crate::coherent::CoherentCodeword::new(vec![C64::new(0.5, 0.0)]).unwrap();
        let cb = Codebook::with_equal_priors(vec![w.clone(), w]).unwrap();
        assert!(matches!(pgm(&cb), Err(Error::LinearDependence(_))));
    }

    #[test]
    fn pgm_diagonal_is_constant_on_gu_sets() {
        for cb in [
            ppm_codebook(6, C64::new(0.8, 0.0)).unwrap(),
            two_pulse_ppm_codebook(5, C64::new(0.6, 0.0)).unwrap(),
        ] {
            let sol = pgm(&cb).unwrap();
            let x = sol.x();
            let d0 = x[(0, 0)];
            for i in 1..cb.len() {
                assert!((x[(i, i)] - d0).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pgm_certifies_on_two_pulse_ppm() {
        let cb = two_pulse_ppm_codebook(5, C64::new(1.0, 0.0)).unwrap();
        let sol = pgm(&cb).unwrap();
        let report = verify(&cb, &sol, DEFAULT_TOL).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn ppm_overlaps_are_circulant_eigenvalues() {
        let n = 6;
        let nbar = 1.3f64;
        let cb = ppm_codebook(n, C64::new(nbar.sqrt(), 0.0)).unwrap();
        let rep = characters_from_rep(&cyclic_group(n).unwrap()).unwrap();
        let s = state_coordinates(&cb).unwrap();
        let psi = s.col(0);
        let overlaps = isotypic_overlaps(&psi, &rep).unwrap();
        let k2 = (-nbar).exp();
        let nf = n as f64;
        assert!((overlaps.overlaps()[0] - (1.0 + (nf - 1.0) * k2) / nf).abs() < 1e-10);
        for lam in 1..n {
            assert!((overlaps.overlaps()[lam] - (1.0 - k2) / nf).abs() < 1e-10);
        }
    }

    #[test]
    fn overlap_routes_agree_on_ppm() {
        let n = 6;
        let cb = ppm_codebook(n, C64::new(0.9, 0.0)).unwrap();
        let group = cyclic_group(n).unwrap();
        let rep = characters_from_rep(&group).unwrap();
        let psi = state_coordinates(&cb).unwrap().col(0);
        let direct = isotypic_overlaps(&psi, &rep).unwrap();
        let g0 = group.point_stabilizer(0);
        let cosets = double_cosets(&group, &g0).unwrap();
        let via = isotypic_overlaps_via_cosets(&psi, &rep, &group, &g0, &cosets).unwrap();
        for (a, b) in direct.overlaps().iter().zip(via.overlaps()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn overlap_routes_agree_on_two_pulse_ppm() {
        let n = 5;
        let cb = two_pulse_ppm_codebook(n, C64::new(0.8, 0.0)).unwrap();
        let group = symmetric_group_on_pairs(n).unwrap();
        let rep = characters_from_rep(&group).unwrap();
        let psi = state_coordinates(&cb).unwrap().col(0);
        let direct = isotypic_overlaps(&psi, &rep).unwrap();
        let g0 = group.point_stabilizer(0);
        let cosets = double_cosets(&group, &g0).unwrap();
        let via = isotypic_overlaps_via_cosets(&psi, &rep, &group, &g0, &cosets).unwrap();
        for (a, b) in direct.overlaps().iter().zip(via.overlaps()) {
            assert!((a - b).abs() < 1e-9);
        }
        // the three radicands of the closed form, scaled by d_λ/|S|
        let nbar = 0.64f64;
        let (k2, k4) = ((-nbar).exp(), (-2.0 * nbar).exp());
        let m = binomial(n, 2) as f64;
        let nf = n as f64;
        let expect = [
            (1.0 + 2.0 * (nf - 2.0) * k2 + binomial(n - 2, 2) as f64 * k4) / m,
            (nf - 1.0) * (1.0 + (nf - 4.0) * k2 - (nf - 3.0) * k4) / m,
            (m - nf) * (1.0 - 2.0 * k2 + k4) / m,
        ];
        for (o, e) in direct.overlaps().iter().zip(expect) {
            assert!((o - e).abs() < 1e-10, "{o} vs {e}");
        }
    }

    #[test]
    fn optimal_vector_recovers_pgm_basis() {
        // equal priors make the PGM basis the identity, so w must line up
        // with a coordinate axis modulo global phase
        let n = 6;
        let cb = ppm_codebook(n, C64::new(1.1, 0.0)).unwrap();
        let rep = characters_from_rep(&cyclic_group(n).unwrap()).unwrap();
        let psi = state_coordinates(&cb).unwrap().col(0);
        let w = gu_optimal_vector(&psi, &rep).unwrap();
        assert!((cdot(&w, &w).re - 1.0).abs() < 1e-10);
        assert!((w[0].norm() - 1.0).abs() < 1e-9, "{w:?}");

        let cb = two_pulse_ppm_codebook(5, C64::new(0.9, 0.0)).unwrap();
        let rep = characters_from_rep(&symmetric_group_on_pairs(5).unwrap()).unwrap();
        let psi = state_coordinates(&cb).unwrap().col(0);
        let w = gu_optimal_vector(&psi, &rep).unwrap();
        assert!((w[0].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn success_probability_consistency() {
        let n = 8;
        let nbar = 1.0f64;
        let cb = ppm_codebook(n, C64::new(1.0, 0.0)).unwrap();
        let rep = characters_from_rep(&cyclic_group(n).unwrap()).unwrap();
        let psi = state_coordinates(&cb).unwrap().col(0);
        let overlaps = isotypic_overlaps(&psi, &rep).unwrap();
        let ps = gu_success_probability(&overlaps, n);
        assert!((ps - (1.0 - ppm_mpe_pe(n, nbar).unwrap())).abs() < 1e-10);
        let sol = pgm(&cb).unwrap();
        assert!((ps - (1.0 - sol.error_probability())).abs() < 1e-9);
    }

    #[test]
    fn identical_states_succeed_at_chance() {
        // n̄ = 0 collapses every codeword to vacuum; only the trivial
        // component survives and P_s = 1/N
        let n = 5;
        assert!((ppm_mpe_pe(n, 0.0).unwrap() - (n as f64 - 1.0) / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ppm_formula_limits_and_pgm_agreement() {
        assert!(ppm_mpe_pe(8, f64::INFINITY).unwrap().abs() < 1e-300);
        for n in [3usize, 8] {
            for j in 0..10 {
                let nbar = 0.4 * (j + 1) as f64;
                let cb = ppm_codebook(n, C64::new(nbar.sqrt(), 0.0)).unwrap();
                let sol = pgm(&cb).unwrap();
                let pe = ppm_mpe_pe(n, nbar).unwrap();
                assert!((pe - sol.error_probability()).abs() < 1e-10, "N={n} nbar={nbar}");
            }
        }
        assert!(ppm_mpe_pe(1, 1.0).is_err());
        assert!(ppm_mpe_pe(4, -0.5).is_err());
    }

    #[test]
    fn two_pulse_formula_limits_and_pgm_agreement() {
        assert!((two_pulse_ppm_mpe_ps(6, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        for n in [5usize, 8] {
            for j in 0..8 {
                let nbar = 0.5 * (j + 1) as f64;
                let cb = two_pulse_ppm_codebook(n, C64::new(nbar.sqrt(), 0.0)).unwrap();
                let sol = pgm(&cb).unwrap();
                let ps = two_pulse_ppm_mpe_ps(n, nbar).unwrap();
                assert!(
                    (ps - (1.0 - sol.error_probability())).abs() < 1e-9,
                    "N={n} nbar={nbar}"
                );
            }
        }
        assert!(two_pulse_ppm_mpe_ps(3, 1.0).is_err());
        assert!(two_pulse_ppm_mpe_ps(8, -0.1).is_err());
    }

    #[test]
    fn error_decreases_with_energy() {
        let mut prev = f64::INFINITY;
        for j in 0..20 {
            let nbar = 0.5 * (j + 1) as f64;
            let pe = ppm_mpe_pe(8, nbar).unwrap();
            assert!(pe < prev);
            prev = pe;
        }
        let mut prev = 0.0;
        for j in 0..20 {
            let nbar = 0.5 * (j + 1) as f64;
            let ps = two_pulse_ppm_mpe_ps(6, nbar).unwrap();
            assert!(ps > prev);
            prev = ps;
        }
    }
}
