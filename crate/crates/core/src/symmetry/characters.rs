//! Irreducible characters and isotypic projectors of the permutation
//! action, for the two group families the solvers rely on.
//!
//! Abelian groups get exact characters: every value is a root of unity
//! tracked as an integer exponent mod |G|, so conjugation and inversion are
//! exact and the projectors inherit no drift beyond final rounding. S_N on
//! pairs gets its three constituents (trivial, standard, pair) with
//! characters read off fixed-point counts of the two actions.

use crate::error::{Error, Result};
use crate::matfun::{ComplexMatrix, HermitianMatrix, C64};
use crate::symmetry::{DoubleCoset, GroupKind, Permutation, PermutationGroup};
use crate::util::pair_list;

/// Character table plus isotypic projectors of a permutation action.
///
/// Character values are aligned with the group's element enumeration:
/// `char_value(k, e)` is the k-th irreducible character at `group.element(e)`.
#[derive(Clone, Debug)]
pub struct RepresentationData {
    labels: Vec<String>,
    dims: Vec<usize>,
    mults: Vec<usize>,
    chars: Vec<Vec<C64>>,
    projectors: Vec<HermitianMatrix>,
    degree: usize,
    group_order: usize,
}

impl RepresentationData {
    pub fn irrep_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, irrep: usize) -> &str {
        &self.labels[irrep]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, irrep: usize) -> usize {
        self.dims[irrep]
    }

    /// Multiplicity of the irrep in the permutation action.
    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    pub fn mult(&self, irrep: usize) -> usize {
        self.mults[irrep]
    }

    pub fn char_values(&self, irrep: usize) -> &[C64] {
        &self.chars[irrep]
    }

    pub fn char_value(&self, irrep: usize, element: usize) -> C64 {
        self.chars[irrep][element]
    }

    pub fn projector(&self, irrep: usize) -> &HermitianMatrix {
        &self.projectors[irrep]
    }

    pub fn projectors(&self) -> &[HermitianMatrix] {
        &self.projectors
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }
}

/// Decompose the permutation action of `group` into isotypic components.
///
/// Supported groups: abelian (any), and those built by
/// [`symmetric_group_on_pairs`](crate::symmetry::symmetric_group_on_pairs).
/// Everything else returns `UnsupportedRepresentation`.
pub fn characters_from_rep(group: &PermutationGroup) -> Result<RepresentationData> {
    let (labels, dims, chars) = match &group.kind {
        GroupKind::SnPairs { n, points } => sn_pairs_characters(*n, points, group),
        GroupKind::Plain => {
            if !group.is_abelian() {
                return Err(Error::UnsupportedRepresentation(
                    "only abelian groups and S_N pair actions are supported".into(),
                ));
            }
            abelian_characters(group)?
        }
    };

    let degree = group.degree();
    let order = group.order() as f64;
    let mut projectors = Vec::with_capacity(labels.len());
    let mut mults = Vec::with_capacity(labels.len());
    for (k, dim) in dims.iter().enumerate() {
        let coeff = *dim as f64 / order;
        let mut acc = ComplexMatrix::zeros(degree, degree);
        for (e, elem) in group.elements().iter().enumerate() {
            // characters of unitary irreps: chi(g^{-1}) = conj(chi(g))
            let weight = chars[k][e].conj() * coeff;
            for j in 0..degree {
                acc[(elem.apply(j), j)] += weight;
            }
        }
        let p = HermitianMatrix::new(acc)?;
        let idem = p.mat().mul(p.mat()).max_abs_diff(p.mat());
        if idem > 1e-9 {
            return Err(Error::UnsupportedRepresentation(format!(
                "projector for irrep {k} is not idempotent (residual {idem:.3e})"
            )));
        }
        let trace: f64 = (0..degree).map(|j| p.mat()[(j, j)].re).sum();
        let mult = (trace / *dim as f64).round();
        if (trace - mult * *dim as f64).abs() > 1e-9 {
            return Err(Error::UnsupportedRepresentation(format!(
                "projector trace {trace} is not a multiple of the irrep dimension {dim}"
            )));
        }
        mults.push(mult as usize);
        projectors.push(p);
    }

    let mut sum = ComplexMatrix::zeros(degree, degree);
    for p in &projectors {
        sum = sum.add(p.mat());
    }
    let completeness = sum.max_abs_diff(&ComplexMatrix::identity(degree));
    if completeness > 1e-9 {
        return Err(Error::UnsupportedRepresentation(format!(
            "isotypic projectors do not sum to the identity (residual {completeness:.3e})"
        )));
    }
    if mults.iter().zip(&dims).map(|(m, d)| m * d).sum::<usize>() != degree {
        return Err(Error::UnsupportedRepresentation(
            "multiplicities and dimensions do not account for the action".into(),
        ));
    }

    Ok(RepresentationData {
        labels,
        dims,
        mults,
        chars,
        projectors,
        degree,
        group_order: group.order(),
    })
}

type CharacterTable = (Vec<String>, Vec<usize>, Vec<Vec<C64>>);

/// Exact abelian character table by extending one generator at a time.
///
/// Characters are integer exponent vectors: chi(g) = exp(2 pi i a_g / D)
/// with D = |G|. If H already has characters and g extends H with smallest
/// power g^d inside H, every character splits into d extensions
/// b = a_{g^d}/d + s D/d (the divisibility is guaranteed because g^D = e),
/// and exponents on the new cosets are a_{g^t h} = t b + a_h mod D.
fn abelian_characters(group: &PermutationGroup) -> Result<CharacterTable> {
    let n_elems = group.order();
    let d_big = n_elems as i64;
    debug_assert!(group.element(0).is_identity());

    let mut in_h = vec![false; n_elems];
    in_h[0] = true;
    let mut members: Vec<usize> = vec![0];
    let mut exponents: Vec<Vec<i64>> = vec![vec![0; n_elems]];

    for gen in group.generators() {
        let gen_idx = group
            .element_index(gen)
            .expect("generators are group members");
        if in_h[gen_idx] {
            continue;
        }
        // d = smallest positive power of gen landing in H
        let mut power = gen.clone();
        let mut d = 1i64;
        while !in_h[group.element_index(&power).expect("closure")] {
            power = gen.compose(&power);
            d += 1;
        }
        let pd_idx = group.element_index(&power).expect("closure");

        // index map for the new cosets g^t H, t = 1..d
        let mut coset_elem: Vec<Vec<usize>> = Vec::with_capacity(d as usize - 1);
        let mut gt = gen.clone();
        for _ in 1..d {
            let row: Vec<usize> = members
                .iter()
                .map(|&h| {
                    group
                        .element_index(&gt.compose(group.element(h)))
                        .expect("closure")
                })
                .collect();
            coset_elem.push(row);
            gt = gen.compose(&gt);
        }

        let mut extended = Vec::with_capacity(exponents.len() * d as usize);
        for a in &exponents {
            let a_pd = a[pd_idx];
            debug_assert_eq!(a_pd % d, 0, "character exponent must divide");
            let b0 = a_pd / d;
            for s in 0..d {
                let b = (b0 + s * (d_big / d)).rem_euclid(d_big);
                let mut a_new = a.clone();
                for (t, row) in coset_elem.iter().enumerate() {
                    let tb = ((t as i64 + 1) * b).rem_euclid(d_big);
                    for (slot, &idx) in row.iter().enumerate() {
                        a_new[idx] = (tb + a[members[slot]]).rem_euclid(d_big);
                    }
                }
                extended.push(a_new);
            }
        }
        exponents = extended;

        for row in &coset_elem {
            for &idx in row {
                in_h[idx] = true;
            }
            members.extend_from_slice(row);
        }
    }

    if members.len() != n_elems {
        return Err(Error::UnsupportedRepresentation(
            "generators failed to reach the whole group".into(),
        ));
    }

    let step = std::f64::consts::TAU / n_elems as f64;
    let chars = exponents
        .iter()
        .map(|a| {
            a.iter()
                .map(|&e| {
                    let angle = step * e as f64;
                    C64::new(angle.cos(), angle.sin())
                })
                .collect()
        })
        .collect();
    let labels = (0..n_elems).map(|k| format!("chi{k}")).collect();
    Ok((labels, vec![1; n_elems], chars))
}

/// The three constituents of S_N acting on unordered pairs. Characters come
/// from fixed points: chi_standard(g) = fix_1(g) - 1 on points, and
/// chi_pair(g) = fix_2(g) - fix_1(g) on pairs.
fn sn_pairs_characters(
    n: usize,
    points: &[Permutation],
    group: &PermutationGroup,
) -> CharacterTable {
    let labels = vec!["trivial".to_string(), "standard".to_string(), "pair".to_string()];
    let dims = vec![1, n - 1, n * (n - 3) / 2];
    let mut chars = vec![Vec::with_capacity(group.order()); 3];
    for (e, elem) in group.elements().iter().enumerate() {
        let fix1 = points[e].fixed_points() as f64;
        let fix2 = elem.fixed_points() as f64;
        chars[0].push(C64::new(1.0, 0.0));
        chars[1].push(C64::new(fix1 - 1.0, 0.0));
        chars[2].push(C64::new(fix2 - fix1, 0.0));
    }
    (labels, dims, chars)
}

/// (1/|G0|) sum of chi(g^{-1}) over one double coset.
pub fn double_coset_char_sum_complex(
    rep: &RepresentationData,
    irrep: usize,
    coset: &DoubleCoset,
    g0: &PermutationGroup,
) -> C64 {
    let total: C64 = coset
        .element_indices()
        .iter()
        .map(|&e| rep.char_value(irrep, e).conj())
        .sum();
    total / g0.order() as f64
}

/// Real-valued [`double_coset_char_sum_complex`], for representations whose
/// sums are real (the S_N pair table). Asserts the imaginary part vanishes
/// in debug builds.
pub fn double_coset_char_sum(
    rep: &RepresentationData,
    irrep: usize,
    coset: &DoubleCoset,
    g0: &PermutationGroup,
) -> f64 {
    let value = double_coset_char_sum_complex(rep, irrep, coset, g0);
    debug_assert!(value.im.abs() < 1e-9);
    value.re
}

/// Hand-built vectors spanning the G0-invariant subspaces of the pair
/// action, G0 the stabilizer of the pair {0, 1}: the all-ones vector t
/// (trivial component), u in the standard component, v in the pair
/// component. Unnormalized.
pub fn pair_rep_trivial_g0_states(n: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "pair representation vectors need N >= 4, got {n}"
        )));
    }
    let pairs = pair_list(n);
    let m = pairs.len();
    let t = vec![1.0; m];

    // s_i = sum_{j != i} |{i,j}> - (2/N) t, orthogonal to t
    let s = |i: usize| -> Vec<f64> {
        pairs
            .iter()
            .map(|&(a, b)| {
                let hit = if a == i || b == i { 1.0 } else { 0.0 };
                hit - 2.0 / n as f64
            })
            .collect::<Vec<f64>>()
    };
    let s0 = s(0);
    let s1 = s(1);
    let u: Vec<f64> = s0.iter().zip(&s1).map(|(a, b)| a + b).collect();

    let mut v = vec![0.0; m];
    v[0] = 1.0; // |{0,1}| is the first pair in lexicographic order
    let cu = 1.0 / (n as f64 - 2.0);
    let ct = 1.0 / m as f64;
    for k in 0..m {
        v[k] -= cu * u[k] + ct * t[k];
    }
    Ok((t, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{gram, ppm_codebook};
    use crate::symmetry::{
        cyclic_group, double_cosets, gram_automorphism_group, pair_action, symmetric_group_on_pairs,
        two_orbit_cyclic_group,
    };
    use crate::util::binomial;

    fn check_projector_algebra(rep: &RepresentationData) {
        let n = rep.degree();
        let mut total = ComplexMatrix::zeros(n, n);
        for k in 0..rep.irrep_count() {
            let p = rep.projector(k).mat();
            assert!(p.mul(p).max_abs_diff(p) < 1e-10, "idempotence of {}", rep.label(k));
            for l in 0..k {
                let q = rep.projector(l).mat();
                assert!(p.mul(q).max_abs() < 1e-10, "orthogonality {k},{l}");
            }
            total = total.add(p);
        }
        assert!(total.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
    }

    #[test]
    fn cyclic_characters_are_fourier() {
        let g = cyclic_group(6).unwrap();
        let rep = characters_from_rep(&g).unwrap();
        assert_eq!(rep.irrep_count(), 6);
        // elements enumerate as e, g, g^2, ... so chi_k(g^j) = omega^{kj}
        for k in 0..6 {
            assert_eq!(rep.label(k), format!("chi{k}"));
            for j in 0..6 {
                let angle = std::f64::consts::TAU * (k * j % 6) as f64 / 6.0;
                let expect = C64::new(angle.cos(), angle.sin());
                assert!((rep.char_value(k, j) - expect).norm() < 1e-12);
            }
        }
        assert_eq!(rep.mults(), &[1, 1, 1, 1, 1, 1]);
        check_projector_algebra(&rep);
    }

    #[test]
    fn two_orbit_cyclic_multiplicities() {
        let g = two_orbit_cyclic_group(4).unwrap();
        let rep = characters_from_rep(&g).unwrap();
        assert_eq!(rep.irrep_count(), 4);
        assert_eq!(rep.dims(), &[1, 1, 1, 1]);
        assert_eq!(rep.mults(), &[2, 2, 2, 2]);
        check_projector_algebra(&rep);
    }

    #[test]
    fn swap_group_from_automorphisms() {
        let cb = crate::coherent::tests::ternary(0.8);
        let auto = gram_automorphism_group(&gram(&cb), 1e-9).unwrap();
        let rep = characters_from_rep(&auto).unwrap();
        assert_eq!(rep.irrep_count(), 2);
        assert_eq!(rep.mults(), &[2, 1]);
        check_projector_algebra(&rep);
    }

    #[test]
    fn nonabelian_plain_group_is_rejected() {
        let cb = ppm_codebook(4, C64::new(1.0, 0.0)).unwrap();
        let auto = gram_automorphism_group(&gram(&cb), 1e-9).unwrap();
        assert_eq!(auto.order(), 24);
        assert!(matches!(
            characters_from_rep(&auto),
            Err(Error::UnsupportedRepresentation(_))
        ));
    }

    #[test]
    fn sn_pairs_character_values() {
        let n = 5;
        let g = symmetric_group_on_pairs(n).unwrap();
        let rep = characters_from_rep(&g).unwrap();
        assert_eq!(rep.labels(), &["trivial", "standard", "pair"]);
        assert_eq!(rep.dims(), &[1, 4, 5]);
        assert_eq!(rep.mults(), &[1, 1, 1]);
        check_projector_algebra(&rep);

        let trans = pair_action(n, &Permutation::from_cycles(n, &[&[0, 1]]).unwrap());
        let e = g.element_index(&trans).unwrap();
        assert!((rep.char_value(1, e).re - 2.0).abs() < 1e-12); // fix1 = 3
        assert!((rep.char_value(2, e).re - 1.0).abs() < 1e-12); // fix2 = 4
    }

    #[test]
    fn double_coset_sums_match_closed_forms() {
        for n in [5usize, 6, 7] {
            let g = symmetric_group_on_pairs(n).unwrap();
            let rep = characters_from_rep(&g).unwrap();
            let g0 = g.point_stabilizer(0);
            let cosets = double_cosets(&g, &g0).unwrap();
            assert_eq!(cosets.len(), 3);

            // order cosets by representative distance: identity, then the
            // coset of (0 2) (one shared point), then (0 2)(1 3) (disjoint)
            let c1_rep = pair_action(n, &Permutation::from_cycles(n, &[&[0, 2]]).unwrap());
            let c1_idx = g.element_index(&c1_rep).unwrap();
            let c2_rep =
                pair_action(n, &Permutation::from_cycles(n, &[&[0, 2], &[1, 3]]).unwrap());
            let c2_idx = g.element_index(&c2_rep).unwrap();
            let locate = |idx: usize| {
                cosets
                    .iter()
                    .find(|c| c.element_indices().contains(&idx))
                    .unwrap()
            };
            let (c0, c1, c2) = (&cosets[0], locate(c1_idx), locate(c2_idx));

            let nf = n as f64;
            let table = [
                (0, 1.0, 2.0 * (nf - 2.0), (nf - 2.0) * (nf - 3.0) / 2.0),
                (1, 1.0, nf - 4.0, -(nf - 3.0)),
                (2, 1.0, -2.0, 1.0),
            ];
            for (irrep, v0, v1, v2) in table {
                assert!((double_coset_char_sum(&rep, irrep, c0, &g0) - v0).abs() < 1e-9);
                assert!((double_coset_char_sum(&rep, irrep, c1, &g0) - v1).abs() < 1e-9);
                assert!((double_coset_char_sum(&rep, irrep, c2, &g0) - v2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn invariant_vectors_orthogonal_with_quoted_ratios() {
        for n in [4usize, 5, 6, 7] {
            let (t, u, v) = pair_rep_trivial_g0_states(n).unwrap();
            let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
            assert!(dot(&t, &u).abs() < 1e-12);
            assert!(dot(&t, &v).abs() < 1e-12);
            assert!(dot(&u, &v).abs() < 1e-12);

            let permute = |vec: &[f64], g: &Permutation| -> Vec<f64> {
                let mut out = vec![0.0; vec.len()];
                for (k, &x) in vec.iter().enumerate() {
                    out[g.apply(k)] = x;
                }
                out
            };
            let g1 = pair_action(n, &Permutation::from_cycles(n, &[&[0, 2]]).unwrap());
            let ratio_u = 2.0 * (n as f64 - 2.0) * dot(&u, &permute(&u, &g1)) / dot(&u, &u);
            assert!((ratio_u - (n as f64 - 4.0)).abs() < 1e-9, "N={n}: {ratio_u}");

            // zonal ratios at a disjoint double transposition recover the
            // C_2 column once scaled by |C_2|/|G_0| = C(N-2, 2)
            let scale = binomial(n - 2, 2) as f64;
            let g2 = pair_action(n, &Permutation::from_cycles(n, &[&[0, 2], &[1, 3]]).unwrap());
            let ratio_v = scale * dot(&v, &permute(&v, &g2)) / dot(&v, &v);
            assert!((ratio_v - 1.0).abs() < 1e-9, "N={n}: {ratio_v}");
            let ratio_u2 = scale * dot(&u, &permute(&u, &g2)) / dot(&u, &u);
            assert!((ratio_u2 + (n as f64 - 3.0)).abs() < 1e-9, "N={n}: {ratio_u2}");
        }
    }

    #[test]
    fn invariant_vector_construction_rejects_small_n() {
        assert!(pair_rep_trivial_g0_states(3).is_err());
    }
}
