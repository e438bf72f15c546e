//! Permutation groups acting on codeword indices: construction and
//! enumeration, orbits on indices and on index pairs, Gram-matrix
//! automorphisms, double cosets, and GU/CGU classification.
//!
//! Character tables and isotypic projectors live in [`characters`].

pub mod characters;

pub use characters::{
    characters_from_rep, double_coset_char_sum, double_coset_char_sum_complex,
    pair_rep_trivial_g0_states, RepresentationData,
};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::HermitianMatrix;
use crate::util::{pair_index, pair_list};

/// Full-enumeration cap: groups larger than this are rejected rather than
/// silently chewing through memory.
pub const ENUMERATION_BUDGET: usize = 1_000_000;

/// Degree cap for the brute-force Gram automorphism search.
pub const AUTOMORPHISM_DEGREE_CAP: usize = 16;

/// A permutation of {0..n-1}, stored as its image vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<u16>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n as u16).collect() }
    }

    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 || n > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!("unsupported permutation degree {n}")));
        }
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter("image is not a permutation".into()));
            }
            seen[i] = true;
        }
        Ok(Permutation { image: image.into_iter().map(|i| i as u16).collect() })
    }

    /// Build from disjoint cycles, e.g. `from_cycles(5, &[&[0, 2]])` is the
    /// transposition swapping 0 and 2.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for w in 0..cycle.len() {
                let from = cycle[w];
                let to = cycle[(w + 1) % cycle.len()];
                if from >= n || to >= n {
                    return Err(Error::InvalidParameter("cycle entry out of range".into()));
                }
                image[from] = to;
            }
        }
        Self::new(image)
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    /// Composition acts right to left: `(g.compose(&h))(i) = g(h(i))`.
    /// Double-coset enumeration depends on this convention.
    pub fn compose(&self, h: &Permutation) -> Permutation {
        assert_eq!(self.degree(), h.degree());
        Permutation { image: h.image.iter().map(|&i| self.image[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0u16; self.degree()];
        for (i, &j) in self.image.iter().enumerate() {
            image[j as usize] = i as u16;
        }
        Permutation { image }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    pub fn fixed_points(&self) -> usize {
        self.image.iter().enumerate().filter(|(i, &j)| *i == j as usize).count()
    }
}

impl std::fmt::Debug for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Perm{:?}", self.image)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<usize> = self.image.iter().map(|&i| i as usize).collect();
        v.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<usize> = Vec::deserialize(de)?;
        Permutation::new(v).map_err(serde::de::Error::custom)
    }
}

/// How the group was built; `SnPairs` keeps the underlying point
/// permutations so characters can count fixed points of both actions.
#[derive(Clone, Debug)]
pub(crate) enum GroupKind {
    Plain,
    SnPairs { n: usize, points: Vec<Permutation> },
}

/// A permutation group with its elements fully enumerated (budgeted).
#[derive(Clone, Debug)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    pub(crate) kind: GroupKind,
}

impl PermutationGroup {
    /// Close the generators under composition (breadth-first, identity
    /// first). Fails with `BudgetExceeded` past [`ENUMERATION_BUDGET`].
    pub fn from_generators(degree: usize, generators: Vec<Permutation>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameter("degree must be positive".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(Error::DimensionMismatch(format!(
                "generator degree {} does not match {}",
                g.degree(),
                degree
            )));
        }
        let mut elements = vec![Permutation::identity(degree)];
        let mut index = HashMap::new();
        index.insert(elements[0].clone(), 0usize);
        let mut head = 0;
        while head < elements.len() {
            let current = elements[head].clone();
            head += 1;
            for g in &generators {
                let next = g.compose(&current);
                if !index.contains_key(&next) {
                    if elements.len() >= ENUMERATION_BUDGET {
                        return Err(Error::BudgetExceeded(ENUMERATION_BUDGET));
                    }
                    index.insert(next.clone(), elements.len());
                    elements.push(next);
                }
            }
        }
        Ok(PermutationGroup { degree, generators, elements, index, kind: GroupKind::Plain })
    }

    /// Wrap an already-closed element set (subgroups carved out of an
    /// enumerated parent). The closure property is the caller's contract.
    fn from_closed_elements(degree: usize, elements: Vec<Permutation>) -> Self {
        let index = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        PermutationGroup {
            degree,
            generators: elements.iter().filter(|p| !p.is_identity()).cloned().collect(),
            elements,
            index,
            kind: GroupKind::Plain,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.index.contains_key(p)
    }

    pub fn element_index(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().enumerate().all(|(i, a)| {
            self.generators[i + 1..]
                .iter()
                .all(|b| a.compose(b) == b.compose(a))
        })
    }

    /// Subgroup of elements fixing index `point`.
    pub fn point_stabilizer(&self, point: usize) -> PermutationGroup {
        assert!(point < self.degree);
        let elements: Vec<Permutation> = self
            .elements
            .iter()
            .filter(|g| g.apply(point) == point)
            .cloned()
            .collect();
        Self::from_closed_elements(self.degree, elements)
    }
}

/// Cyclic shift group of order N on N indices.
pub fn cyclic_group(n: usize) -> Result<PermutationGroup> {
    if n == 0 {
        return Err(Error::InvalidParameter("cyclic group needs N >= 1".into()));
    }
    let shift = Permutation::new((0..n).map(|i| (i + 1) % n).collect())?;
    PermutationGroup::from_generators(n, vec![shift])
}

/// Simultaneous cyclic shift of both halves of a 2N-index set: the natural
/// symmetry of a phase-coded PPM codebook. Order N, two orbits.
pub fn two_orbit_cyclic_group(n: usize) -> Result<PermutationGroup> {
    if n == 0 {
        return Err(Error::InvalidParameter("cyclic group needs N >= 1".into()));
    }
    let mut image = Vec::with_capacity(2 * n);
    image.extend((0..n).map(|i| (i + 1) % n));
    image.extend((0..n).map(|i| n + (i + 1) % n));
    PermutationGroup::from_generators(2 * n, vec![Permutation::new(image)?])
}

/// Image of a point permutation under the action on unordered pairs, in
/// `pair_list` order.
pub fn pair_action(n: usize, g: &Permutation) -> Permutation {
    assert_eq!(g.degree(), n);
    let pairs = pair_list(n);
    let image = pairs
        .iter()
        .map(|&(i, j)| pair_index(n, g.apply(i), g.apply(j)))
        .collect();
    Permutation::new(image).expect("pair action of a bijection is a bijection")
}

/// S_N acting on the C(N,2) unordered pairs of {0..N-1}. Capped at N <= 9
/// (full enumeration of N! elements).
pub fn symmetric_group_on_pairs(n: usize) -> Result<PermutationGroup> {
    if !(4..=9).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "symmetric group on pairs supports 4 <= N <= 9, got {n}"
        )));
    }
    let trans = Permutation::from_cycles(n, &[&[0, 1]])?;
    let cycle = Permutation::new((0..n).map(|i| (i + 1) % n).collect())?;
    let sn = PermutationGroup::from_generators(n, vec![trans, cycle])?;
    let points: Vec<Permutation> = sn.elements.clone();
    let degree = n * (n - 1) / 2;
    let elements: Vec<Permutation> = points.iter().map(|g| pair_action(n, g)).collect();
    let index = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let generators = sn.generators.iter().map(|g| pair_action(n, g)).collect();
    Ok(PermutationGroup {
        degree,
        generators,
        elements,
        index,
        kind: GroupKind::SnPairs { n, points },
    })
}

/// Orbits of the group action on indices, each sorted, ordered by minimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDecomposition {
    orbits: Vec<Vec<usize>>,
}

impl OrbitDecomposition {
    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn count(&self) -> usize {
        self.orbits.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.orbits.iter().map(Vec::len).collect()
    }
}

pub fn orbits(group: &PermutationGroup) -> OrbitDecomposition {
    let n = group.degree();
    let mut seen = vec![false; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < orbit.len() {
            let i = orbit[head];
            head += 1;
            for g in group.generators() {
                let j = g.apply(i);
                if !seen[j] {
                    seen[j] = true;
                    orbit.push(j);
                }
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    OrbitDecomposition { orbits }
}

/// Orbits of the diagonal action on ordered index pairs (i, j), diagonal
/// pairs included. These are the rigorous symmetry classes of a solution
/// matrix: entries of an invariant matrix are constant on each class.
pub fn pair_orbits(group: &PermutationGroup) -> Vec<Vec<(usize, usize)>> {
    let n = group.degree();
    let mut seen = vec![false; n * n];
    let mut out = Vec::new();
    for start in 0..n * n {
        if seen[start] {
            continue;
        }
        let mut orbit = vec![(start / n, start % n)];
        seen[start] = true;
        let mut head = 0;
        while head < orbit.len() {
            let (i, j) = orbit[head];
            head += 1;
            for g in group.generators() {
                let next = (g.apply(i), g.apply(j));
                let flat = next.0 * n + next.1;
                if !seen[flat] {
                    seen[flat] = true;
                    orbit.push(next);
                }
            }
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// True iff Γ_{g(i), g(j)} = Γ_{ij} for all i, j within `tol`.
pub fn is_gram_invariant(gram: &HermitianMatrix, g: &Permutation, tol: f64) -> bool {
    let n = gram.dim();
    if g.degree() != n {
        return false;
    }
    for i in 0..n {
        for j in 0..n {
            if (gram[(g.apply(i), g.apply(j))] - gram[(i, j)]).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Brute-force search for the full group of permutations leaving Γ
/// invariant. Backtracks over images with row-profile pruning; degree is
/// capped at 16 and the element count at the enumeration budget (callers
/// with larger problems should supply generators and use
/// `PermutationGroup::from_generators` plus [`is_gram_invariant`]).
pub fn gram_automorphism_group(gram: &HermitianMatrix, tol: f64) -> Result<PermutationGroup> {
    let n = gram.dim();
    if n > AUTOMORPHISM_DEGREE_CAP {
        return Err(Error::BudgetExceeded(n));
    }
    // Row profile: sorted |entries| plus the diagonal, compared entrywise.
    let profile = |i: usize| -> Vec<f64> {
        let mut row: Vec<f64> = (0..n).map(|j| gram[(i, j)].norm()).collect();
        row.sort_by(f64::total_cmp);
        row
    };
    let profiles: Vec<Vec<f64>> = (0..n).map(profile).collect();
    let compatible = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);

    let mut found: Vec<Permutation> = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn recurse(
        gram: &HermitianMatrix,
        profiles: &[Vec<f64>],
        compatible: &dyn Fn(&[f64], &[f64]) -> bool,
        tol: f64,
        depth: usize,
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        found: &mut Vec<Permutation>,
    ) -> Result<()> {
        let n = profiles.len();
        if depth == n {
            if found.len() >= ENUMERATION_BUDGET {
                return Err(Error::BudgetExceeded(ENUMERATION_BUDGET));
            }
            found.push(Permutation::new(image.clone()).expect("search builds bijections"));
            return Ok(());
        }
        for cand in 0..n {
            if used[cand] || !compatible(&profiles[depth], &profiles[cand]) {
                continue;
            }
            // consistency with every already-assigned index
            let ok = (0..depth).all(|k| {
                (gram[(cand, image[k])] - gram[(depth, k)]).norm() <= tol
                    && (gram[(image[k], cand)] - gram[(k, depth)]).norm() <= tol
            }) && (gram[(cand, cand)] - gram[(depth, depth)]).norm() <= tol;
            if !ok {
                continue;
            }
            image[depth] = cand;
            used[cand] = true;
            recurse(gram, profiles, compatible, tol, depth + 1, image, used, found)?;
            used[cand] = false;
            image[depth] = usize::MAX;
        }
        Ok(())
    }

    recurse(gram, &profiles, &compatible, tol, 0, &mut image, &mut used, &mut found)?;
    // Invariance permutations compose and invert, so the found set is closed.
    let index = found.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let identity_pos = found
        .iter()
        .position(Permutation::is_identity)
        .expect("identity always preserves the Gram matrix");
    found.swap(0, identity_pos);
    Ok(PermutationGroup {
        degree: n,
        generators: found.iter().filter(|p| !p.is_identity()).cloned().collect(),
        elements: found,
        index,
        kind: GroupKind::Plain,
    })
}

/// One (G0, G0) double coset, as indices into the parent group's elements.
#[derive(Clone, Debug)]
pub struct DoubleCoset {
    representative: Permutation,
    element_indices: Vec<usize>,
}

impl DoubleCoset {
    pub fn representative(&self) -> &Permutation {
        &self.representative
    }

    pub fn element_indices(&self) -> &[usize] {
        &self.element_indices
    }

    pub fn len(&self) -> usize {
        self.element_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_indices.is_empty()
    }
}

/// Partition G into G0 g G0 double cosets. The identity's coset (G0 itself)
/// comes first; representatives are the earliest unassigned element in G's
/// enumeration order.
pub fn double_cosets(g: &PermutationGroup, g0: &PermutationGroup) -> Result<Vec<DoubleCoset>> {
    if g0.degree() != g.degree() {
        return Err(Error::NotSubgroup);
    }
    if g0.elements().iter().any(|e| !g.contains(e)) {
        return Err(Error::NotSubgroup);
    }
    let mut assigned = vec![false; g.order()];
    let mut cosets = Vec::new();
    for start in 0..g.order() {
        if assigned[start] {
            continue;
        }
        let rep = g.element(start).clone();
        let mut members = Vec::new();
        for a in g0.elements() {
            let ag = a.compose(&rep);
            for b in g0.elements() {
                let agb = ag.compose(b);
                let idx = g
                    .element_index(&agb)
                    .expect("double coset member must lie in the parent group");
                if !assigned[idx] {
                    assigned[idx] = true;
                    members.push(idx);
                }
            }
        }
        members.sort_unstable();
        cosets.push(DoubleCoset { representative: rep, element_indices: members });
    }
    Ok(cosets)
}

/// GU / CGU / asymmetric verdict for a Gram matrix under a group action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// Single orbit: geometrically uniform.
    Gu { group_order: usize },
    /// Several orbits, the group acting freely on each.
    Cgu { orbits: usize, group_order: usize },
    /// Anything else (some orbit smaller than the group).
    Asymmetric { orbit_sizes: Vec<usize>, group_order: usize },
}

/// Classify a state set under a group that must leave its Gram invariant.
pub fn classify(
    gram: &HermitianMatrix,
    group: &PermutationGroup,
    tol: f64,
) -> Result<Classification> {
    if group.degree() != gram.dim() {
        return Err(Error::DimensionMismatch(format!(
            "group degree {} vs Gram dimension {}",
            group.degree(),
            gram.dim()
        )));
    }
    if !group.generators().iter().all(|g| is_gram_invariant(gram, g, tol)) {
        return Err(Error::GramNotInvariant);
    }
    let decomposition = orbits(group);
    let sizes = decomposition.sizes();
    if decomposition.count() == 1 {
        return Ok(Classification::Gu { group_order: group.order() });
    }
    if sizes.iter().all(|&s| s == group.order()) {
        return Ok(Classification::Cgu { orbits: decomposition.count(), group_order: group.order() });
    }
    Ok(Classification::Asymmetric { orbit_sizes: sizes, group_order: group.order() })
}
