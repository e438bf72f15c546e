//! Coherent-state codewords, the standard modulation codebooks, and their
//! Gram matrices.
//!
//! A codeword is a vector of complex field amplitudes, one per optical mode;
//! mode k carries mean photon number `|amplitudes[k]|^2`. Codebooks attach
//! priors and are the sole input to every solver downstream: all of them work
//! on the Gram matrix, never on the (infinite-dimensional) states themselves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{ComplexMatrix, HermitianMatrix, C64};
use crate::util::pair_list;

/// One multimode coherent state |a_0⟩ ⊗ |a_1⟩ ⊗ ...
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentCodeword {
    amplitudes: Vec<C64>,
}

impl CoherentCodeword {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("codeword needs at least one mode".into()));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter("codeword amplitudes must be finite".into()));
        }
        Ok(CoherentCodeword { amplitudes })
    }

    pub fn modes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Total mean photon number, summed over modes.
    pub fn mean_photons(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// ⟨a|b⟩ for multimode coherent states: the per-mode overlaps
/// exp(conj(a_k) b_k - (|a_k|^2 + |b_k|^2)/2) multiply, so the product is a
/// single exponential of the summed exponent.
pub fn inner_product(a: &CoherentCodeword, b: &CoherentCodeword) -> Result<C64> {
    if a.modes() != b.modes() {
        return Err(Error::ModeMismatch(a.modes(), b.modes()));
    }
    let mut expo = C64::ZERO;
    for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
        expo += x.conj() * y - 0.5 * (x.norm_sqr() + y.norm_sqr());
    }
    Ok(expo.exp())
}

/// An ensemble of codewords with prior probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    codewords: Vec<CoherentCodeword>,
    priors: Vec<f64>,
}

impl Codebook {
    pub fn new(codewords: Vec<CoherentCodeword>, priors: Vec<f64>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::InvalidParameter("empty codebook".into()));
        }
        let modes = codewords[0].modes();
        if let Some(bad) = codewords.iter().find(|c| c.modes() != modes) {
            return Err(Error::ModeMismatch(modes, bad.modes()));
        }
        if priors.len() != codewords.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} priors for {} codewords",
                priors.len(),
                codewords.len()
            )));
        }
        if priors.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("priors must be finite and nonnegative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("priors sum to {total}, not 1")));
        }
        Ok(Codebook { codewords, priors })
    }

    pub fn with_equal_priors(codewords: Vec<CoherentCodeword>) -> Result<Self> {
        let n = codewords.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty codebook".into()));
        }
        Self::new(codewords, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least one codeword
    }

    pub fn modes(&self) -> usize {
        self.codewords[0].modes()
    }

    pub fn codewords(&self) -> &[CoherentCodeword] {
        &self.codewords
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn has_equal_priors(&self) -> bool {
        let p0 = 1.0 / self.len() as f64;
        self.priors.iter().all(|&p| (p - p0).abs() <= 1e-12)
    }

    pub fn to_json(&self) -> String {
        let file = CodebookFile::from(self);
        serde_json::to_string_pretty(&file).expect("codebook serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodebookFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("codebook JSON: {e}")))?;
        file.into_codebook()
    }
}

/// JSON schema: `{"modes": 2, "priors": [..] | "equal", "codewords": [[[re,im],..],..]}`.
#[derive(Serialize, Deserialize)]
struct CodebookFile {
    modes: usize,
    priors: PriorsSpec,
    codewords: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PriorsSpec {
    Keyword(String),
    List(Vec<f64>),
}

impl From<&Codebook> for CodebookFile {
    fn from(cb: &Codebook) -> Self {
        CodebookFile {
            modes: cb.modes(),
            priors: if cb.has_equal_priors() {
                PriorsSpec::Keyword("equal".into())
            } else {
                PriorsSpec::List(cb.priors.clone())
            },
            codewords: cb
                .codewords
                .iter()
                .map(|c| c.amplitudes.iter().map(|a| [a.re, a.im]).collect())
                .collect(),
        }
    }
}

impl CodebookFile {
    fn into_codebook(self) -> Result<Codebook> {
        let codewords: Vec<CoherentCodeword> = self
            .codewords
            .into_iter()
            .map(|amps| {
                CoherentCodeword::new(amps.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            })
            .collect::<Result<_>>()?;
        if let Some(bad) = codewords.iter().find(|c| c.modes() != self.modes) {
            return Err(Error::ModeMismatch(self.modes, bad.modes()));
        }
        match self.priors {
            PriorsSpec::Keyword(kw) if kw == "equal" => Codebook::with_equal_priors(codewords),
            PriorsSpec::Keyword(kw) => {
                Err(Error::InvalidParameter(format!("unknown priors keyword {kw:?}")))
            }
            PriorsSpec::List(p) => Codebook::new(codewords, p),
        }
    }
}

/// Gram matrix Γ_ij = ⟨ψ_i|ψ_j⟩. Hermitian with unit diagonal, PSD.
pub fn gram(cb: &Codebook) -> HermitianMatrix {
    let n = cb.len();
    let mut m = ComplexMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = inner_product(&cb.codewords[i], &cb.codewords[j])
                .expect("codebook invariant: equal mode counts");
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    HermitianMatrix::symmetrize(m)
}

/// Prior-weighted Gram matrix, entries sqrt(p_i p_j) ⟨ψ_i|ψ_j⟩. This is
/// M^dag M for the matrix M whose columns are sqrt(p_i)|ψ_i⟩, the object the
/// optimality conditions constrain.
pub fn weighted_gram(cb: &Codebook) -> HermitianMatrix {
    let g = gram(cb);
    let n = cb.len();
    let sq: Vec<f64> = cb.priors.iter().map(|p| p.sqrt()).collect();
    let m = ComplexMatrix::from_fn(n, n, |i, j| g[(i, j)] * (sq[i] * sq[j]));
    HermitianMatrix::symmetrize(m)
}

/// Pulse position modulation: codeword i puts the pulse α in mode i of N.
pub fn ppm_codebook(n: usize, alpha: C64) -> Result<Codebook> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("ppm needs N >= 2, got {n}")));
    }
    let words = (0..n)
        .map(|i| {
            let mut amps = vec![C64::ZERO; n];
            amps[i] = alpha;
            CoherentCodeword::new(amps)
        })
        .collect::<Result<_>>()?;
    Codebook::with_equal_priors(words)
}

/// Two-pulse PPM: one codeword per unordered pair of modes, pulses α in both.
/// Codewords follow the lexicographic pair order (0,1), (0,2), ...
pub fn two_pulse_ppm_codebook(n: usize, alpha: C64) -> Result<Codebook> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("two-pulse ppm needs N >= 4, got {n}")));
    }
    let words = pair_list(n)
        .into_iter()
        .map(|(i, j)| {
            let mut amps = vec![C64::ZERO; n];
            amps[i] = alpha;
            amps[j] = alpha;
            CoherentCodeword::new(amps)
        })
        .collect::<Result<_>>()?;
    Codebook::with_equal_priors(words)
}

/// Phase-coded PPM: 2N codewords in N modes. Words 0..N are PPM pulses α,
/// words N..2N repeat the pattern with amplitude β (β = -α in the standard
/// binary-phase construction).
pub fn pcppm_codebook(n: usize, alpha: C64, beta: C64) -> Result<Codebook> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("pcppm needs N >= 2, got {n}")));
    }
    let mut words = Vec::with_capacity(2 * n);
    for &amp in &[alpha, beta] {
        for i in 0..n {
            let mut amps = vec![C64::ZERO; n];
            amps[i] = amp;
            words.push(CoherentCodeword::new(amps)?);
        }
    }
    Codebook::with_equal_priors(words)
}

/// BPSK modulation of a binary linear code: bit 0 -> |α⟩, bit 1 -> |-α⟩ per
/// mode. The Gram entries come out as σ^{d_ij} with σ = exp(-2|α|^2) and
/// d_ij the Hamming distance.
pub fn bpsk_codebook(code: &BinaryLinearCode, alpha: C64) -> Result<Codebook> {
    let words = code
        .codewords()
        .iter()
        .map(|bits| {
            CoherentCodeword::new(
                bits.iter().map(|&b| if b == 0 { alpha } else { -alpha }).collect(),
            )
        })
        .collect::<Result<_>>()?;
    Codebook::with_equal_priors(words)
}

/// A binary linear code given by generator rows, with the codeword list and
/// pairwise Hamming distance matrix precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryLinearCode {
    generators: Vec<Vec<u8>>,
    codewords: Vec<Vec<u8>>,
    distances: Vec<Vec<usize>>,
}

impl BinaryLinearCode {
    /// Span the generator rows. Dependent generators are fine; the codeword
    /// list is the deduplicated span (zero word first, then insertion order).
    pub fn new(generators: Vec<Vec<u8>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("code needs at least one generator row".into()));
        }
        let n = generators[0].len();
        if n == 0 || generators.iter().any(|g| g.len() != n) {
            return Err(Error::DimensionMismatch("generator rows must share a positive length".into()));
        }
        if generators.iter().flatten().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("generator entries must be bits".into()));
        }
        let mut codewords: Vec<Vec<u8>> = vec![vec![0u8; n]];
        let mut seen = std::collections::HashSet::new();
        seen.insert(codewords[0].clone());
        for g in &generators {
            let current: Vec<Vec<u8>> = codewords.clone();
            for word in current {
                let summed: Vec<u8> = word.iter().zip(g).map(|(a, b)| a ^ b).collect();
                if seen.insert(summed.clone()) {
                    codewords.push(summed);
                }
            }
        }
        let m = codewords.len();
        let mut distances = vec![vec![0usize; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let d = codewords[i]
                    .iter()
                    .zip(&codewords[j])
                    .filter(|(a, b)| a != b)
                    .count();
                distances[i][j] = d;
                distances[j][i] = d;
            }
        }
        Ok(BinaryLinearCode { generators, codewords, distances })
    }

    /// Parse one bit-string per line; blank lines ignored.
    pub fn from_bitstrings(text: &str) -> Result<Self> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        other => Err(Error::InvalidParameter(format!(
                            "invalid bit {other:?} in code file"
                        ))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Self::new(rows)
    }

    pub fn length(&self) -> usize {
        self.codewords[0].len()
    }

    /// log2 of the codeword count.
    pub fn dimension(&self) -> usize {
        self.codewords.len().trailing_zeros() as usize
    }

    /// Minimum nonzero Hamming weight, or 0 for the trivial code {0}.
    pub fn min_distance(&self) -> usize {
        self.codewords
            .iter()
            .map(|w| w.iter().filter(|&&b| b == 1).count())
            .filter(|&w| w > 0)
            .min()
            .unwrap_or(0)
    }

    pub fn generators(&self) -> &[Vec<u8>] {
        &self.generators
    }

    pub fn codewords(&self) -> &[Vec<u8>] {
        &self.codewords
    }

    pub fn distance_matrix(&self) -> &Vec<Vec<usize>> {
        &self.distances
    }
}

/// Reed-Muller code RM(r, m): length 2^m, generated by evaluations of all
/// monomials of degree at most r in m boolean variables. Point j has
/// coordinates x_i = bit i of j; monomials are ordered by degree, then
/// lexicographically by variable index set.
pub fn rm_code(r: usize, m: usize) -> Result<BinaryLinearCode> {
    if r > m || m == 0 || m > 20 {
        return Err(Error::InvalidParameter(format!("invalid Reed-Muller parameters ({r}, {m})")));
    }
    let length = 1usize << m;
    let mut generators = Vec::new();
    let mut subsets: Vec<Vec<usize>> = vec![vec![]];
    for deg in 1..=r {
        let mut stack = vec![(0usize, Vec::with_capacity(deg))];
        while let Some((start, partial)) = stack.pop() {
            if partial.len() == deg {
                subsets.push(partial);
                continue;
            }
            // push in reverse so pops come out in lexicographic order
            for v in (start..m).rev() {
                let mut next = partial.clone();
                next.push(v);
                stack.push((v + 1, next));
            }
        }
    }
    for vars in &subsets {
        let row: Vec<u8> = (0..length)
            .map(|point| vars.iter().all(|&v| point >> v & 1 == 1) as u8)
            .collect();
        generators.push(row);
    }
    BinaryLinearCode::new(generators)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::matfun::min_eig;

    fn cw(amps: Vec<f64>) -> CoherentCodeword {
        CoherentCodeword::new(amps.into_iter().map(|x| C64::new(x, 0.0)).collect()).unwrap()
    }

    pub(crate) fn ternary(alpha: f64) -> Codebook {
        Codebook::with_equal_priors(vec![cw(vec![-alpha]), cw(vec![0.0]), cw(vec![alpha])])
            .unwrap()
    }

    #[test]
    fn inner_product_normalization() {
        let a = cw(vec![0.7, -0.2]);
        assert!((inner_product(&a, &a).unwrap() - C64::ONE).norm() < 1e-15);
    }

    #[test]
    fn inner_product_single_mode_opposite() {
        let alpha = 0.8;
        let a = cw(vec![alpha]);
        let b = cw(vec![-alpha]);
        let expect = (-2.0 * alpha * alpha).exp();
        assert!((inner_product(&a, &b).unwrap().re - expect).abs() < 1e-15);
        assert!((inner_product(&a, &b).unwrap().im).abs() < 1e-16);
    }

    #[test]
    fn inner_product_two_mode_ppm_pair() {
        let alpha = 1.1;
        let a = cw(vec![alpha, 0.0]);
        let b = cw(vec![0.0, alpha]);
        let expect = (-alpha * alpha).exp();
        assert!((inner_product(&a, &b).unwrap().re - expect).abs() < 1e-15);
    }

    #[test]
    fn inner_product_conjugate_symmetry_complex() {
        let a = CoherentCodeword::new(vec![C64::new(0.3, 0.4), C64::new(-0.1, 0.9)]).unwrap();
        let b = CoherentCodeword::new(vec![C64::new(-0.5, 0.2), C64::new(0.8, 0.1)]).unwrap();
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
        assert!(ab.norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn inner_product_mode_mismatch() {
        let a = cw(vec![1.0]);
        let b = cw(vec![1.0, 0.0]);
        assert!(matches!(inner_product(&a, &b), Err(Error::ModeMismatch(1, 2))));
    }

    #[test]
    fn ppm_gram_two_distinct_entries() {
        let nbar = 1.3f64;
        let cb = ppm_codebook(5, C64::new(nbar.sqrt(), 0.0)).unwrap();
        let g = gram(&cb);
        let k2 = (-nbar).exp();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { k2 };
                assert!((g[(i, j)].re - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ternary_gram_isosceles() {
        let alpha = 0.9f64;
        let g = gram(&ternary(alpha));
        let k = (-alpha * alpha / 2.0).exp();
        assert!((g[(0, 1)].re - k).abs() < 1e-15);
        assert!((g[(1, 2)].re - k).abs() < 1e-15);
        assert!((g[(0, 2)].re - k.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn two_pulse_gram_three_distinct_entries() {
        let nbar = 0.8f64;
        let cb = two_pulse_ppm_codebook(5, C64::new(nbar.sqrt(), 0.0)).unwrap();
        assert_eq!(cb.len(), 10);
        let g = gram(&cb);
        let pairs = pair_list(5);
        let k2 = (-nbar).exp();
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for (b, &(k, l)) in pairs.iter().enumerate() {
                let shared = [i, j].iter().filter(|x| **x == k || **x == l).count();
                let expect = match shared {
                    2 => 1.0,
                    1 => k2,
                    _ => k2 * k2,
                };
                assert!((g[(a, b)].re - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn weighted_gram_scaling_and_point_mass() {
        let cb = ppm_codebook(4, C64::new(1.0, 0.0)).unwrap();
        let g = gram(&cb);
        let wg = weighted_gram(&cb);
        for i in 0..4 {
            for j in 0..4 {
                assert!((wg[(i, j)] - g[(i, j)] / 4.0).norm() < 1e-15);
            }
        }
        let point = Codebook::new(
            vec![cw(vec![1.0]), cw(vec![-1.0])],
            vec![1.0, 0.0],
        )
        .unwrap();
        let wg = weighted_gram(&point);
        assert!((wg[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(wg[(0, 1)].norm() < 1e-15);
        assert!(wg[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn pcppm_cross_block_diagonal() {
        let alpha = C64::new(0.9, 0.0);
        let cb = pcppm_codebook(4, alpha, -alpha).unwrap();
        assert_eq!(cb.len(), 8);
        let g = gram(&cb);
        let expect = (-2.0 * alpha.norm_sqr()).exp();
        for i in 0..4 {
            assert!((g[(i, i + 4)].re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn pcppm_degenerate_beta_equals_alpha_is_rank_deficient() {
        let alpha = C64::new(0.7, 0.0);
        let cb = pcppm_codebook(3, alpha, alpha).unwrap();
        let g = gram(&cb);
        assert!(min_eig(&g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bpsk_gram_depends_only_on_distance() {
        let code = rm_code(1, 3).unwrap();
        let alpha = C64::new(0.4, 0.0);
        let cb = bpsk_codebook(&code, alpha).unwrap();
        let g = gram(&cb);
        let sigma = (-2.0 * alpha.norm_sqr()).exp();
        let d = code.distance_matrix();
        for i in 0..cb.len() {
            for j in 0..cb.len() {
                assert!((g[(i, j)].re - sigma.powi(d[i][j] as i32)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constructed_grams_are_psd() {
        let cbs = vec![
            ppm_codebook(6, C64::new(0.9, 0.0)).unwrap(),
            two_pulse_ppm_codebook(5, C64::new(1.2, 0.0)).unwrap(),
            pcppm_codebook(4, C64::new(0.8, 0.0), C64::new(-0.8, 0.0)).unwrap(),
            ternary(0.6),
        ];
        for cb in cbs {
            assert!(min_eig(&gram(&cb)).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn rm_code_parameters() {
        let c13 = rm_code(1, 3).unwrap();
        assert_eq!((c13.length(), c13.dimension(), c13.min_distance()), (8, 4, 4));
        let c23 = rm_code(2, 3).unwrap();
        assert_eq!((c23.length(), c23.dimension(), c23.min_distance()), (8, 7, 2));
        let c03 = rm_code(0, 3).unwrap();
        assert_eq!(c03.codewords().len(), 2);
        assert!(c03.codewords().contains(&vec![1u8; 8]));
        assert!(rm_code(4, 3).is_err());
    }

    #[test]
    fn code_distance_matrix_is_xor_weight() {
        let code = rm_code(1, 3).unwrap();
        let words = code.codewords();
        let d = code.distance_matrix();
        for i in 0..words.len() {
            assert_eq!(d[i][i], 0);
            for j in 0..words.len() {
                let w = words[i].iter().zip(&words[j]).filter(|(a, b)| a != b).count();
                assert_eq!(d[i][j], w);
            }
        }
    }

    #[test]
    fn codebook_json_round_trip() {
        let cb = pcppm_codebook(3, C64::new(0.5, 0.25), C64::new(-0.5, 0.1)).unwrap();
        let text = cb.to_json();
        let back = Codebook::from_json(&text).unwrap();
        assert_eq!(cb, back);
        let g1 = gram(&cb);
        let g2 = gram(&back);
        assert!(g1.mat().max_abs_diff(g2.mat()) < 1e-15);

        // hand-written file with explicit priors and the "equal" keyword
        let text = r#"{"modes": 1, "priors": "equal",
                       "codewords": [[[0.5, 0.0]], [[-0.5, 0.0]]]}"#;
        let cb = Codebook::from_json(text).unwrap();
        assert_eq!(cb.priors(), &[0.5, 0.5]);
        let text = r#"{"modes": 1, "priors": [0.25, 0.75],
                       "codewords": [[[0.5, 0.0]], [[-0.5, 0.0]]]}"#;
        assert_eq!(Codebook::from_json(text).unwrap().priors(), &[0.25, 0.75]);
        let bad = r#"{"modes": 2, "priors": "equal", "codewords": [[[0.5, 0.0]]]}"#;
        assert!(Codebook::from_json(bad).is_err());
    }

    #[test]
    fn priors_validation() {
        let words = vec![cw(vec![1.0]), cw(vec![-1.0])];
        assert!(Codebook::new(words.clone(), vec![0.6, 0.6]).is_err());
        assert!(Codebook::new(words.clone(), vec![1.5, -0.5]).is_err());
        assert!(Codebook::new(words, vec![0.5, 0.5]).is_ok());
    }
}
