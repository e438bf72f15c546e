//! `symdisc_py`: the measurement library for Python. Codebooks, groups and
//! solutions are thin wrappers; matrices cross the boundary as lists of
//! lists of complex numbers, reports and diagnostics as dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use symdisc::matfun::ComplexMatrix;
use symdisc::symmetry::{self, Classification, PermutationGroup};
use symdisc::{baselines, cgu, coherent, gu, ykl};

fn to_py_err(e: symdisc::Error) -> PyErr {
    use symdisc::Error::*;
    match &e {
        InvalidParameter(_) | DimensionMismatch(_) | UnequalPriors | FormulaDomain(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn mat_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Coherent-state codebook with prior probabilities.
#[pyclass(frozen)]
struct Codebook {
    inner: coherent::Codebook,
}

#[pymethods]
impl Codebook {
    /// Parse the JSON interchange format:
    /// {"modes": int, "priors": [..] | "equal", "codewords": [[[re, im], ..], ..]}
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Codebook { inner: coherent::Codebook::from_json(text).map_err(to_py_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn priors(&self) -> Vec<f64> {
        self.inner.priors().to_vec()
    }

    /// Mode amplitudes of codeword `i`.
    fn codeword(&self, i: usize) -> PyResult<Vec<Complex64>> {
        let words = self.inner.codewords();
        words
            .get(i)
            .map(|w| w.amplitudes().to_vec())
            .ok_or_else(|| PyIndexError::new_err(format!("codeword {i} of {}", words.len())))
    }

    /// Gram matrix of pairwise inner products, as rows.
    fn gram(&self) -> Vec<Vec<Complex64>> {
        mat_rows(coherent::gram(&self.inner).mat())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Codebook({} codewords, {} modes)", self.inner.len(), self.inner.modes())
    }
}

/// Permutation group acting on codeword indices.
#[pyclass(frozen)]
struct Group {
    inner: PermutationGroup,
}

#[pymethods]
impl Group {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    /// All elements as 0-based image arrays.
    fn elements(&self) -> Vec<Vec<usize>> {
        self.inner
            .elements()
            .iter()
            .map(|p| (0..p.degree()).map(|i| p.apply(i)).collect())
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.order()
    }

    fn __repr__(&self) -> String {
        format!("Group(order {}, degree {})", self.inner.order(), self.inner.degree())
    }
}

/// A measurement in sqrt(Gram) coordinates: the solution matrix `x`, the
/// basis `w`, and what they imply.
#[pyclass(frozen)]
struct Solution {
    inner: ykl::MeasurementSolution,
}

#[pymethods]
impl Solution {
    #[getter]
    fn p_e(&self) -> f64 {
        self.inner.error_probability()
    }

    #[getter]
    fn p_s(&self) -> f64 {
        1.0 - self.inner.error_probability()
    }

    fn x(&self) -> Vec<Vec<Complex64>> {
        mat_rows(self.inner.x())
    }

    fn w(&self) -> Vec<Vec<Complex64>> {
        mat_rows(self.inner.w())
    }

    /// Row i, column j: probability of deciding j given i transmitted.
    fn conditionals(&self) -> Vec<Vec<f64>> {
        self.inner.conditionals().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Solution(p_e={:.6e})", self.inner.error_probability())
    }
}

#[pyfunction]
fn ppm(n: usize, alpha: Complex64) -> PyResult<Codebook> {
    Ok(Codebook { inner: coherent::ppm_codebook(n, alpha).map_err(to_py_err)? })
}

#[pyfunction]
fn two_pulse_ppm(n: usize, alpha: Complex64) -> PyResult<Codebook> {
    Ok(Codebook { inner: coherent::two_pulse_ppm_codebook(n, alpha).map_err(to_py_err)? })
}

#[pyfunction]
fn pcppm(n: usize, alpha: Complex64, beta: Complex64) -> PyResult<Codebook> {
    Ok(Codebook { inner: coherent::pcppm_codebook(n, alpha, beta).map_err(to_py_err)? })
}

#[pyfunction]
fn cyclic_group(n: usize) -> PyResult<Group> {
    Ok(Group { inner: symmetry::cyclic_group(n).map_err(to_py_err)? })
}

#[pyfunction]
fn two_orbit_cyclic_group(n: usize) -> PyResult<Group> {
    Ok(Group { inner: symmetry::two_orbit_cyclic_group(n).map_err(to_py_err)? })
}

#[pyfunction]
fn sn_pairs_group(n: usize) -> PyResult<Group> {
    Ok(Group { inner: symmetry::symmetric_group_on_pairs(n).map_err(to_py_err)? })
}

/// Permutations leaving the codebook's Gram matrix invariant.
#[pyfunction]
#[pyo3(signature = (codebook, tol = 1e-9))]
fn gram_automorphism_group(codebook: &Codebook, tol: f64) -> PyResult<Group> {
    let g = coherent::gram(&codebook.inner);
    Ok(Group { inner: symmetry::gram_automorphism_group(&g, tol).map_err(to_py_err)? })
}

/// GU / CGU / asymmetric verdict under a group action, as a dict with
/// "kind", "orbits", "orbit_sizes" and "group_order".
#[pyfunction]
#[pyo3(signature = (codebook, group, tol = 1e-9))]
fn classify<'py>(
    py: Python<'py>,
    codebook: &Codebook,
    group: &Group,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = coherent::gram(&codebook.inner);
    let cls = symmetry::classify(&g, &group.inner, tol).map_err(to_py_err)?;
    let dec = symmetry::orbits(&group.inner);
    let d = PyDict::new(py);
    d.set_item("orbits", dec.count())?;
    d.set_item("orbit_sizes", dec.sizes())?;
    d.set_item("group_order", group.inner.order())?;
    let kind = match cls {
        Classification::Gu { .. } => "gu",
        Classification::Cgu { .. } => "cgu",
        Classification::Asymmetric { .. } => "asymmetric",
    };
    d.set_item("kind", kind)?;
    Ok(d)
}

/// Pretty good measurement of an arbitrary ensemble.
#[pyfunction]
fn pgm(codebook: &Codebook) -> PyResult<Solution> {
    Ok(Solution { inner: gu::pgm(&codebook.inner).map_err(to_py_err)? })
}

/// Block-reduce under the group and solve the optimality equations.
/// Returns the solution and a diagnostics dict.
#[pyfunction]
fn solve_cgu<'py>(
    py: Python<'py>,
    codebook: &Codebook,
    group: &Group,
) -> PyResult<(Solution, Bound<'py, PyDict>)> {
    let bs = cgu::block_reduce(&codebook.inner, &group.inner).map_err(to_py_err)?;
    let (sol, diag) =
        cgu::solve_blocks_ykl_detailed(&bs, codebook.inner.priors()).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("branches_total", diag.branches_total)?;
    d.set_item("branches_converged", diag.branches_converged)?;
    d.set_item("branches_passing", diag.branches_passing)?;
    d.set_item("chosen_branch", diag.chosen_branch)?;
    d.set_item("eq2_residual", diag.eq2_residual)?;
    d.set_item("ineq_min_eig", diag.ineq_min_eig)?;
    d.set_item("iterations", diag.iterations)?;
    Ok((Solution { inner: sol }, d))
}

/// Solve with one real unknown per pair-orbit of the group. Returns the
/// solution and a dict with the class values and per-row distinct counts.
#[pyfunction]
#[pyo3(signature = (codebook, group, init = None))]
fn reduced_solve<'py>(
    py: Python<'py>,
    codebook: &Codebook,
    group: &Group,
    init: Option<Vec<f64>>,
) -> PyResult<(Solution, Bound<'py, PyDict>)> {
    let pattern = cgu::SymmetryPattern::from_group(&group.inner);
    let g = coherent::gram(&codebook.inner);
    let red = cgu::symmetry_reduced_solve(&g, &pattern, codebook.inner.priors(), init.as_deref())
        .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("class_values", red.class_values.clone())?;
    d.set_item("row_distinct", red.row_distinct.clone())?;
    d.set_item("iterations", red.iterations)?;
    d.set_item("residual", red.residual)?;
    Ok((Solution { inner: red.solution }, d))
}

/// Check a solution against the Yuen-Kennedy-Lax optimality conditions.
#[pyfunction]
#[pyo3(signature = (codebook, solution, tol = 1e-8))]
fn verify<'py>(
    py: Python<'py>,
    codebook: &Codebook,
    solution: &Solution,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = ykl::verify(&codebook.inner, &solution.inner, tol).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("eq1_residual", r.eq1_residual)?;
    d.set_item("eq2_residual", r.eq2_residual)?;
    d.set_item("ineq_min_eig", r.ineq_min_eig)?;
    d.set_item("eq1_pass", r.eq1_pass)?;
    d.set_item("eq2_pass", r.eq2_pass)?;
    d.set_item("ineq_pass", r.ineq_pass)?;
    d.set_item("pass", r.pass)?;
    d.set_item("tol", r.tol)?;
    Ok(d)
}

/// Search the length-8 second-order Reed-Muller code for the [8,3,2]
/// subcode whose reduced solution carries the quoted four values.
#[pyfunction]
fn find_fig1_subcode(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let hit = cgu::find_fig1_subcode().map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("generator_bits", hit.generator_bits.clone())?;
    d.set_item("min_distance", hit.code.min_distance())?;
    d.set_item("distance_matrix", hit.distance_matrix.clone())?;
    d.set_item("matched_values", hit.matched_values.clone())?;
    d.set_item("error_probability", hit.error_probability)?;
    d.set_item("candidates_tested", hit.candidates_tested)?;
    d.set_item("subcodes_enumerated", hit.subcodes_enumerated)?;
    d.set_item("row_distinct", hit.reduced.row_distinct.clone())?;
    Ok(d)
}

#[pyfunction]
fn ppm_mpe_pe(n: usize, nbar: f64) -> PyResult<f64> {
    gu::ppm_mpe_pe(n, nbar).map_err(to_py_err)
}

#[pyfunction]
fn two_pulse_ppm_mpe_ps(n: usize, nbar: f64) -> PyResult<f64> {
    gu::two_pulse_ppm_mpe_ps(n, nbar).map_err(to_py_err)
}

#[pyfunction]
fn pcppm_mpe_ps(n: usize, alpha: Complex64, beta: Complex64) -> PyResult<f64> {
    cgu::pcppm_mpe_ps(n, alpha, beta).map_err(to_py_err)
}

#[pyfunction]
fn ppm_pnr_pe(n: usize, nbar: f64) -> PyResult<f64> {
    baselines::ppm_pnr_pe(n, nbar).map_err(to_py_err)
}

#[pyfunction]
fn two_pulse_pnr_ps(n: usize, nbar: f64) -> PyResult<f64> {
    baselines::two_pulse_pnr_ps(n, nbar).map_err(to_py_err)
}

#[pyfunction]
fn pcppm_homodyne_ps(n: usize, nbar: f64) -> PyResult<f64> {
    baselines::pcppm_homodyne_ps(n, nbar).map_err(to_py_err)
}

#[pyfunction]
fn pcppm_structured_pe(n: usize, nbar: f64) -> PyResult<f64> {
    baselines::pcppm_structured_pe(n, nbar).map_err(to_py_err)
}

#[pyfunction]
fn dolinar_binary_pe(nb: f64) -> PyResult<f64> {
    baselines::dolinar_binary_pe(nb).map_err(to_py_err)
}

#[pymodule]
fn symdisc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Codebook>()?;
    m.add_class::<Group>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(ppm, m)?)?;
    m.add_function(wrap_pyfunction!(two_pulse_ppm, m)?)?;
    m.add_function(wrap_pyfunction!(pcppm, m)?)?;
    m.add_function(wrap_pyfunction!(cyclic_group, m)?)?;
    m.add_function(wrap_pyfunction!(two_orbit_cyclic_group, m)?)?;
    m.add_function(wrap_pyfunction!(sn_pairs_group, m)?)?;
    m.add_function(wrap_pyfunction!(gram_automorphism_group, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(pgm, m)?)?;
    m.add_function(wrap_pyfunction!(solve_cgu, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(find_fig1_subcode, m)?)?;
    m.add_function(wrap_pyfunction!(ppm_mpe_pe, m)?)?;
    m.add_function(wrap_pyfunction!(two_pulse_ppm_mpe_ps, m)?)?;
    m.add_function(wrap_pyfunction!(pcppm_mpe_ps, m)?)?;
    m.add_function(wrap_pyfunction!(ppm_pnr_pe, m)?)?;
    m.add_function(wrap_pyfunction!(two_pulse_pnr_ps, m)?)?;
    m.add_function(wrap_pyfunction!(pcppm_homodyne_ps, m)?)?;
    m.add_function(wrap_pyfunction!(pcppm_structured_pe, m)?)?;
    m.add_function(wrap_pyfunction!(dolinar_binary_pe, m)?)?;
    Ok(())
}
