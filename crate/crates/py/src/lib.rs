//! Python bindings. Field elements cross the boundary as their integer indices.

use std::sync::Arc;

use hermitian_core::census::{self, Shard};
use hermitian_core::cli::{self, RunConfig};
use hermitian_core::{bounds, hermitian, sections, zeta};
use hermitian_core::{Elem, HermitianMatrix, HomPoly, Matrix};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn elems(v: &[u32]) -> Vec<Elem> {
    v.iter().map(|&x| Elem(x)).collect()
}

fn indices(m: &Matrix) -> Vec<Vec<u32>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|e| e.0).collect()).collect()
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string(v).unwrap()
}

#[pyclass(name = "Field", module = "hermitian_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: Arc<hermitian_core::Field>,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(q: u64) -> PyResult<Self> {
        Ok(PyField { inner: hermitian_core::Field::registry(q).map_err(value_err)? })
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.p()
    }

    #[getter]
    fn modulus(&self) -> Vec<u32> {
        self.inner.spec().modulus.clone()
    }

    /// Index of `w`, the smallest primitive element.
    #[getter]
    fn primitive(&self) -> u32 {
        self.inner.primitive().0
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        self.inner.add(Elem(a), Elem(b)).0
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        self.inner.mul(Elem(a), Elem(b)).0
    }

    fn inv(&self, a: u32) -> PyResult<u32> {
        Ok(self.inner.inv(Elem(a)).map_err(value_err)?.0)
    }

    fn conj(&self, a: u32) -> PyResult<u32> {
        Ok(self.inner.conj(Elem(a)).map_err(value_err)?.0)
    }

    fn norm(&self, a: u32) -> PyResult<u32> {
        Ok(self.inner.norm(Elem(a)).map_err(value_err)?.0)
    }

    fn __repr__(&self) -> String {
        format!("Field(q={}, modulus={:?})", self.inner.q(), self.inner.spec().modulus)
    }
}

#[pyclass(name = "Poly", module = "hermitian_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPoly {
    inner: HomPoly,
}

#[pymethods]
impl PyPoly {
    #[new]
    #[pyo3(signature = (field, text, nvars=None))]
    fn new(field: &PyField, text: &str, nvars: Option<usize>) -> PyResult<Self> {
        Ok(PyPoly { inner: HomPoly::parse(&field.inner, text, nvars).map_err(value_err)? })
    }

    #[staticmethod]
    fn hermitian(field: &PyField, nvars: usize) -> PyResult<Self> {
        Ok(PyPoly { inner: hermitian::standard_form(&field.inner, nvars).map_err(value_err)? })
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.degree()
    }

    #[getter]
    fn field(&self) -> PyField {
        PyField { inner: self.inner.field().clone() }
    }

    fn evaluate(&self, point: Vec<u32>) -> PyResult<u32> {
        if point.len() != self.inner.nvars() {
            return Err(value_err(format!("expected {} coordinates", self.inner.nvars())));
        }
        Ok(self.inner.evaluate(&elems(&point)).0)
    }

    /// Projective zeros over `F_{q^m}`.
    #[pyo3(signature = (m=1))]
    fn count_points(&self, m: u32) -> PyResult<u64> {
        let ext = self.inner.field().extension(m).map_err(value_err)?;
        self.inner.count_points(&ext).map_err(value_err)
    }

    /// `(rho, HermitianMatrix)` or `None`.
    fn detect_hermitian(&self) -> PyResult<Option<(u32, PyHermitianMatrix)>> {
        let found = hermitian::detect_hermitian(&self.inner).map_err(value_err)?;
        Ok(found.map(|(rho, a)| (rho.0, PyHermitianMatrix { inner: a })))
    }

    fn substitute(&self, matrix: Vec<Vec<u32>>) -> PyResult<Self> {
        let m = Matrix::from_indices(self.inner.field(), &matrix);
        if m.rows() != self.inner.nvars() {
            return Err(value_err("matrix must have one row per variable"));
        }
        Ok(PyPoly { inner: self.inner.substitute(&m) })
    }

    fn scalar_equal(&self, other: &PyPoly) -> bool {
        self.inner.scalar_equal(&other.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly(q={}, '{}')", self.inner.field().q(), self.inner)
    }
}

#[pyclass(name = "HermitianMatrix", module = "hermitian_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHermitianMatrix {
    inner: HermitianMatrix,
}

#[pymethods]
impl PyHermitianMatrix {
    #[new]
    fn new(field: &PyField, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        Ok(PyHermitianMatrix { inner: HermitianMatrix::from_indices(&field.inner, &rows).map_err(value_err)? })
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<u32>> {
        indices(self.inner.matrix())
    }

    fn is_nonsingular(&self) -> bool {
        self.inner.is_nonsingular()
    }

    fn to_poly(&self) -> PyPoly {
        PyPoly { inner: self.inner.to_polynomial() }
    }

    /// `P` with `conj(P)^T A P = I`.
    fn standardize(&self) -> PyResult<Vec<Vec<u32>>> {
        Ok(indices(&self.inner.standardize().map_err(value_err)?))
    }

    fn __repr__(&self) -> String {
        format!("HermitianMatrix({:?})", self.rows())
    }
}

#[pyfunction]
fn predicted_count(n: u32, q: u64) -> PyResult<u64> {
    hermitian::predicted_count(n, q).map_err(value_err)
}

/// `(nu1, nu2, other)` over all planes.
#[pyfunction]
fn section_tallies(surface: &PyPoly) -> PyResult<(u64, u64, u64)> {
    Ok(sections::section_survey(&surface.inner).map_err(value_err)?.tallies())
}

/// Full plane-section report as JSON.
#[pyfunction]
fn section_survey(surface: &PyPoly) -> PyResult<String> {
    Ok(to_json(&sections::section_survey(&surface.inner).map_err(value_err)?))
}

#[pyfunction]
fn lines_on_surface(surface: &PyPoly) -> PyResult<usize> {
    Ok(sections::lines_on_surface(&surface.inner).map_err(value_err)?.len())
}

#[pyfunction]
fn bound_check(poly: &PyPoly) -> PyResult<String> {
    let ambient = match poly.inner.nvars() {
        3 => bounds::Ambient::Curve,
        4 => bounds::Ambient::Surface,
        n => return Err(value_err(format!("bounds take 3 or 4 variables, got {n}"))),
    };
    Ok(to_json(&bounds::check(&poly.inner, ambient).map_err(value_err)?))
}

#[pyfunction]
fn weil_deligne(n: u32, d: u32, q: u64) -> PyResult<u64> {
    bounds::weil_deligne(n, d, q).map_err(value_err)
}

#[pyfunction]
fn elementary(d: u32, q: u64) -> PyResult<u64> {
    bounds::elementary(d, q).map_err(value_err)
}

/// `[(c, m), ...]` for `prod (1 - c t)^(-m)`.
#[pyfunction]
fn hermitian_zeta(q: u64) -> PyResult<Vec<(u64, u32)>> {
    Ok(zeta::hermitian_surface_zeta(q).map_err(value_err)?.factors().collect())
}

#[pyfunction]
fn zeta_count(factors: Vec<(u64, u32)>, m: u32) -> PyResult<u128> {
    zeta::point_counts_from_zeta(&zeta::ZetaRational::new(factors), m).map_err(value_err)
}

/// `(transform rows, HermitianMatrix)` or `None` when the hypotheses fail.
#[pyfunction]
fn reconstruct_hermitian(surface: &PyPoly) -> PyResult<Option<(Vec<Vec<u32>>, PyHermitianMatrix)>> {
    match census::reconstruct_hermitian(&surface.inner) {
        Ok(found) => Ok(found.map(|(t, a)| (indices(t.matrix()), PyHermitianMatrix { inner: a }))),
        Err(e) if e.is_structural() => Err(PyRuntimeError::new_err(e.to_string())),
        Err(e) => Err(value_err(e)),
    }
}

/// Census summary of shard `index` of `count`, as JSON.
#[pyfunction]
#[pyo3(signature = (index=0, count=1))]
fn cubic_census(index: u32, count: u32) -> PyResult<String> {
    let shard: Shard = format!("{index}/{count}").parse().map_err(value_err)?;
    census::cubic_census_f4(shard, |_| {}).map(|s| to_json(&s)).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyfunction]
#[pyo3(signature = (q, trials, seed=1))]
fn surface_probe(q: u64, trials: u64, seed: u64) -> PyResult<String> {
    census::random_surface_probe(q, trials, seed, Shard::ALL)
        .map(|s| to_json(&s))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Runs the command line on `args` (without the program name); returns the report JSON.
#[pyfunction]
fn run(args: Vec<String>) -> PyResult<String> {
    use clap::Parser;
    let config = RunConfig::try_parse_from(std::iter::once("hermitian".to_string()).chain(args)).map_err(value_err)?;
    Ok(cli::run(&config).map_err(value_err)?.to_json())
}

#[pymodule]
fn hermitian_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyPoly>()?;
    m.add_class::<PyHermitianMatrix>()?;
    m.add_function(wrap_pyfunction!(predicted_count, m)?)?;
    m.add_function(wrap_pyfunction!(section_tallies, m)?)?;
    m.add_function(wrap_pyfunction!(section_survey, m)?)?;
    m.add_function(wrap_pyfunction!(lines_on_surface, m)?)?;
    m.add_function(wrap_pyfunction!(bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(weil_deligne, m)?)?;
    m.add_function(wrap_pyfunction!(elementary, m)?)?;
    m.add_function(wrap_pyfunction!(hermitian_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_count, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_hermitian, m)?)?;
    m.add_function(wrap_pyfunction!(cubic_census, m)?)?;
    m.add_function(wrap_pyfunction!(surface_probe, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", cli::VERSION)?;
    Ok(())
}
