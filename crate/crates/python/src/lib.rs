//! Python bindings. Data crosses the boundary as the same JSON documents the
//! command-line tool reads and writes, so files produced on either side are
//! interchangeable.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;

use qtrop::annulus::{good_coordinate, q_residue_annulus, AnnulusQForm};
use qtrop::datum::ReductionDatum;
use qtrop::lifting::{cover_ledger, lift_star};
use qtrop::model::{lift, reduce_model, FormalModel};
use qtrop::psd::{psd_value, psd_zero_test, select_roots_sum_zero};
use qtrop::rational::{q, qi};
use qtrop::validate::{validate, Mode};
use qtrop::{fixtures, CycloRational, Error, ValuedScalar};

fn err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } | Error::MalformedDatum(_) | Error::MalformedForm(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse(text: &str) -> PyResult<Value> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid JSON: {e}")))
}

fn dump(v: &Value) -> String {
    serde_json::to_string(v).expect("JSON values serialize")
}

/// A truncated Puiseux series in the uniformizer π.
#[pyclass(name = "Scalar", frozen, from_py_object)]
#[derive(Clone)]
struct PyScalar(ValuedScalar);

#[pymethods]
impl PyScalar {
    /// `num/den · π^(e_num/e_den)`, exact.
    #[new]
    #[pyo3(signature = (num, den=1, e_num=0, e_den=1))]
    fn new(num: i64, den: i64, e_num: i64, e_den: i64) -> PyResult<Self> {
        if den == 0 || e_den == 0 {
            return Err(PyValueError::new_err("zero denominator"));
        }
        Ok(PyScalar(ValuedScalar::monomial(CycloRational::from_rational(q(num, den)), q(e_num, e_den))))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ValuedScalar::from_json(&parse(text)?, "scalar").map(PyScalar).map_err(err)
    }

    fn to_json(&self) -> String {
        dump(&self.0.to_json())
    }

    /// Valuation as `(num, den)`, or `None` for zero.
    fn valuation(&self) -> Option<(String, String)> {
        self.0.valuation().map(|v| (v.numer().to_string(), v.denom().to_string()))
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn truncate(&self, prec: i64) -> Self {
        PyScalar(self.0.truncate(&qi(prec)))
    }

    fn nth_root(&self, k: u32) -> PyResult<Self> {
        self.0.nth_root(k).map(PyScalar).map_err(err)
    }

    fn __add__(&self, other: &Self) -> Self {
        PyScalar(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyScalar(self.0.sub(&other.0))
    }

    fn __mul__(&self, other: &Self) -> Self {
        PyScalar(self.0.mul(&other.0))
    }

    fn __neg__(&self) -> Self {
        PyScalar(self.0.neg())
    }

    fn __pow__(&self, e: i64, _modulo: Option<i64>) -> PyResult<Self> {
        self.0.pow(e).map(PyScalar).map_err(err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Scalar({})", self.0)
    }
}

/// A tropical reduction datum.
#[pyclass(name = "Datum", frozen)]
struct PyDatum(ReductionDatum);

#[pymethods]
impl PyDatum {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ReductionDatum::from_json(&parse(text)?).map(PyDatum).map_err(err)
    }

    /// One of the built-in data sets (`fixture_names()` lists them).
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::by_name(name)
            .map(PyDatum)
            .ok_or_else(|| PyValueError::new_err(format!("no fixture called {name:?}")))
    }

    fn to_json(&self) -> String {
        dump(&self.0.to_json())
    }

    #[getter]
    fn q(&self) -> u32 {
        self.0.q
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.0.curve.vertices.iter().map(|v| v.id.clone()).collect()
    }

    /// The violation report as JSON; `permissive` demotes antisymmetry failures.
    #[pyo3(signature = (permissive=false))]
    fn validate(&self, permissive: bool) -> PyResult<String> {
        let mode = if permissive { Mode::Permissive } else { Mode::Strict };
        validate(&self.0, mode).map(|r| dump(&r.to_json())).map_err(err)
    }

    #[pyo3(signature = (permissive=false))]
    fn is_valid(&self, permissive: bool) -> PyResult<bool> {
        let mode = if permissive { Mode::Permissive } else { Mode::Strict };
        validate(&self.0, mode).map(|r| r.is_empty()).map_err(err)
    }

    /// The lifted star chart of one vertex, as JSON.
    fn lift_star(&self, vertex: &str) -> PyResult<String> {
        lift_star(&self.0, vertex).map(|c| dump(&c.to_json())).map_err(err)
    }

    fn lift(&self) -> PyResult<Model> {
        lift(&self.0).map(Model).map_err(err)
    }

    /// Human-readable differences from `other`; empty when they agree.
    fn differences(&self, other: &PyDatum) -> Vec<String> {
        self.0.differences(&other.0)
    }
}

/// A glued formal model built from lifted star charts.
#[pyclass(frozen)]
struct Model(FormalModel);

#[pymethods]
impl Model {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        FormalModel::from_json(&parse(text)?).map(Model).map_err(err)
    }

    fn to_json(&self) -> String {
        dump(&self.0.to_json())
    }

    fn reduce(&self) -> PyResult<PyDatum> {
        reduce_model(&self.0).map(PyDatum).map_err(err)
    }

    #[getter]
    fn charts(&self) -> usize {
        self.0.charts.len()
    }

    #[getter]
    fn transitions(&self) -> usize {
        self.0.transitions.len()
    }
}

/// A q-differential on an annulus.
#[pyclass(name = "AnnulusForm", frozen)]
struct PyAnnulusForm(AnnulusQForm);

#[pymethods]
impl PyAnnulusForm {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        AnnulusQForm::from_json(&parse(text)?, "form").map(PyAnnulusForm).map_err(err)
    }

    fn to_json(&self) -> String {
        dump(&self.0.to_json())
    }

    #[getter]
    fn dominant(&self) -> i64 {
        self.0.dominant()
    }

    /// Good coordinate and normal form, as JSON.
    fn good_coordinate(&self) -> PyResult<String> {
        good_coordinate(&self.0).map(|g| dump(&g.to_json())).map_err(err)
    }

    fn q_residue(&self) -> PyResult<PyScalar> {
        q_residue_annulus(&self.0).map(PyScalar).map_err(err)
    }

    fn reverse_orientation(&self) -> PyResult<Self> {
        self.0.reverse_orientation().map(PyAnnulusForm).map_err(err)
    }
}

fn scalars(values: Vec<PyScalar>) -> Vec<ValuedScalar> {
    values.into_iter().map(|s| s.0).collect()
}

/// `P_{s,d}(R_1, …, R_s)`.
#[pyfunction]
#[pyo3(signature = (values, d, conductor=1))]
fn psd(values: Vec<PyScalar>, d: u32, conductor: u32) -> PyResult<PyScalar> {
    psd_value(&scalars(values), d, conductor).map(PyScalar).map_err(err)
}

/// Whether some choice of `d`-th roots sums to zero.
#[pyfunction]
#[pyo3(signature = (values, d, conductor=1))]
fn psd_is_zero(values: Vec<PyScalar>, d: u32, conductor: u32) -> PyResult<bool> {
    psd_zero_test(&scalars(values), d, conductor).map_err(err)
}

/// The first zero-sum tuple of roots in lexicographic phase order.
#[pyfunction]
#[pyo3(signature = (values, d, conductor=1))]
fn zero_sum_roots(values: Vec<PyScalar>, d: u32, conductor: u32) -> PyResult<Option<Vec<PyScalar>>> {
    select_roots_sum_zero(&scalars(values), d, conductor)
        .map(|o| o.map(|v| v.into_iter().map(PyScalar).collect()))
        .map_err(err)
}

/// `(l_i, l, d_i, d, f_i)` for the canonical cover of a q-form with orders `m`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn ledger(q_: u32, m: Vec<i64>) -> PyResult<(Vec<u32>, u32, Vec<u32>, u32, Vec<u32>)> {
    let l = cover_ledger(q_, &m).map_err(err)?;
    Ok((l.l_i, l.l, l.d_i, l.d, l.fibers))
}

#[pyfunction]
fn fixture_names() -> Vec<&'static str> {
    fixtures::all().into_iter().map(|(n, _)| n).collect()
}

/// Runs the command-line front end in-process; returns `(status, report)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String) {
    let out = qtrop::cli::run_args(std::iter::once("qtrop".to_string()).chain(args));
    (out.status, out.render())
}

#[pymodule]
pub fn qtrop_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScalar>()?;
    m.add_class::<PyDatum>()?;
    m.add_class::<Model>()?;
    m.add_class::<PyAnnulusForm>()?;
    m.add_function(wrap_pyfunction!(psd, m)?)?;
    m.add_function(wrap_pyfunction!(psd_is_zero, m)?)?;
    m.add_function(wrap_pyfunction!(zero_sum_roots, m)?)?;
    m.add_function(wrap_pyfunction!(ledger, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
