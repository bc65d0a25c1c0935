//! Python bindings: step functions, sequences, matrices, the Calderón-type
//! operators, the optimal-range LP and the verification suites.

use calderon_core::matrix;
use calderon_core::spaces::{self, SpaceSpec};
use calderon_core::{operators, optimal_range, rearrangement, verify, Error};
use num_complex::Complex64;
use pyo3::exceptions::{PyNotImplementedError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::Unsupported(m) => PyNotImplementedError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn space(s: &str) -> PyResult<SpaceSpec> {
    s.parse::<SpaceSpec>().map_err(err)
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Step function on `(0, ∞)`: `values[i]` on `(breakpoints[i-1], breakpoints[i]]`.
#[pyclass(frozen, skip_from_py_object, module = "calderon")]
#[derive(Clone)]
struct StepFunction(rearrangement::StepFunction);

#[pymethods]
impl StepFunction {
    #[new]
    fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        rearrangement::StepFunction::new(breakpoints, values).map(Self).map_err(err)
    }

    #[getter]
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn __call__(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    fn integral(&self) -> f64 {
        self.0.integral()
    }

    /// Decreasing rearrangement.
    fn rearrange(&self) -> Self {
        Self(rearrangement::mu_step(&self.0).into_step())
    }

    fn norm(&self, space_name: &str) -> PyResult<f64> {
        spaces::norm(&self.0, &space(space_name)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("StepFunction(breakpoints={:?}, values={:?})", self.0.breakpoints(), self.0.values())
    }
}

/// Finite real sequence starting at index `offset`.
#[pyclass(frozen, skip_from_py_object, module = "calderon")]
#[derive(Clone)]
struct Seq(rearrangement::Seq);

#[pymethods]
impl Seq {
    #[new]
    #[pyo3(signature = (entries, offset = 0))]
    fn new(entries: Vec<f64>, offset: i64) -> PyResult<Self> {
        rearrangement::Seq::new(offset, entries).map(Self).map_err(err)
    }

    #[getter]
    fn entries(&self) -> Vec<f64> {
        self.0.entries().to_vec()
    }

    #[getter]
    fn offset(&self) -> i64 {
        self.0.offset()
    }

    fn __getitem__(&self, k: i64) -> f64 {
        self.0.get(k)
    }

    fn rearrange(&self) -> Self {
        Self(rearrangement::mu_seq(&self.0))
    }

    /// Norm in a sequence space, e.g. `"d:weak-l1"`; the `d:` prefix is optional.
    fn norm(&self, space_name: &str) -> PyResult<f64> {
        spaces::norm(&self.0, &space(space_name)?.as_discrete()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Seq(entries={:?}, offset={})", self.0.entries(), self.0.offset())
    }
}

/// Dense complex `n × n` matrix.
#[pyclass(frozen, skip_from_py_object, module = "calderon")]
#[derive(Clone)]
struct MatrixOp(matrix::MatrixOp);

#[pymethods]
impl MatrixOp {
    #[new]
    #[pyo3(signature = (re, im = None))]
    fn new(re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let n = re.len();
        let im = im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
        if im.len() != n || re.iter().chain(&im).any(|r| r.len() != n) {
            return Err(PyValueError::new_err(format!("rows must be {n} × {n}")));
        }
        let data = re
            .iter()
            .zip(&im)
            .flat_map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| Complex64::new(a, b)))
            .collect();
        matrix::MatrixOp::new(n, data).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.dim()
    }

    fn entries(&self) -> Vec<Vec<Complex64>> {
        let n = self.0.dim();
        (0..n).map(|i| (0..n).map(|j| self.0.get(i, j)).collect()).collect()
    }

    fn singular_values(&self) -> PyResult<Vec<f64>> {
        self.0.singular_values().map(|s| s.entries().to_vec()).map_err(err)
    }

    /// Triangular truncation: lower part kept, diagonal zeroed, upper negated.
    fn truncate(&self) -> Self {
        Self(matrix::triangular_truncate(&self.0))
    }

    fn norm(&self, space_name: &str) -> PyResult<f64> {
        matrix::schatten_norm(&self.0, &space(space_name)?).map_err(err)
    }
}

fn profile(op: &str, x: &rearrangement::StepFunction) -> PyResult<operators::CalderonProfile> {
    Ok(match op {
        "cesaro" => operators::cesaro(x),
        "cesaro-dual" => operators::cesaro_dual(x),
        "calderon" => operators::calderon(x),
        other => return Err(PyValueError::new_err(format!("unknown operator {other:?}"))),
    })
}

/// Evaluates `cesaro`, `cesaro-dual` or `calderon` applied to `x` at each `t`.
#[pyfunction]
fn apply(op: &str, x: &StepFunction, ts: Vec<f64>) -> PyResult<Vec<f64>> {
    let p = profile(op, &x.0)?;
    Ok(ts.into_iter().map(|t| p.eval(t)).collect())
}

#[pyfunction]
fn calderon_discrete(a: &Seq, len: usize) -> PyResult<Seq> {
    operators::calderon_discrete(&a.0, len).map(Seq).map_err(err)
}

/// Discrete Hilbert transform on indices `lo..=hi`.
#[pyfunction]
fn hilbert_discrete(a: &Seq, lo: i64, hi: i64) -> PyResult<Vec<Complex64>> {
    operators::hilbert_discrete(&a.0, lo, hi)
        .map(|s| s.entries().to_vec())
        .map_err(err)
}

#[pyfunction]
fn hilbert_step(x: &StepFunction, t: f64) -> PyResult<f64> {
    operators::hilbert_step(&(&x.0).into(), t).map_err(err)
}

/// Double operator integral `T_f^A(V)` for hermitian `A` and a named Lipschitz `f`.
#[pyfunction]
fn doi_apply(a: &MatrixOp, f: &str, v: &MatrixOp) -> PyResult<MatrixOp> {
    let f = matrix::LipschitzFn::parse(f).map_err(err)?;
    matrix::doi_schur(&a.0, &f, &v.0).map(MatrixOp).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b, f, space_e = "l2", space_f = "l2"))]
fn commutator_check<'py>(
    py: Python<'py>,
    a: &MatrixOp,
    b: &MatrixOp,
    f: &str,
    space_e: &str,
    space_f: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let f = matrix::LipschitzFn::parse(f).map_err(err)?;
    let rep = matrix::lipschitz_commutator_check(&a.0, &b.0, &f, &space(space_e)?, &space(space_f)?).map_err(err)?;
    to_py(py, &rep)
}

/// Certified upper bound for the optimal-range norm of `x`, with witness.
#[pyfunction]
#[pyo3(signature = (x, space_name = "l1", depth = 2))]
fn fnorm<'py>(py: Python<'py>, x: &StepFunction, space_name: &str, depth: u32) -> PyResult<Bound<'py, PyAny>> {
    let bound = optimal_range::fnorm_upper(&x.0, &space(space_name)?, depth).map_err(err)?;
    to_py(py, &bound)
}

/// Runs one verification suite, or all of them with `theorem_id = "all"`.
#[pyfunction]
#[pyo3(signature = (theorem_id, seed, trials = None, sizes = None))]
fn run_verify<'py>(
    py: Python<'py>,
    theorem_id: &str,
    seed: u64,
    trials: Option<usize>,
    sizes: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    if theorem_id == "all" {
        let rep = py.detach(|| verify::run_all(seed)).map_err(err)?;
        return to_py(py, &rep.comparable());
    }
    let params = verify::RunParams { seed, trials, sizes };
    let rep = py.detach(|| verify::run_theorem(theorem_id, &params)).map_err(err)?;
    to_py(py, &rep.comparable())
}

#[pymodule]
fn calderon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<StepFunction>()?;
    m.add_class::<Seq>()?;
    m.add_class::<MatrixOp>()?;
    m.add_function(wrap_pyfunction!(apply, m)?)?;
    m.add_function(wrap_pyfunction!(calderon_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_step, m)?)?;
    m.add_function(wrap_pyfunction!(doi_apply, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_check, m)?)?;
    m.add_function(wrap_pyfunction!(fnorm, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add("THEOREM_IDS", verify::THEOREM_IDS.to_vec())?;
    Ok(())
}
