//! Python bindings: pointed structures, trace relation checks, formula
//! synthesis and evaluation, unravelings, games and verification suites.

use arboreal::games::{solve_bisim, solve_ef, TupleStructure};
use arboreal::logic::{parse_formula, synth_distinguishing, Fragment, Model};
use arboreal::oracle::{run_suite, SuiteParams};
use arboreal::structures::PointedStructure;
use arboreal::traces::{check_trace_relation, Bound as TraceBound, Relation};
use arboreal::unravel::{ml_graft, ml_unravel, pr_unravel, tree_unravel};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: arboreal::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite pointed structure.
#[pyclass(name = "Structure", module = "arboreal", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStructure {
    inner: PointedStructure,
}

#[pymethods]
impl PyStructure {
    /// Parses a structure from its JSON text.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        PointedStructure::from_json(text).map(|inner| PyStructure { inner }).map_err(py_err)
    }

    /// Loads a structure from a file.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        PointedStructure::read(std::path::Path::new(path)).map(|inner| PyStructure { inner }).map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn point(&self) -> String {
        self.inner.point_id().to_string()
    }

    #[getter]
    fn universe(&self) -> Vec<String> {
        self.inner.base.universe().to_vec()
    }

    fn ball(&self, k: usize) -> Self {
        PyStructure { inner: self.inner.ball(k) }
    }

    fn __len__(&self) -> usize {
        self.inner.base.len()
    }

    fn __repr__(&self) -> String {
        format!("Structure(point={:?}, size={})", self.inner.point_id(), self.inner.base.len())
    }
}

/// Decides a trace relation. `k=None` selects the exact check. Returns the
/// verdict and the rendered witness, if any.
#[pyfunction]
#[pyo3(signature = (rel, a, b, k=None))]
fn check(rel: &str, a: &PyStructure, b: &PyStructure, k: Option<usize>) -> PyResult<(bool, Option<String>)> {
    let rel: Relation = rel.parse().map_err(py_err)?;
    let bound = k.map_or(TraceBound::Exact, TraceBound::Depth);
    let v = check_trace_relation(rel, &a.inner, &b.inner, bound).map_err(py_err)?;
    let sig = a.inner.signature();
    Ok((v.holds, v.witness.map(|w| w.render(&sig.props(), &sig.acts()))))
}

/// Whether Duplicator wins the `k`-round bisimulation game.
#[pyfunction]
fn bisimilar(a: &PyStructure, b: &PyStructure, k: usize) -> PyResult<bool> {
    Ok(solve_bisim(&a.inner, &b.inner, k).map_err(py_err)?.duplicator_wins())
}

/// Whether Duplicator wins the rank-`r` Ehrenfeucht–Fraïssé game.
#[pyfunction]
fn ef_equivalent(a: &PyStructure, b: &PyStructure, r: usize) -> PyResult<bool> {
    let (x, y) = (TupleStructure::from(&a.inner), TupleStructure::from(&b.inner));
    Ok(solve_ef(&x, &y, r).map_err(py_err)?.duplicator_wins())
}

/// A formula of `fragment` true on exactly one side, or `None`.
#[pyfunction]
#[pyo3(signature = (fragment, a, b, k=None))]
fn distinguish(fragment: &str, a: &PyStructure, b: &PyStructure, k: Option<usize>) -> PyResult<Option<String>> {
    let fragment: Fragment = fragment.parse().map_err(py_err)?;
    let f = synth_distinguishing(&a.inner, &b.inner, k, fragment).map_err(py_err)?;
    Ok(f.map(|f| f.to_string()))
}

/// Truth value of a formula at the point.
#[pyfunction]
fn eval_formula(formula: &str, s: &PyStructure) -> PyResult<bool> {
    let f = parse_formula(formula).map_err(py_err)?;
    Model::new(&s.inner).and_then(|m| m.eval(&f)).map_err(py_err)
}

/// Unraveling `ML`, `TREE` or `PR` as forest JSON, or `GRAFT` as structure
/// JSON.
#[pyfunction]
#[pyo3(signature = (comonad, s, k, length=None))]
fn unravel(comonad: &str, s: &PyStructure, k: usize, length: Option<usize>) -> PyResult<String> {
    let p = &s.inner;
    let text = match comonad.to_ascii_uppercase().as_str() {
        "ML" => ml_unravel(p, k).map_err(py_err)?.to_json(),
        "TREE" => tree_unravel(p, k).map_err(py_err)?.to_json(),
        "GRAFT" => ml_graft(p, k).map_err(py_err)?.to_json(),
        "PR" => {
            let n = length.ok_or_else(|| PyValueError::new_err("PR needs a length"))?;
            pr_unravel(&p.base, k, n).map_err(py_err)?.to_json()
        }
        other => return Err(PyValueError::new_err(format!("unknown comonad `{other}`"))),
    };
    Ok(text)
}

/// Runs a verification suite and returns its report text.
#[pyfunction]
#[pyo3(signature = (name, size=3, k=2, samples=20, seed=0, length=4))]
fn verify(name: &str, size: usize, k: usize, samples: usize, seed: u64, length: usize) -> PyResult<(bool, String)> {
    let params = SuiteParams { size, k, samples, seed, len: length, ..SuiteParams::default() };
    let report = run_suite(name, &params).map_err(py_err)?;
    Ok((report.passed(), report.to_string()))
}

#[pymodule(name = "arboreal")]
fn arboreal_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(bisimilar, m)?)?;
    m.add_function(wrap_pyfunction!(ef_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(distinguish, m)?)?;
    m.add_function(wrap_pyfunction!(eval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(unravel, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
