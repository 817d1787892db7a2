//! Python bindings. Configuration travels as keyword arguments that are
//! merged field by field into the defaults of the corresponding Rust type.

use std::path::PathBuf;

use lanczos_descent::directions::{compute_directions, DirectionSettings};
use lanczos_descent::harness::{self, Experiment};
use lanczos_descent::hvp::{FdSettings, HvpOperator};
use lanczos_descent::problems::{full_gradient, full_value, ProblemKind, ProblemSpec};
use lanczos_descent::{
    assemble_step, lanczos, Algorithm, ComponentObjective, Error, HessianScope, HvpMode, LanczosFactorization,
    LinearOperator, RunConfig, RunOutcome, StepRule,
};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::NonFinite(_) | Error::SingularTridiagonal => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_python<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_python(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Overwrites fields of `base` recursively; unknown fields are errors.
fn merge_into(base: &mut Value, patch: Value, path: &str) -> PyResult<()> {
    match (base, patch) {
        (Value::Object(dst), Value::Object(src)) => {
            for (k, v) in src {
                let full = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match dst.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_into(slot, v, &full)?,
                    Some(slot) => *slot = v,
                    None => return Err(PyValueError::new_err(format!("unknown option `{full}`"))),
                }
            }
            Ok(())
        }
        (dst, v) => {
            *dst = v;
            Ok(())
        }
    }
}

fn with_overrides<T: Serialize + DeserializeOwned>(base: &T, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<T> {
    let mut value = serde_json::to_value(base).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some(kw) = kwargs {
        merge_into(&mut value, from_python(kw.as_any())?, "")?;
    }
    serde_json::from_value(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A seeded finite-sum objective.
#[pyclass(frozen, module = "lanczos_descent")]
struct Problem {
    spec: ProblemSpec,
    obj: Box<dyn ComponentObjective>,
}

impl Problem {
    fn check_component(&self, j: usize) -> PyResult<()> {
        if j >= self.obj.components() {
            return Err(to_py_err(Error::ComponentOutOfRange { index: j, components: self.obj.components() }));
        }
        Ok(())
    }

    fn operator(&self, j: Option<usize>, x: &[f64], mode: &str) -> PyResult<HvpOperator<'_, dyn ComponentObjective>> {
        let scope = match j {
            Some(j) => {
                self.check_component(j)?;
                HessianScope::Component(j)
            }
            None => HessianScope::Full,
        };
        let mode: HvpMode = mode.parse().map_err(to_py_err)?;
        HvpOperator::with_mode(self.obj.as_ref(), scope, x, mode, FdSettings::default()).map_err(to_py_err)
    }
}

#[pymethods]
impl Problem {
    /// `Problem("layered_gaussian_mixture", components=10, seed=3)`
    #[new]
    #[pyo3(signature = (kind, **spec))]
    fn new(kind: &str, spec: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let kind: ProblemKind = kind.parse().map_err(to_py_err)?;
        let spec: ProblemSpec = with_overrides(&ProblemSpec::new(kind), spec)?;
        let obj = spec.build().map_err(to_py_err)?;
        Ok(Problem { spec, obj })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.obj.dim()
    }

    #[getter]
    fn components(&self) -> usize {
        self.obj.components()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.spec.kind.as_str()
    }

    fn spec<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &self.spec)
    }

    fn initial_point(&self) -> Vec<f64> {
        self.spec.initial_point()
    }

    fn value(&self, j: usize, x: Vec<f64>) -> PyResult<f64> {
        self.check_component(j)?;
        lanczos_descent::problems::check_point(self.obj.as_ref(), j, &x).map_err(to_py_err)?;
        Ok(self.obj.value(j, &x))
    }

    fn gradient(&self, j: usize, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check_component(j)?;
        lanczos_descent::problems::check_point(self.obj.as_ref(), j, &x).map_err(to_py_err)?;
        Ok(self.obj.gradient(j, &x))
    }

    fn full_value(&self, x: Vec<f64>) -> PyResult<f64> {
        full_value(self.obj.as_ref(), &x).map_err(to_py_err)
    }

    fn full_gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        full_gradient(self.obj.as_ref(), &x).map_err(to_py_err)
    }

    /// Hessian-vector product of component `j`, or of the full sum when `j` is None.
    #[pyo3(signature = (j, x, v, mode = "auto"))]
    fn hvp(&self, j: Option<usize>, x: Vec<f64>, v: Vec<f64>, mode: &str) -> PyResult<Vec<f64>> {
        self.operator(j, &x, mode)?.apply(&v).map_err(to_py_err)
    }

    /// Runs `q` Lanczos steps on the Hessian at `x`, seeded with the gradient.
    #[pyo3(signature = (j, x, q, mode = "auto", breakdown_tol = lanczos_descent::lanczos::DEFAULT_BREAKDOWN_TOL))]
    fn lanczos(&self, j: Option<usize>, x: Vec<f64>, q: usize, mode: &str, breakdown_tol: f64) -> PyResult<Factorization> {
        let g = match j {
            Some(j) => self.gradient(j, x.clone())?,
            None => self.full_gradient(x.clone())?,
        };
        let op = self.operator(j, &x, mode)?;
        let inner = lanczos(&op, &g, q.min(op.dim()), breakdown_tol).map_err(to_py_err)?;
        Ok(Factorization { inner })
    }

    fn __repr__(&self) -> String {
        format!("Problem(kind={}, dim={}, components={})", self.spec.kind, self.obj.dim(), self.obj.components())
    }
}

/// Output of a Lanczos run.
#[pyclass(frozen, module = "lanczos_descent")]
struct Factorization {
    inner: LanczosFactorization,
}

#[pymethods]
impl Factorization {
    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.clone()
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.inner.beta.clone()
    }

    #[getter]
    fn beta_next(&self) -> f64 {
        self.inner.beta_next
    }

    #[getter]
    fn basis(&self) -> Vec<Vec<f64>> {
        self.inner.basis.clone()
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.effective_q()
    }

    #[getter]
    fn broke_down(&self) -> bool {
        self.inner.broke_down()
    }

    fn ritz_values(&self) -> Vec<f64> {
        let mut values = self.inner.tridiagonal().eigen().values;
        values.sort_by(f64::total_cmp);
        values
    }

    /// Newton, filtered Newton and negative-curvature directions, plus the
    /// step `t` for `rule` and its degeneracy flag.
    #[pyo3(signature = (
        rule = "s_plus_d",
        tau_nc = lanczos_descent::directions::DEFAULT_TAU_NC,
        tau_desc = lanczos_descent::directions::DEFAULT_TAU_DESC,
        pinv_tol = lanczos_descent::tridiag::DEFAULT_PINV_TOL,
    ))]
    fn directions<'py>(
        &self,
        py: Python<'py>,
        rule: &str,
        tau_nc: f64,
        tau_desc: f64,
        pinv_tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let rule: StepRule = rule.parse().map_err(to_py_err)?;
        let bundle = compute_directions(&self.inner, &DirectionSettings { pinv_tol, tau_nc }).map_err(to_py_err)?;
        let choice = assemble_step(&bundle, rule, tau_desc);
        let out = PyDict::new(py);
        out.set_item("s", &bundle.s)?;
        out.set_item("s_tilde", &bundle.s_tilde)?;
        out.set_item("d", &bundle.d)?;
        out.set_item("mu", bundle.mu)?;
        out.set_item("ritz_residual_bound", bundle.ritz_residual_bound)?;
        out.set_item("t", choice.t)?;
        out.set_item("degeneracy", choice.degeneracy.map(|d| format!("{d:?}").to_lowercase()))?;
        Ok(out)
    }
}

/// Trace and final point of an optimizer run.
#[pyclass(frozen, module = "lanczos_descent")]
struct RunResult {
    label: String,
    outcome: RunOutcome,
}

#[pymethods]
impl RunResult {
    #[getter]
    fn label(&self) -> &str {
        &self.label
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.outcome.x.clone()
    }

    #[getter]
    fn aborted(&self) -> Option<String> {
        self.outcome.aborted.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.outcome.converged
    }

    #[getter]
    fn final_full_f(&self) -> Option<f64> {
        self.outcome.final_full_f()
    }

    /// One dict per iteration.
    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &self.outcome.trace)
    }

    fn trace_csv(&self) -> String {
        harness::trace_to_string(&self.outcome.trace)
    }

    fn __len__(&self) -> usize {
        self.outcome.trace.len()
    }
}

fn algorithm_from(name: &str, alpha: Option<f64>, alpha0: Option<f64>, k0: Option<f64>) -> PyResult<Algorithm> {
    let missing = |what: &str| PyValueError::new_err(format!("{name} needs `{what}`"));
    Ok(match name {
        "lnnc" => Algorithm::Lnnc,
        "sgd_constant" => Algorithm::SgdConstant { alpha: alpha.ok_or_else(|| missing("alpha"))? },
        "sgd_diminishing" => Algorithm::SgdDiminishing {
            alpha0: alpha0.ok_or_else(|| missing("alpha0"))?,
            k0: k0.unwrap_or(100.0),
        },
        "sgd_linesearch" => Algorithm::SgdLinesearch,
        other => return Err(PyValueError::new_err(format!("unknown algorithm `{other}`"))),
    })
}

/// Runs one optimizer. Remaining keyword arguments override `RunConfig`
/// fields, e.g. `q=3`, `schedule="random"`, `line_search={"eta": 0.1}`.
#[pyfunction]
#[pyo3(signature = (problem, algorithm = "lnnc", *, alpha = None, alpha0 = None, k0 = None, **options))]
fn run(
    py: Python<'_>,
    problem: &Problem,
    algorithm: &str,
    alpha: Option<f64>,
    alpha0: Option<f64>,
    k0: Option<f64>,
    options: Option<&Bound<'_, PyDict>>,
) -> PyResult<RunResult> {
    let base = RunConfig::with_algorithm(algorithm_from(algorithm, alpha, alpha0, k0)?);
    let cfg: RunConfig = with_overrides(&base, options)?;
    let x0 = cfg.x0.clone().unwrap_or_else(|| problem.spec.initial_point());
    let outcome = py
        .detach(|| lanczos_descent::run(problem.obj.as_ref(), &x0, &cfg))
        .map_err(to_py_err)?;
    Ok(RunResult { label: cfg.label(), outcome })
}

/// A parsed experiment file.
#[pyclass(frozen, name = "Experiment", module = "lanczos_descent")]
struct PyExperiment {
    inner: Experiment,
}

#[pymethods]
impl PyExperiment {
    /// Parses config text. Overrides use the command-line form `--key=value`.
    #[staticmethod]
    #[pyo3(signature = (text, overrides = Vec::new()))]
    fn parse(text: &str, overrides: Vec<String>) -> PyResult<Self> {
        let overrides = harness::parse_overrides(&overrides).map_err(to_py_err)?;
        Ok(PyExperiment { inner: harness::parse_config(text, &overrides).map_err(to_py_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (path, overrides = Vec::new()))]
    fn load(path: PathBuf, overrides: Vec<String>) -> PyResult<Self> {
        let overrides = harness::parse_overrides(&overrides).map_err(to_py_err)?;
        Ok(PyExperiment { inner: harness::parse_config_file(&path, &overrides).map_err(to_py_err)? })
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.runs.iter().map(RunConfig::label).collect()
    }

    #[getter]
    fn output_dir(&self) -> PathBuf {
        self.inner.output.dir.clone()
    }

    /// Runs every configuration and writes traces, manifests, plots and the
    /// report. Returns a dict with the report text and artifact paths.
    fn run_matrix<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let result = py.detach(|| harness::run_matrix(&self.inner)).map_err(to_py_err)?;
        let out = PyDict::new(py);
        out.set_item("report", result.report.to_string())?;
        out.set_item("plot", result.plot_path)?;
        out.set_item("report_path", result.report_path)?;
        let runs = result
            .runs
            .into_iter()
            .map(|a| {
                let d = PyDict::new(py);
                d.set_item("label", a.label)?;
                d.set_item("manifest", a.manifest_path)?;
                d.set_item("trace", a.trace_path)?;
                d.set_item("final_full_f", a.outcome.final_full_f())?;
                Ok(d)
            })
            .collect::<PyResult<Vec<_>>>()?;
        out.set_item("runs", runs)?;
        Ok(out)
    }
}

/// Re-executes the run behind a manifest. Returns `(matches, first_mismatch)`.
#[pyfunction]
fn replay(py: Python<'_>, manifest: PathBuf) -> PyResult<(bool, Option<usize>)> {
    let r = py.detach(|| harness::replay(&manifest)).map_err(to_py_err)?;
    Ok((r.matches, r.first_mismatch))
}

#[pyfunction]
fn read_trace<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &harness::read_trace_csv(&path).map_err(to_py_err)?)
}

#[pymodule(name = "lanczos_descent")]
pub fn lanczos_descent_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Factorization>()?;
    m.add_class::<RunResult>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(read_trace, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
