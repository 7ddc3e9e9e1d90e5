//! Python module `pcontracts`.
//!
//! Probabilities cross the boundary as `fractions.Fraction`. Runs are dicts
//! from port name to a list of values, one per step; boolean ports use
//! Python booleans, enumerated ports their labels.

use engine::oracle::{run_suites, Budget, Tally};
use engine::rational::{self, Rational};
use engine::speclang::{self, Diagnostic};
use engine::{Assertion, Horizon, Port, Role, Run, Signature};
use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(pcontracts, ContractError, PyValueError, "An engine operation was rejected.");
create_exception!(pcontracts, SpecError, PyValueError, "A `.pct` document failed to parse or load.");

fn engine_err(e: engine::Error) -> PyErr {
    ContractError::new_err(e.to_string())
}

fn spec_err(d: Diagnostic) -> PyErr {
    SpecError::new_err((d.to_string(), d.span.line, d.span.col))
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((rational::exact(r),))
}

fn to_rational(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = value.str()?.to_string();
    rational::parse(&text).ok_or_else(|| PyValueError::new_err(format!("`{text}` is not a rational")))
}

fn horizon(steps: usize) -> PyResult<Horizon> {
    Horizon::new(steps).map_err(engine_err)
}

fn role_name(role: Role) -> &'static str {
    match role {
        Role::Controlled => "controlled",
        Role::Uncontrolled => "uncontrolled",
    }
}

/// `[(name, domain, role)]`; boolean ports have domain `None`.
type PortSpec = (String, Option<Vec<String>>, String);

fn ports_of(sig: &Signature) -> Vec<PortSpec> {
    sig.entries()
        .iter()
        .map(|(p, r)| {
            let domain = (!p.is_boolean()).then(|| p.domain().to_vec());
            (p.name().to_string(), domain, role_name(*r).to_string())
        })
        .collect()
}

fn signature(ports: Vec<PortSpec>) -> PyResult<Signature> {
    let entries = ports
        .into_iter()
        .map(|(name, domain, role)| {
            let port = match domain {
                None => Port::boolean(name),
                Some(d) => Port::new(name, d).map_err(engine_err)?,
            };
            let role = match role.as_str() {
                "controlled" => Role::Controlled,
                "uncontrolled" => Role::Uncontrolled,
                other => return Err(PyValueError::new_err(format!("unknown role `{other}`"))),
            };
            Ok((port, role))
        })
        .collect::<PyResult<Vec<_>>>()?;
    Signature::new(entries).map_err(engine_err)
}

fn label(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(b) = value.extract::<bool>() {
        return Ok(b.to_string());
    }
    Ok(value.str()?.to_string())
}

fn to_run(sig: &Signature, run: &Bound<'_, PyDict>) -> PyResult<Run> {
    let mut out = Run::new();
    for (k, v) in run.iter() {
        let name: String = k.extract()?;
        let port = sig.port(&name).ok_or_else(|| PyKeyError::new_err(name.clone()))?;
        let history = v
            .try_iter()?
            .map(|x| {
                let l = label(&x?)?;
                port.value_of(&l)
                    .ok_or_else(|| PyValueError::new_err(format!("`{l}` is not a value of port `{name}`")))
            })
            .collect::<PyResult<Vec<_>>>()?;
        out.insert(name, history);
    }
    Ok(out)
}

fn from_run<'py>(py: Python<'py>, sig: &Signature, run: &Run) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (name, history) in run.histories() {
        let port = sig.port(name).expect("run ports belong to the signature");
        let values = PyList::empty(py);
        for v in history {
            if port.is_boolean() {
                values.append(*v != 0)?;
            } else {
                values.append(port.label(*v))?;
            }
        }
        d.set_item(name, values)?;
    }
    Ok(d)
}

/// A set of runs over a signature: an implementation or an assertion.
#[pyclass(name = "Implementation", module = "pcontracts", skip_from_py_object, eq)]
#[derive(Clone, PartialEq)]
struct PyImplementation(Assertion);

#[pymethods]
impl PyImplementation {
    /// Builds the set of the given runs; each run must assign every port.
    #[staticmethod]
    fn from_runs(ports: Vec<PortSpec>, steps: usize, runs: Vec<Bound<'_, PyDict>>) -> PyResult<Self> {
        let sig = signature(ports)?;
        let runs = runs.iter().map(|r| to_run(&sig, r)).collect::<PyResult<Vec<_>>>()?;
        Assertion::from_runs(sig, horizon(steps)?, &runs).map(Self).map_err(engine_err)
    }

    #[staticmethod]
    fn universe(ports: Vec<PortSpec>, steps: usize) -> PyResult<Self> {
        Assertion::universe(signature(ports)?, horizon(steps)?).map(Self).map_err(engine_err)
    }

    #[getter]
    fn ports(&self) -> Vec<PortSpec> {
        ports_of(self.0.signature())
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon().steps()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, run: &Bound<'_, PyDict>) -> PyResult<bool> {
        Ok(self.0.contains(&to_run(self.0.signature(), run)?))
    }

    fn runs<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.0.runs().map(|r| from_run(py, self.0.signature(), &r)).collect()
    }

    fn compose(&self, other: &Self) -> PyResult<Self> {
        engine::compose_implementations(&self.0, &other.0).map(Self).map_err(engine_err)
    }

    fn rename(&self, old: &str, new: &str) -> PyResult<Self> {
        self.0.rename(old, new).map(Self).map_err(engine_err)
    }

    fn __repr__(&self) -> String {
        let names: Vec<_> = self.0.signature().names().collect();
        format!("Implementation([{}], horizon={}, runs={})", names.join(", "), self.horizon(), self.0.len())
    }
}

#[pyclass(name = "Contract", module = "pcontracts", skip_from_py_object)]
#[derive(Clone)]
struct PyContract(engine::Contract);

#[pymethods]
impl PyContract {
    /// `(A, G)` over `ports`; both sets are lifted onto it.
    #[new]
    #[pyo3(signature = (ports, guarantee, assumption=None))]
    fn new(ports: Vec<PortSpec>, guarantee: &PyImplementation, assumption: Option<&PyImplementation>) -> PyResult<Self> {
        let sig = signature(ports)?;
        let top;
        let a = match assumption {
            Some(a) => &a.0,
            None => {
                top = Assertion::universe(sig.clone(), guarantee.0.horizon()).map_err(engine_err)?;
                &top
            }
        };
        engine::Contract::new(sig, a, &guarantee.0).map(Self).map_err(engine_err)
    }

    #[getter]
    fn ports(&self) -> Vec<PortSpec> {
        ports_of(self.0.signature())
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.0.horizon().steps()
    }

    #[getter]
    fn assumption(&self) -> PyImplementation {
        PyImplementation(self.0.assumption().clone())
    }

    #[getter]
    fn guarantee(&self) -> PyImplementation {
        PyImplementation(self.0.guarantee().clone())
    }

    fn is_canonical(&self) -> bool {
        self.0.has_canonical_form()
    }

    fn canonicalize(&self) -> Self {
        Self(self.0.canonicalize())
    }

    fn maximal_implementation(&self) -> PyImplementation {
        PyImplementation(self.0.maximal_implementation())
    }

    fn satisfied_by(&self, m: &PyImplementation) -> PyResult<bool> {
        engine::satisfies(&m.0, &self.0).map_err(engine_err)
    }

    fn compose(&self, other: &Self) -> PyResult<Self> {
        engine::compose(&self.0, &other.0).map(Self).map_err(engine_err)
    }

    fn refines(&self, other: &Self) -> PyResult<bool> {
        engine::refines(&self.0, &other.0).map_err(engine_err)
    }

    fn rename(&self, old: &str, new: &str) -> PyResult<Self> {
        self.0.rename(old, new).map(Self).map_err(engine_err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        let (a, b) = (&self.0, &other.0);
        a.signature() == b.signature() && a.assumption() == b.assumption() && a.guarantee() == b.guarantee()
    }

    fn __repr__(&self) -> String {
        let names: Vec<_> = self.0.signature().names().collect();
        format!("Contract([{}], horizon={})", names.join(", "), self.horizon())
    }
}

#[pyclass(name = "Distribution", module = "pcontracts", skip_from_py_object, eq)]
#[derive(Clone, PartialEq)]
struct PyDistribution(engine::Distribution);

#[pymethods]
impl PyDistribution {
    /// Boolean port `name` that is true with probability `p` at every step,
    /// independently.
    #[staticmethod]
    fn bernoulli(name: &str, p: &Bound<'_, PyAny>, steps: usize) -> PyResult<Self> {
        engine::Distribution::bernoulli_iid(&Port::boolean(name), &to_rational(p)?, horizon(steps)?)
            .map(Self)
            .map_err(engine_err)
    }

    /// The point distribution over no ports.
    #[staticmethod]
    fn trivial(steps: usize) -> PyResult<Self> {
        Ok(Self(engine::Distribution::trivial(horizon(steps)?)))
    }

    #[getter]
    fn ports(&self) -> Vec<String> {
        self.0.ports().names().map(String::from).collect()
    }

    fn weight<'py>(&self, py: Python<'py>, history: &Bound<'py, PyDict>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.weight_of(&to_run(self.0.ports(), history)?))
    }

    fn product(&self, other: &Self) -> PyResult<Self> {
        self.0.product(&other.0).map(Self).map_err(engine_err)
    }

    fn marginal(&self, keep: Vec<String>) -> PyResult<Self> {
        self.0.marginal(keep.iter().map(String::as_str)).map(Self).map_err(engine_err)
    }
}

#[pyclass(name = "ProbContract", module = "pcontracts", skip_from_py_object)]
#[derive(Clone)]
struct PyProbContract(engine::ProbContract);

#[pymethods]
impl PyProbContract {
    /// A contract whose ports in `distribution` are probabilistic. Without a
    /// distribution every port is non-deterministic.
    #[new]
    #[pyo3(signature = (base, distribution=None))]
    fn new(base: &PyContract, distribution: Option<&PyDistribution>) -> PyResult<Self> {
        match distribution {
            Some(d) => engine::ProbContract::new(base.0.clone(), d.0.clone()).map(Self).map_err(engine_err),
            None => Ok(Self(engine::ProbContract::deterministic(base.0.clone()))),
        }
    }

    #[getter]
    fn base(&self) -> PyContract {
        PyContract(self.0.base().clone())
    }

    #[getter]
    fn distribution(&self) -> PyDistribution {
        PyDistribution(self.0.distribution().clone())
    }

    #[getter]
    fn prob_ports(&self) -> Vec<String> {
        self.0.prob_ports().map(String::from).collect()
    }

    fn compose(&self, other: &Self) -> PyResult<Self> {
        engine::compose_prob(&self.0, &other.0).map(Self).map_err(engine_err)
    }

    fn rename(&self, old: &str, new: &str) -> PyResult<Self> {
        self.0.rename(old, new).map(Self).map_err(engine_err)
    }

    fn __repr__(&self) -> String {
        let names: Vec<_> = self.0.signature().names().collect();
        let prob: Vec<_> = self.0.prob_ports().collect();
        format!("ProbContract([{}], prob=[{}], horizon={})", names.join(", "), prob.join(", "), self.0.horizon().steps())
    }
}

/// A loaded `.pct` document.
#[pyclass(name = "System", module = "pcontracts", skip_from_py_object)]
struct PySystem(speclang::System);

#[pymethods]
impl PySystem {
    #[getter]
    fn horizon(&self) -> Option<usize> {
        self.0.horizon().map(|h| h.steps())
    }

    #[getter]
    fn contracts(&self) -> Vec<String> {
        self.0.contracts().keys().cloned().collect()
    }

    #[getter]
    fn implementations(&self) -> Vec<String> {
        self.0.implementations().keys().cloned().collect()
    }

    #[getter]
    fn prob_contracts(&self) -> Vec<String> {
        self.0.prob_contracts().keys().cloned().collect()
    }

    fn contract(&self, name: &str) -> PyResult<PyContract> {
        self.0.contract(name).cloned().map(PyContract).ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }

    fn implementation(&self, name: &str) -> PyResult<PyImplementation> {
        self.0.implementation(name).cloned().map(PyImplementation).ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }

    /// A probabilistic contract by name; a plain contract is returned with
    /// every port non-deterministic.
    fn prob_contract(&self, name: &str) -> PyResult<PyProbContract> {
        self.0.any_prob_contract(name).map(PyProbContract).ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }

    /// The document with the composition of `a` and `b` added as `name`,
    /// in normal form.
    #[pyo3(signature = (a, b, name=None))]
    fn compose_source(&self, a: &str, b: &str, name: Option<String>) -> PyResult<String> {
        let name = name.unwrap_or_else(|| format!("{a}_{b}"));
        let doc = speclang::compose_decls(&self.0, a, b, &name).map_err(spec_err)?;
        Ok(speclang::print(&doc))
    }
}

#[pyfunction]
fn load(text: &str) -> PyResult<PySystem> {
    speclang::load(text).map(PySystem).map_err(spec_err)
}

/// The document in normal form.
#[pyfunction]
fn format_source(text: &str) -> PyResult<String> {
    speclang::parse(text).map(|d| speclang::print(&d)).map_err(spec_err)
}

#[pyfunction]
fn sat_level<'py>(py: Python<'py>, m: &PyImplementation, pc: &PyProbContract) -> PyResult<Bound<'py, PyAny>> {
    let report = engine::sat_level(&m.0, &pc.0).map_err(engine_err)?;
    fraction(py, &report.level)
}

fn refine_dict<'py>(py: Python<'py>, r: &engine::RefineReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let level = r.level.as_ref().map(|l| fraction(py, l)).transpose()?;
    d.set_item("level", level)?;
    d.set_item("conditioning", fraction(py, &r.conditioning)?)?;
    d.set_item("joint", fraction(py, &r.joint)?)?;
    d.set_item("inclusion", fraction(py, &r.inclusion)?)?;
    d.set_item("degenerate", r.degenerate)?;
    Ok(d)
}

/// `{"level", "conditioning", "joint", "inclusion", "degenerate"}`; the
/// level is `None` when the conditioning event is null.
#[pyfunction]
fn refine_level<'py>(py: Python<'py>, pc1: &PyProbContract, pc2: &PyProbContract) -> PyResult<Bound<'py, PyDict>> {
    let report = engine::refine_level(&pc1.0, &pc2.0).map_err(engine_err)?;
    refine_dict(py, &report)
}

/// Splits probabilistic port `x` off `pc`: returns the split contract and
/// the wrapper contract that drives `x`.
#[pyfunction]
#[pyo3(name = "wrap")]
fn wrap_port(x: &str, pc: &PyProbContract) -> PyResult<(PyProbContract, PyContract)> {
    let (split, wrapper) = engine::wrap(x, &pc.0).map_err(engine_err)?;
    Ok((PyProbContract(split), PyContract(wrapper)))
}

#[pyfunction]
fn run_example(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let r = engine::example::run_example().map_err(|e| ContractError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    for (k, v) in [
        ("alpha", &r.alpha),
        ("beta", &r.beta),
        ("alpha_beta", &r.alpha_beta),
        ("composed_level", &r.composed_level),
        ("prime_level", &r.prime_level),
        ("disjoint_level", &r.disjoint_level),
        ("disjoint_product", &r.disjoint_product),
    ] {
        d.set_item(k, fraction(py, v)?)?;
    }
    d.set_item("matches_stated", r.matches_stated)?;
    d.set_item("gamma", refine_dict(py, &r.gamma)?)?;
    d.set_item("alpha_beta_gamma", r.alpha_beta_gamma.as_ref().map(|v| fraction(py, v)).transpose()?)?;
    Ok(d)
}

/// Runs the randomized suites; `budget` uses the `ports=N,h=N,...` syntax.
#[pyfunction]
#[pyo3(signature = (seeds=500, first_seed=0, budget=None))]
fn verify<'py>(py: Python<'py>, seeds: u64, first_seed: u64, budget: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let budget: Budget = match budget {
        Some(b) => b.parse().map_err(|e: engine::oracle::generate::BudgetError| PyValueError::new_err(e.to_string()))?,
        None => Budget::default(),
    };
    let summary = py.detach(|| run_suites(first_seed, seeds, &budget, |_| {}));
    let d = PyDict::new(py);
    let tally = |t: &Tally| (t.passed, t.total);
    d.set_item("ok", summary.ok())?;
    d.set_item("summary", summary.to_string())?;
    d.set_item("theorem1", tally(&summary.theorem1))?;
    d.set_item("theorem2", tally(&summary.theorem2))?;
    d.set_item("lemma1", tally(&summary.lemma1))?;
    d.set_item("lemma2", tally(&summary.lemma2))?;
    d.set_item("agreement", tally(&summary.agreement))?;
    d.set_item("formulas", tally(&summary.formulas))?;
    Ok(d)
}

#[pymodule]
fn pcontracts(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ContractError", py.get_type::<ContractError>())?;
    m.add("SpecError", py.get_type::<SpecError>())?;
    m.add("EXAMPLE_SOURCE", engine::example::EXAMPLE_SOURCE)?;
    m.add_class::<PyImplementation>()?;
    m.add_class::<PyContract>()?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyProbContract>()?;
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(format_source, m)?)?;
    m.add_function(wrap_pyfunction!(sat_level, m)?)?;
    m.add_function(wrap_pyfunction!(refine_level, m)?)?;
    m.add_function(wrap_pyfunction!(wrap_port, m)?)?;
    m.add_function(wrap_pyfunction!(run_example, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
