//! Python bindings. Models and ambiguity specs cross the boundary as the same
//! JSON documents the CLI config file uses.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ldp_dro::dro::{self, AmbiguitySpec, MarkovSolverOptions};
use ldp_dro::harness::{self, ExperimentConfig};
use ldp_dro::processes::{self, Family, ProcessModel, Trajectory};
use ldp_dro::rates::{self, ArRateKind};
use ldp_dro::statistics::{self, StatisticKind};
use ldp_dro::{Error, ExtendedReal};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(format!("invalid JSON: {e}"))
}

fn parse_ar_kind(kind: &str) -> PyResult<ArRateKind> {
    match kind {
        "ls" | "least_squares" => Ok(ArRateKind::LeastSquares),
        "yw" | "yule_walker" => Ok(ArRateKind::YuleWalker),
        other => Err(PyValueError::new_err(format!("unknown AR rate kind '{other}'"))),
    }
}

fn parse_family(name: &str, shape: f64, trials: u32, cov: Option<Vec<f64>>, dim: usize) -> PyResult<Family> {
    Ok(match name {
        "normal" => Family::Normal {
            cov: cov.unwrap_or_else(|| (0..dim * dim).map(|k| f64::from(u8::from(k / dim == k % dim))).collect()),
        },
        "exponential" => Family::Exponential,
        "gamma" => Family::Gamma { shape },
        "poisson" => Family::Poisson,
        "bernoulli" => Family::Bernoulli,
        "geometric" => Family::Geometric,
        "binomial" => Family::Binomial { trials },
        other => return Err(PyValueError::new_err(format!("unknown family '{other}'"))),
    })
}

/// `D(s || theta)`; `inf` off the support.
#[pyfunction]
fn relative_entropy(s: Vec<f64>, theta: Vec<f64>) -> PyResult<f64> {
    rates::relative_entropy(&s, &theta).map(ExtendedReal::to_f64).map_err(py_err)
}

/// Conditional relative entropy of row-major `m x m` doublet pmfs.
#[pyfunction]
fn conditional_relative_entropy(s: Vec<f64>, theta: Vec<f64>, m: usize) -> PyResult<f64> {
    rates::conditional_relative_entropy(&s, &theta, m).map(ExtendedReal::to_f64).map_err(py_err)
}

/// Rate of the AR coefficient estimator; `kind` is `"ls"` or `"yw"`.
#[pyfunction]
fn ar_rate(s: f64, theta: f64, kind: &str) -> PyResult<f64> {
    Ok(rates::ar_rate(s, theta, parse_ar_kind(kind)?).to_f64())
}

#[pyfunction]
#[pyo3(signature = (family, s, theta, shape = 2.0, trials = 10, cov = None))]
fn cramer_rate(
    family: &str,
    s: Vec<f64>,
    theta: Vec<f64>,
    shape: f64,
    trials: u32,
    cov: Option<Vec<f64>>,
) -> PyResult<f64> {
    let f = parse_family(family, shape, trials, cov, theta.len())?;
    rates::cramer_rate(&f, &s, &theta).map(ExtendedReal::to_f64).map_err(py_err)
}

/// Worst-case expected loss over the relative-entropy ball and the model
/// attaining it.
#[pyfunction]
fn entropy_worst_case(loss: Vec<f64>, s: Vec<f64>, r: f64) -> PyResult<(f64, Vec<f64>)> {
    let out = dro::entropy_dro_dual(&loss, &s, r).map_err(py_err)?;
    Ok((out.value, out.worst_case.unwrap_or_default()))
}

#[pyfunction]
fn wasserstein_worst_case(loss: Vec<f64>, s: Vec<f64>, eps: f64) -> PyResult<f64> {
    dro::wasserstein_set_worst_case(&loss, &s, eps).map(|o| o.value).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (loss, s, m, r, starts = 16, iterations = 500, seed = 0))]
fn markov_worst_case(
    loss: Vec<f64>,
    s: Vec<f64>,
    m: usize,
    r: f64,
    starts: usize,
    iterations: usize,
    seed: u64,
) -> PyResult<f64> {
    let opts = MarkovSolverOptions { starts, iterations, seed };
    dro::markov_ball_worst_case(&loss, &s, m, r, &opts).map(|o| o.value).map_err(py_err)
}

/// Disappointment curve on the newsvendor scenario. `spec` is a JSON
/// ambiguity spec such as `{"kind": "entropy", "radius": 0.05}`.
#[pyfunction]
fn newsvendor_curve<'py>(
    py: Python<'py>,
    spec: &str,
    tgrid: Vec<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec: AmbiguitySpec = serde_json::from_str(spec).map_err(json_err)?;
    let config = ExperimentConfig::newsvendor(spec, tgrid, trials, seed);
    let curve = py.detach(|| harness::run_curve(&config)).map_err(py_err)?;
    curve
        .points
        .iter()
        .map(|p| {
            let row = PyDict::new(py);
            row.set_item("T", p.horizon)?;
            row.set_item("trials", p.trials)?;
            row.set_item("p_hat", p.p_hat)?;
            row.set_item("mean_in_sample", p.mean_in_sample)?;
            row.set_item("se_in_sample", p.se_in_sample)?;
            row.set_item("mean_out_of_sample", p.mean_out_of_sample)?;
            row.set_item("spec", &p.spec)?;
            row.set_item("radius", p.radius)?;
            row.set_item("seed", p.seed)?;
            Ok(row)
        })
        .collect()
}

/// A data-generating model, built from its JSON description, e.g.
/// `{"family": "finite_iid", "probs": [0.3, 0.7]}`.
#[pyclass(frozen)]
struct Model {
    inner: ProcessModel,
}

#[pymethods]
impl Model {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Ok(Model { inner: serde_json::from_str(json).map_err(json_err)? })
    }

    /// Trajectory of length `horizon`: 1-based states for finite-state
    /// models, a flat row-major list of reals otherwise.
    fn simulate<'py>(&self, py: Python<'py>, horizon: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let traj = processes::simulate(&self.inner, horizon, seed).map_err(py_err)?;
        match traj {
            Trajectory::Discrete { states, .. } => Ok(states.into_pyobject(py)?.into_any()),
            Trajectory::Continuous { values, .. } => Ok(values.into_pyobject(py)?.into_any()),
        }
    }

    /// The model's natural statistic on a simulated trajectory.
    fn statistic(&self, horizon: usize, seed: u64) -> PyResult<Vec<f64>> {
        let traj = processes::simulate(&self.inner, horizon, seed).map_err(py_err)?;
        let kind = StatisticKind::natural_for(&self.inner);
        statistics::compute(&self.inner, kind, &traj).map(|v| v.value).map_err(py_err)
    }

    /// Large-sample limit of the natural statistic.
    fn asymptotic_statistic(&self) -> PyResult<Vec<f64>> {
        statistics::asymptotic_statistic(&self.inner, StatisticKind::natural_for(&self.inner)).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Model({})", serde_json::to_string(&self.inner).unwrap_or_default())
    }
}

#[pymodule]
fn ldpdro(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(ar_rate, m)?)?;
    m.add_function(wrap_pyfunction!(cramer_rate, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_worst_case, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein_worst_case, m)?)?;
    m.add_function(wrap_pyfunction!(markov_worst_case, m)?)?;
    m.add_function(wrap_pyfunction!(newsvendor_curve, m)?)?;
    m.add_class::<Model>()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_pass_through() {
        assert!((relative_entropy(vec![0.5, 0.5], vec![0.25, 0.75]).unwrap() - 0.143_841).abs() < 1e-6);
        assert_eq!(relative_entropy(vec![0.5, 0.5], vec![1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!((ar_rate(0.9, 0.0, "ls").unwrap() - 1.8f64.ln()).abs() < 1e-15);
        assert!(ar_rate(0.9, 0.0, "xx").is_err());
        let v = cramer_rate("poisson", vec![2.0], vec![1.0], 2.0, 10, None).unwrap();
        assert!((v - (4f64.ln() - 1.0)).abs() < 1e-12);
        let v = cramer_rate("normal", vec![1.0, 1.0], vec![0.0, 0.0], 2.0, 10, None).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn worst_cases_pass_through() {
        let (v, theta) = entropy_worst_case(vec![0.0, 1.0], vec![0.5, 0.5], 0.1).unwrap();
        assert!((v - 0.712_879).abs() < 1e-6);
        assert_eq!(theta.len(), 2);
        assert!(entropy_worst_case(vec![0.0], vec![0.5, 0.5], 0.1).is_err());
        assert_eq!(wasserstein_worst_case(vec![0.0, 1.0], vec![1.0, 0.0], 0.0).unwrap(), 0.0);
    }
}
