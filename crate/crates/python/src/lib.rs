//! Python bindings for the `meds` crate.
//!
//! Sequences cross the boundary as plain lists of floats; no numpy
//! dependency.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use meds::asdm::{dynamic_range as asdm_dynamic_range, AsdmParams, TriggerTimes};
use meds::csv::SampledWaveform;
use meds::harness::{self, ExperimentConfig};
use meds::recovery::{self, RecoveryReport};
use meds::signal::Waveform;
use meds::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Detection(_) | Error::Divergence(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Experiment configuration. `Config()` is the random bandlimited preset,
/// `Config("sinusoid")` the sinusoid preset.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (preset = "bandlimited"))]
    fn new(preset: &str) -> PyResult<Self> {
        let inner = match preset {
            "bandlimited" => ExperimentConfig::default(),
            "sinusoid" => ExperimentConfig::sinusoid(),
            other => return Err(PyValueError::new_err(format!("unknown preset `{other}`"))),
        };
        Ok(Self { inner })
    }

    /// Parse `key = value` text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ExperimentConfig::parse(text).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Set one key from its text form, e.g. `cfg.set("asdm.delta", "2e-3")`.
    /// A rejected value leaves the config unchanged.
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        let mut next = self.inner.clone();
        next.set(key, value).map_err(to_py)?;
        next.validate().map_err(to_py)?;
        self.inner = next;
        Ok(())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(delta={}, lambda={}, omega={})",
            self.inner.delta, self.inner.lambda, self.inner.omega
        )
    }
}

/// Recovery output: detected folds and the reconstructed waveform.
#[pyclass(name = "Recovery", skip_from_py_object)]
struct PyRecovery {
    #[pyo3(get)]
    fold_times: Vec<f64>,
    #[pyo3(get)]
    fold_signs: Vec<i8>,
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    values: Vec<f64>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    error_percent: Option<f64>,
}

impl From<&RecoveryReport> for PyRecovery {
    fn from(r: &RecoveryReport) -> Self {
        let w = r.waveform();
        Self {
            fold_times: r.detection.times(),
            fold_signs: r.detection.signs(),
            times: w.times().collect(),
            values: w.samples().to_vec(),
            iterations: r.reconstruction.iterations(),
            error_percent: r.error_percent(),
        }
    }
}

#[pymethods]
impl PyRecovery {
    fn __repr__(&self) -> String {
        format!("Recovery(folds={}, error_percent={:?})", self.fold_times.len(), self.error_percent)
    }
}

/// One synthetic experiment.
#[pyclass(name = "Run", skip_from_py_object)]
struct PyRun {
    #[pyo3(get)]
    triggers: Vec<f64>,
    #[pyo3(get)]
    true_fold_times: Vec<f64>,
    #[pyo3(get)]
    true_fold_signs: Vec<i8>,
    #[pyo3(get)]
    err_meds: Option<f64>,
    #[pyo3(get)]
    err_asdm: Option<f64>,
    #[pyo3(get)]
    err_tau: Option<f64>,
    #[pyo3(get)]
    folds_recovered: bool,
    recovery: Option<Py<PyRecovery>>,
    report: String,
}

#[pymethods]
impl PyRun {
    /// The MEDS recovery, or `None` if it failed.
    #[getter]
    fn recovery(&self, py: Python<'_>) -> Option<Py<PyRecovery>> {
        self.recovery.as_ref().map(|r| r.clone_ref(py))
    }

    /// `key = value` summary lines.
    fn report(&self) -> String {
        self.report.clone()
    }
}

fn wrap_run(py: Python<'_>, run: &harness::SyntheticRun) -> PyResult<PyRun> {
    let recovery = match &run.meds {
        Ok(r) => Some(Py::new(py, PyRecovery::from(r))?),
        Err(_) => None,
    };
    Ok(PyRun {
        triggers: run.meds_triggers.times().to_vec(),
        true_fold_times: run.folds.times().to_vec(),
        true_fold_signs: run.folds.signs().to_vec(),
        err_meds: run.err_meds(),
        err_asdm: run.err_asdm(),
        err_tau: run.err_tau(),
        folds_recovered: run.folds_recovered(),
        recovery,
        report: run.report(),
    })
}

/// Simulate folding, encoding and recovery without writing files.
#[pyfunction]
#[pyo3(signature = (config, baseline = true))]
fn simulate(py: Python<'_>, config: &PyConfig, baseline: bool) -> PyResult<PyRun> {
    let cfg = config.inner.clone();
    let run = py.detach(|| harness::simulate(&cfg, baseline)).map_err(to_py)?;
    wrap_run(py, &run)
}

/// Simulate and write every output file into `output_dir`.
#[pyfunction]
fn run_synthetic(py: Python<'_>, config: &PyConfig, output_dir: std::path::PathBuf) -> PyResult<PyRun> {
    let cfg = ExperimentConfig { output_dir, ..config.inner.clone() };
    let run = py.detach(|| harness::run_synthetic(&cfg)).map_err(to_py)?;
    wrap_run(py, &run)
}

/// Recover from trigger times. `reference` is an optional `(times, values)`
/// pair used for scoring.
#[pyfunction]
#[pyo3(signature = (triggers, config, reference = None))]
fn recover(
    py: Python<'_>,
    triggers: Vec<f64>,
    config: &PyConfig,
    reference: Option<(Vec<f64>, Vec<f64>)>,
) -> PyResult<PyRecovery> {
    let cfg = &config.inner;
    let reference = reference.map(|(t, v)| SampledWaveform::new(t, v)).transpose().map_err(to_py)?;
    let report = py
        .detach(|| {
            let trig = TriggerTimes::new(triggers)?;
            recovery::recover(
                &trig,
                &cfg.asdm_params()?,
                &cfg.modulo_params()?,
                cfg.reconstruction_omega(),
                &cfg.recovery_config(),
                reference.as_ref().map(|r| r as &dyn Waveform),
            )
        })
        .map_err(to_py)?;
    Ok(PyRecovery::from(&report))
}

type SweepTuple = (f64, f64, f64, usize, usize, usize, String);

/// Run the experiment for `count` values of delta. Returns one tuple
/// `(delta, err_meds, err_tau, trigger_count, true_folds, detected_folds, status)`
/// per value; failed recoveries carry infinite error.
#[pyfunction]
fn sweep(
    py: Python<'_>,
    config: &PyConfig,
    delta_min: f64,
    delta_max: f64,
    count: usize,
) -> PyResult<Vec<SweepTuple>> {
    let cfg = config.inner.clone();
    let rows = py.detach(|| harness::run_delta_sweep(&cfg, delta_min, delta_max, count)).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.delta, r.err_meds, r.err_tau, r.trigger_count, r.true_folds, r.detected_folds, r.status))
        .collect())
}

/// Order-`order` divided differences of `values` sampled at `times`.
#[pyfunction]
fn nonuniform_diff(values: Vec<f64>, times: Vec<f64>, order: usize) -> PyResult<Vec<f64>> {
    recovery::nonuniform_diff(&values, &times, order).map_err(to_py)
}

/// Largest input amplitude the ASDM encodes: `b - 2 delta omega / pi`.
#[pyfunction]
fn dynamic_range(delta: f64, bias: f64, omega: f64) -> PyResult<f64> {
    let p = AsdmParams::new(delta, bias).map_err(to_py)?;
    asdm_dynamic_range(&p, omega).map_err(to_py)
}

#[pymodule]
fn meds_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyRun>()?;
    m.add_class::<PyRecovery>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(nonuniform_diff, m)?)?;
    m.add_function(wrap_pyfunction!(dynamic_range, m)?)?;
    Ok(())
}
