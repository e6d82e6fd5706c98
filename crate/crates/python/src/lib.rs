//! Python bindings: system configuration, codebooks, closed-form analysis and
//! seeded Monte Carlo sweeps. Structured results are returned as plain
//! Python dicts and lists.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use noma_gssk::analysis;
use noma_gssk::channel::UserChannel;
use noma_gssk::codebook;
use noma_gssk::montecarlo::{self, ChannelMode};
use noma_gssk::output;
use noma_gssk::power;
use noma_gssk::scenario;
use noma_gssk::{Error, Metric, SweepSpec};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyIOError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn from_json<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_enum<T: serde::de::DeserializeOwned>(value: &str, what: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} {value:?}")))
}

#[pyclass(name = "SystemConfig", module = "noma_gssk", skip_from_py_object)]
#[derive(Clone)]
struct PySystemConfig {
    inner: noma_gssk::SystemConfig,
}

#[pymethods]
impl PySystemConfig {
    #[staticmethod]
    fn noma_gssk(m_t: usize, m_a: usize) -> Self {
        Self {
            inner: noma_gssk::SystemConfig::noma_gssk(m_t, m_a),
        }
    }

    #[staticmethod]
    fn noma_ssk(m_t: usize) -> Self {
        Self {
            inner: noma_gssk::SystemConfig::noma_ssk(m_t),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (m_t = noma_gssk::config::DEFAULT_MIMO_NOMA_TX_ANTENNAS))]
    fn mimo_noma(m_t: usize) -> Self {
        Self {
            inner: noma_gssk::SystemConfig::mimo_noma(m_t),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("config serializes")
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.name()
    }

    #[getter]
    fn m_t(&self) -> usize {
        self.inner.m_t
    }

    #[getter]
    fn m_a(&self) -> usize {
        self.inner.m_a
    }

    #[getter]
    fn m_r(&self) -> usize {
        self.inner.m_r
    }

    #[setter]
    fn set_m_r(&mut self, v: usize) {
        self.inner.m_r = v;
    }

    #[getter]
    fn n_noma(&self) -> usize {
        self.inner.n_noma
    }

    #[setter]
    fn set_n_noma(&mut self, v: usize) {
        self.inner.n_noma = v;
    }

    #[getter]
    fn k_spatial(&self) -> usize {
        self.inner.k_spatial
    }

    #[setter]
    fn set_k_spatial(&mut self, v: usize) {
        self.inner.k_spatial = v;
    }

    #[getter]
    fn mod_order(&self) -> usize {
        self.inner.mod_order
    }

    #[setter]
    fn set_mod_order(&mut self, v: usize) {
        self.inner.mod_order = v;
    }

    #[getter]
    fn total_power(&self) -> f64 {
        self.inner.total_power
    }

    #[setter]
    fn set_total_power(&mut self, v: f64) {
        self.inner.total_power = v;
    }

    #[getter]
    fn ftpa_beta(&self) -> f64 {
        self.inner.ftpa_beta
    }

    #[setter]
    fn set_ftpa_beta(&mut self, v: f64) {
        self.inner.ftpa_beta = v;
    }

    #[getter]
    fn gain_targets(&self) -> Vec<f64> {
        self.inner.effective_gain_targets()
    }

    #[setter]
    fn set_gain_targets(&mut self, v: Option<Vec<f64>>) {
        self.inner.gain_targets = v;
    }

    fn __repr__(&self) -> String {
        format!("SystemConfig({})", self.to_json())
    }
}

#[pyclass(name = "AntennaSetCodebook", module = "noma_gssk", frozen)]
struct PyCodebook {
    inner: noma_gssk::AntennaSetCodebook,
}

#[pymethods]
impl PyCodebook {
    #[new]
    fn new(m_t: usize, m_a: usize) -> PyResult<Self> {
        Ok(Self {
            inner: codebook::build_codebook(m_t, m_a).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_h(&self) -> usize {
        self.inner.n_h()
    }

    #[getter]
    fn b_h(&self) -> usize {
        self.inner.b_h()
    }

    /// Active antenna sets, 1-based, in label order.
    #[getter]
    fn sets(&self) -> Vec<Vec<usize>> {
        self.inner.sets().to_vec()
    }

    fn label(&self, index: usize) -> PyResult<Vec<u8>> {
        self.inner.label(index).map_err(to_py)
    }

    fn map_bits(&self, bits: Vec<u8>) -> PyResult<usize> {
        codebook::map_bits_to_set(&bits, &self.inner).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.n_h()
    }

    fn __repr__(&self) -> String {
        format!(
            "AntennaSetCodebook(m_t={}, m_a={}, n_h={})",
            self.inner.m_t(),
            self.inner.m_a(),
            self.inner.n_h()
        )
    }
}

#[pyfunction]
fn ftpa_allocate(channel_power_gains: Vec<f64>, beta: f64) -> PyResult<Vec<f64>> {
    Ok(power::ftpa_allocate(&channel_power_gains, beta)
        .map_err(to_py)?
        .alphas()
        .to_vec())
}

#[pyfunction]
fn q_function(x: f64) -> f64 {
    analysis::q_function(x)
}

/// Union bound for the codebook `(m_t, m_a)` over the `m_r x m_t` channel given as rows.
#[pyfunction]
fn ber_union_bound(m_t: usize, m_a: usize, channel: Vec<Vec<Complex64>>, snr_linear: f64) -> PyResult<f64> {
    let m_r = channel.len();
    if m_r == 0 || channel.iter().any(|row| row.len() != m_t) {
        return Err(PyValueError::new_err(format!("channel must be a non-empty list of rows of length {m_t}")));
    }
    let matrix = nalgebra::DMatrix::from_fn(m_r, m_t, |r, c| channel[r][c]);
    let rms = (matrix.iter().map(|v| v.norm_sqr()).sum::<f64>() / (m_r * m_t) as f64).sqrt();
    let ch = UserChannel::new(matrix, rms.min(1.0)).map_err(to_py)?;
    let cb = codebook::build_codebook(m_t, m_a).map_err(to_py)?;
    analysis::ber_union_bound(&cb, &ch, snr_linear, m_a).map_err(to_py)
}

/// Seeded Monte Carlo sweep; returns the result as a dict.
#[pyfunction]
#[pyo3(signature = (config, snr_grid_db, trials, seed, metric = "cell_edge_ber", channel_mode = "per_trial"))]
fn run_sweep<'py>(
    py: Python<'py>,
    config: PyRef<'py, PySystemConfig>,
    snr_grid_db: Vec<f64>,
    trials: u64,
    seed: u64,
    metric: &str,
    channel_mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = SweepSpec {
        config: config.inner.clone(),
        snr_grid_db,
        trials_per_point: trials,
        master_seed: seed,
        metric: parse_enum::<Metric>(metric, "metric")?,
        channel_mode: parse_enum::<ChannelMode>(channel_mode, "channel mode")?,
    };
    let result = py.detach(|| montecarlo::run_sweep(&spec)).map_err(to_py)?;
    from_json(py, &serde_json::to_string(&result).expect("result serializes"))
}

#[pyfunction]
#[pyo3(signature = (config, snr_db, m_t_grid, bound_draws = 2000, seed = 1))]
fn run_capacity_vs_antennas<'py>(
    py: Python<'py>,
    config: PyRef<'py, PySystemConfig>,
    snr_db: f64,
    m_t_grid: Vec<usize>,
    bound_draws: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config.inner.clone();
    let snr = 10f64.powf(snr_db / 10.0);
    let rows = py
        .detach(|| montecarlo::run_capacity_vs_antennas(&cfg, snr, &m_t_grid, bound_draws, seed))
        .map_err(to_py)?;
    from_json(py, &serde_json::to_string(&rows).expect("rows serialize"))
}

/// The complexity table with published values and match flags.
#[pyfunction]
fn complexity_table(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    from_json(py, &output::table1_json(&analysis::table1_rows()))
}

/// Parses and validates a scenario document; returns the resolved scenario.
#[pyfunction]
fn parse_scenario<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let s = scenario::parse_scenario(text).map_err(to_py)?;
    from_json(py, &s.echo())
}

#[pymodule]
#[pyo3(name = "noma_gssk")]
fn noma_gssk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemConfig>()?;
    m.add_class::<PyCodebook>()?;
    m.add_function(wrap_pyfunction!(ftpa_allocate, m)?)?;
    m.add_function(wrap_pyfunction!(q_function, m)?)?;
    m.add_function(wrap_pyfunction!(ber_union_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_capacity_vs_antennas, m)?)?;
    m.add_function(wrap_pyfunction!(complexity_table, m)?)?;
    m.add_function(wrap_pyfunction!(parse_scenario, m)?)?;
    Ok(())
}
