//! Python extension module exposing the lzkz simulator.
//!
//! The module mirrors the library's main types and operations: closed-form
//! Landau-Zener results, waveform construction, single-pulse propagation,
//! Kibble-Zurek scaling helpers, and the sweep harness (driven by the same
//! JSON config schema as the CLI).
//!
//! Error mapping: invalid parameters and malformed configs raise
//! `ValueError`; failures inside a propagation or fit raise `RuntimeError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lzkz::analytic::{self, VisibilityBranch};
use lzkz::kz;
use lzkz::model::QubitParams as CoreQubitParams;
use lzkz::pulse::{make_double_passage, Waveform as CoreWaveform};
use lzkz::sweep::{self, io, SweepConfig, SweepError};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn sweep_err(e: SweepError) -> PyErr {
    match e {
        SweepError::Config(_) | SweepError::Json(_) => value_err(e),
        other => runtime_err(other),
    }
}

fn parse_branch(name: &str) -> PyResult<VisibilityBranch> {
    match name {
        "near_adiabatic" => Ok(VisibilityBranch::NearAdiabatic),
        "near_sudden" => Ok(VisibilityBranch::NearSudden),
        _ => Err(value_err(format!(
            "branch must be 'near_adiabatic' or 'near_sudden', got '{name}'"
        ))),
    }
}

/// Qubit model parameters: tunnel coupling Delta (ueV) and pure dephasing
/// rate gamma_phi (1/ns).
#[pyclass(frozen)]
#[derive(Clone)]
struct QubitParams {
    inner: CoreQubitParams,
}

#[pymethods]
impl QubitParams {
    #[new]
    #[pyo3(signature = (delta, gamma_phi=0.0))]
    fn new(delta: f64, gamma_phi: f64) -> PyResult<Self> {
        Ok(QubitParams {
            inner: CoreQubitParams::new(delta, gamma_phi).map_err(value_err)?,
        })
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta()
    }

    #[getter]
    fn gamma_phi(&self) -> f64 {
        self.inner.gamma_phi()
    }

    fn __repr__(&self) -> String {
        format!(
            "QubitParams(delta={}, gamma_phi={})",
            self.inner.delta(),
            self.inner.gamma_phi()
        )
    }
}

/// Piecewise-linear detuning waveform, optionally RC low-pass filtered.
#[pyclass(frozen)]
#[derive(Clone)]
struct Waveform {
    inner: CoreWaveform,
}

#[pymethods]
impl Waveform {
    #[new]
    #[pyo3(signature = (breakpoints, filter_tau=0.0, sample_dt=None))]
    fn new(breakpoints: Vec<(f64, f64)>, filter_tau: f64, sample_dt: Option<f64>) -> PyResult<Self> {
        let inner = match sample_dt {
            Some(dt) => CoreWaveform::new(breakpoints, filter_tau, dt),
            None if filter_tau > 0.0 => {
                CoreWaveform::new(breakpoints, filter_tau, filter_tau / 100.0)
            }
            None => CoreWaveform::unfiltered(breakpoints),
        }
        .map_err(value_err)?;
        Ok(Waveform { inner })
    }

    /// Double-passage trapezoid: ramp from eps_start down to eps_end, hold,
    /// ramp back. Times in ns, detunings in ueV.
    #[staticmethod]
    #[pyo3(signature = (eps_start, eps_end, ramp_time, hold_time=0.0))]
    fn double_passage(
        eps_start: f64,
        eps_end: f64,
        ramp_time: f64,
        hold_time: f64,
    ) -> PyResult<Self> {
        Ok(Waveform {
            inner: make_double_passage(eps_start, eps_end, ramp_time, hold_time)
                .map_err(value_err)?,
        })
    }

    fn eval(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn time_span(&self) -> (f64, f64) {
        self.inner.time_span()
    }

    fn breakpoints(&self) -> Vec<(f64, f64)> {
        self.inner.breakpoints().to_vec()
    }

    /// Zero crossings as (time, |rate|, tangential) tuples.
    fn crossings(&self) -> Vec<(f64, f64, bool)> {
        self.inner
            .crossing_report()
            .crossings
            .iter()
            .map(|c| (c.time, c.rate, c.tangential))
            .collect()
    }
}

#[pyfunction]
fn lz_probability(delta: f64, nu: f64) -> f64 {
    analytic::lz_probability(delta, nu)
}

#[pyfunction]
fn adiabaticity_parameter(delta: f64, nu: f64) -> f64 {
    analytic::adiabaticity_parameter(delta, nu)
}

#[pyfunction]
fn stokes_phase(adiabaticity: f64) -> f64 {
    analytic::stokes_phase(adiabaticity)
}

#[pyfunction]
fn double_passage_paper(p_lz: f64, phi: f64) -> PyResult<f64> {
    analytic::double_passage_paper(p_lz, phi).map_err(value_err)
}

#[pyfunction]
fn double_passage_transfer_matrix(p_lz: f64, phi: f64, adiabaticity: f64) -> PyResult<f64> {
    analytic::double_passage_transfer_matrix(p_lz, phi, adiabaticity).map_err(value_err)
}

#[pyfunction]
fn visibility(p_lz: f64) -> PyResult<f64> {
    analytic::visibility(p_lz).map_err(value_err)
}

#[pyfunction]
fn invert_visibility(v: f64, branch: &str) -> PyResult<f64> {
    analytic::invert_visibility(v, parse_branch(branch)?).map_err(value_err)
}

/// Stuckelberg phase accumulated between the two anti-crossing passages of
/// the waveform.
#[pyfunction]
fn stuckelberg_phase(params: &QubitParams, waveform: &Waveform) -> PyResult<f64> {
    analytic::stuckelberg_phase(&waveform.inner, &params.inner).map_err(value_err)
}

#[pyfunction]
fn defect_density(x: f64) -> f64 {
    kz::defect_density(x)
}

#[pyfunction]
fn map_lz_to_quench_ratio(delta: f64, nu: f64) -> f64 {
    kz::map_lz_to_quench_ratio(delta, nu)
}

#[pyfunction]
#[pyo3(signature = (delta, nu, alpha=1.0))]
fn kz_prediction_for_lz(delta: f64, nu: f64, alpha: f64) -> f64 {
    kz::kz_prediction_for_lz(delta, nu, alpha)
}

#[pyfunction]
fn freeze_out_kz(tau0: f64, tau_q: f64, alpha: f64) -> PyResult<f64> {
    let quench = kz::KZQuench::new(tau0, tau_q, alpha).map_err(value_err)?;
    Ok(kz::freeze_out_kz(&quench))
}

#[pyfunction]
fn freeze_out_lz(delta: f64, nu: f64, alpha: f64) -> PyResult<f64> {
    kz::freeze_out_lz(delta, nu, alpha).map_err(value_err)
}

/// Least-squares fit of the freeze-out scale factor; returns
/// (alpha_hat, rms_log_residual).
#[pyfunction]
fn fit_alpha(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    let fit = kz::fit_alpha(&points).map_err(runtime_err)?;
    Ok((fit.alpha, fit.rms_log_residual))
}

/// Propagate the ground state through one pulse and compare against the
/// closed-form double-passage predictions. Returns a dict with keys
/// p_excited, p_paper_formula, p_transfer_matrix, phi, nu_per_crossing,
/// steps_accepted.
#[pyfunction]
#[pyo3(signature = (params, waveform, tol=1e-8))]
fn single_shot<'py>(
    py: Python<'py>,
    params: &QubitParams,
    waveform: &Waveform,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let summary = sweep::single_shot(&params.inner, &waveform.inner, tol).map_err(sweep_err)?;
    let out = PyDict::new(py);
    out.set_item("p_excited", summary.p_excited)?;
    out.set_item("p_paper_formula", summary.p_paper_formula)?;
    out.set_item("p_transfer_matrix", summary.p_transfer_matrix)?;
    out.set_item("phi", summary.phi)?;
    out.set_item(
        "nu_per_crossing",
        summary.crossings.iter().map(|c| c.rate).collect::<Vec<f64>>(),
    )?;
    out.set_item("steps_accepted", summary.steps_accepted)?;
    Ok(out)
}

/// Run a sweep from a JSON config string (same schema as the CLI). Returns
/// a dict with keys columns (list of names), rows (list of row lists), and
/// csv (the canonical CSV export, byte-stable for a fixed config).
#[pyfunction]
fn run_sweep<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SweepConfig::from_json_str(config_json).map_err(sweep_err)?;
    let result = sweep::run(&cfg).map_err(sweep_err)?;
    let out = PyDict::new(py);
    out.set_item("columns", result.columns.clone())?;
    out.set_item("rows", result.rows.clone())?;
    out.set_item("csv", io::to_csv_string(&result))?;
    if let Some(fit) = &result.metadata.fit {
        out.set_item("fit_alpha", (fit.alpha, fit.rms_log_residual))?;
    }
    Ok(out)
}

#[pymodule]
fn lzkz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<QubitParams>()?;
    m.add_class::<Waveform>()?;
    m.add_function(wrap_pyfunction!(lz_probability, m)?)?;
    m.add_function(wrap_pyfunction!(adiabaticity_parameter, m)?)?;
    m.add_function(wrap_pyfunction!(stokes_phase, m)?)?;
    m.add_function(wrap_pyfunction!(double_passage_paper, m)?)?;
    m.add_function(wrap_pyfunction!(double_passage_transfer_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(visibility, m)?)?;
    m.add_function(wrap_pyfunction!(invert_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(stuckelberg_phase, m)?)?;
    m.add_function(wrap_pyfunction!(defect_density, m)?)?;
    m.add_function(wrap_pyfunction!(map_lz_to_quench_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(kz_prediction_for_lz, m)?)?;
    m.add_function(wrap_pyfunction!(freeze_out_kz, m)?)?;
    m.add_function(wrap_pyfunction!(freeze_out_lz, m)?)?;
    m.add_function(wrap_pyfunction!(fit_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(single_shot, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add("HBAR", lzkz::units::HBAR)?;
    Ok(())
}
