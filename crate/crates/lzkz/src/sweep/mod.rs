//! Sweep harness: validated experiment configs, parallel grid runners for
//! interference maps and defect-density curves, and the simulated detector
//! readout chain.
//!
//! Runners are deterministic: rows are ordered by grid index regardless of
//! worker count, and readout noise is drawn from a per-point counter-mode
//! RNG stream keyed by (seed, grid index), so the exported tables are
//! byte-identical for any parallelism.

pub mod io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    adiabaticity_parameter, double_passage_paper, double_passage_transfer_matrix, invert_visibility,
    lz_probability, stuckelberg_phase, AnalyticError, VisibilityBranch,
};
use crate::kz::{defect_density, fit_alpha, map_lz_to_quench_ratio, AlphaFit, KzError};
use crate::model::{ModelError, QubitParams};
use crate::propagator::{
    propagate_lindblad, propagate_unitary, DensityMatrix, PropagationError, PropagationResult,
    TOL_RANGE,
};
use crate::propagator::prepare_ground;
use crate::pulse::{make_double_passage, Crossing, PulseError, Waveform};
use crate::units::HBAR;

/// Minimum number of fringe samples accepted by [`extract_p_lz`].
pub const MIN_FRINGE_SAMPLES: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("need at least {MIN_FRINGE_SAMPLES} fringe samples, got {0}")]
    TooFewFringeSamples(usize),
    #[error("fringe sample {0} is not finite")]
    NonFiniteSample(usize),
    #[error("extracted visibility {0:.4} exceeds the 1/2 maximum; calibration inconsistent with the data")]
    InconsistentCalibration(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Kz(#[from] KzError),
}

/// What a sweep config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// 2D interference map over (eps_lz0, nu).
    LzsMap,
    /// 1D defect-density curve over nu.
    KzCurve,
    /// One grid point, same columns as the map.
    SingleShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSpacing {
    Linear,
    Log,
}

/// One sweep axis: `count` values from `min` to `max` with the given
/// spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: AxisSpacing,
}

impl AxisSpec {
    fn validate(&self) -> Result<(), SweepError> {
        let fail = |msg: String| Err(SweepError::Config(msg));
        if self.count == 0 {
            return fail(format!("axis '{}' has count 0", self.name));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return fail(format!("axis '{}' has non-finite bounds", self.name));
        }
        if self.count == 1 {
            if self.min > self.max {
                return fail(format!("axis '{}': min > max", self.name));
            }
        } else if self.min >= self.max {
            return fail(format!(
                "axis '{}': min must be < max for count > 1",
                self.name
            ));
        }
        if self.spacing == AxisSpacing::Log && self.min <= 0.0 {
            return fail(format!(
                "axis '{}': log spacing needs min > 0",
                self.name
            ));
        }
        Ok(())
    }

    /// The grid values along this axis; a single-count axis yields `[min]`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    AxisSpacing::Linear => self.min + (self.max - self.min) * f,
                    AxisSpacing::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }
}

/// How the double-passage pulse adapts as the sweep rate changes across the
/// grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepConvention {
    /// Fixed detuning amplitude (ueV): ramp time is `amplitude / nu`, and
    /// the pulse always turns around at `eps_lz0 - amplitude`.
    FixedAmplitude(f64),
    /// Fixed ramp time (ns): the turnaround detuning is
    /// `eps_lz0 - nu * ramp_time`.
    FixedRampTime(f64),
}

/// Double-passage pulse template for map and single-shot runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseTemplate {
    pub convention: SweepConvention,
    #[serde(default)]
    pub hold_time: f64,
    #[serde(default)]
    pub filter_tau: f64,
    #[serde(default)]
    pub sample_dt: Option<f64>,
}

impl PulseTemplate {
    fn validate(&self) -> Result<(), SweepError> {
        let fail = |msg: &str| Err(SweepError::Config(msg.to_string()));
        let conv = match self.convention {
            SweepConvention::FixedAmplitude(a) => a,
            SweepConvention::FixedRampTime(t) => t,
        };
        if !conv.is_finite() || conv <= 0.0 {
            return fail("pulse convention value must be positive");
        }
        if !self.hold_time.is_finite() || self.hold_time < 0.0 {
            return fail("pulse hold_time must be nonnegative");
        }
        if !self.filter_tau.is_finite() || self.filter_tau < 0.0 {
            return fail("pulse filter_tau must be nonnegative");
        }
        match self.sample_dt {
            Some(dt) if self.filter_tau == 0.0 => {
                return Err(SweepError::Config(format!(
                    "pulse sample_dt ({dt}) given without filter_tau"
                )))
            }
            Some(dt) if !dt.is_finite() || dt <= 0.0 => {
                return fail("pulse sample_dt must be positive")
            }
            Some(dt) if dt > self.filter_tau / 10.0 => {
                return Err(SweepError::Config(format!(
                    "pulse sample_dt ({dt}) undersamples filter_tau ({}); need sample_dt <= filter_tau / 10",
                    self.filter_tau
                )))
            }
            _ => {}
        }
        Ok(())
    }

    fn effective_sample_dt(&self) -> f64 {
        self.sample_dt.unwrap_or(self.filter_tau / 100.0)
    }
}

/// Detector calibration: measured signal is
/// `offset + v_scale * p + Normal(0, noise_sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutCal {
    pub v_scale: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub noise_sigma: f64,
}

impl ReadoutCal {
    fn validate(&self) -> Result<(), SweepError> {
        if !self.v_scale.is_finite() || self.v_scale <= 0.0 {
            return Err(SweepError::Config(
                "readout v_scale must be positive".into(),
            ));
        }
        if !self.offset.is_finite() {
            return Err(SweepError::Config("readout offset must be finite".into()));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(SweepError::Config(
                "readout noise_sigma must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

fn default_schema_version() -> u32 {
    1
}

fn default_tol() -> f64 {
    1e-8
}

fn default_alpha() -> f64 {
    1.0
}

fn default_asymptotic_factor() -> f64 {
    50.0
}

/// A validated sweep description. Parse with [`SweepConfig::from_json_str`]
/// or build in code and call [`SweepConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub qubit: QubitParams,
    #[serde(default)]
    pub pulse: Option<PulseTemplate>,
    pub axes: Vec<AxisSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_asymptotic_factor")]
    pub asymptotic_factor: f64,
    #[serde(default)]
    pub readout: Option<ReadoutCal>,
}

impl SweepConfig {
    pub fn from_json_str(s: &str) -> Result<Self, SweepError> {
        let cfg: SweepConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let fail = |msg: String| Err(SweepError::Config(msg));
        if self.schema_version != 1 {
            return fail(format!(
                "unsupported schema_version {} (this build reads version 1)",
                self.schema_version
            ));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        match self.kind {
            ExperimentKind::LzsMap | ExperimentKind::SingleShot => {
                if self.axes.len() != 2
                    || self.axes[0].name != "eps_lz0"
                    || self.axes[1].name != "nu"
                {
                    return fail(format!(
                        "{:?} needs axes [eps_lz0, nu], got [{}]",
                        self.kind,
                        self.axes
                            .iter()
                            .map(|a| a.name.as_str())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ));
                }
                if self.kind == ExperimentKind::SingleShot
                    && self.axes.iter().any(|a| a.count != 1)
                {
                    return fail("single_shot axes must both have count 1".into());
                }
                if self.axes[0].min <= 0.0 {
                    return fail("eps_lz0 axis must be positive".into());
                }
                match &self.pulse {
                    None => return fail("lzs_map/single_shot requires a pulse template".into()),
                    Some(p) => p.validate()?,
                }
            }
            ExperimentKind::KzCurve => {
                if self.axes.len() != 1 || self.axes[0].name != "nu" {
                    return fail("kz_curve needs exactly one axis named nu".into());
                }
                if self.pulse.is_some() {
                    return fail(
                        "kz_curve builds its own linear ramp; remove the pulse template".into(),
                    );
                }
            }
        }
        if let Some(nu_axis) = self.axes.iter().find(|a| a.name == "nu") {
            if nu_axis.min <= 0.0 {
                return fail("nu axis must be positive".into());
            }
        }
        if !self.tol.is_finite() || !(TOL_RANGE.0..=TOL_RANGE.1).contains(&self.tol) {
            return fail(format!(
                "tol {} outside [{}, {}]",
                self.tol, TOL_RANGE.0, TOL_RANGE.1
            ));
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return fail("alpha must be positive".into());
        }
        if !self.asymptotic_factor.is_finite() || self.asymptotic_factor < 1.0 {
            return fail("asymptotic_factor must be at least 1".into());
        }
        if let Some(r) = &self.readout {
            r.validate()?;
        }
        Ok(())
    }
}

/// Run metadata attached to every exported result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub code_version: String,
    /// Wall-clock duration of the run in seconds. Lives only here so the
    /// CSV tables stay reproducible byte for byte.
    pub wall_time_s: f64,
    pub fit: Option<AlphaFit>,
}

/// A finished sweep: named columns, rows ordered by grid index, metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Simulated detector voltage for excitation probability `p`:
/// `offset + v_scale * p` plus Gaussian noise of width `noise_sigma`. With
/// `noise_sigma = 0` the RNG is not consumed, so noiseless runs are
/// independent of RNG state.
pub fn simulate_readout<R: rand::Rng>(p: f64, cal: &ReadoutCal, rng: &mut R) -> f64 {
    let clean = cal.offset + cal.v_scale * p;
    if cal.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, cal.noise_sigma).expect("validated sigma");
        clean + normal.sample(rng)
    } else {
        clean
    }
}

/// Recovers the single-passage probability from a fringe scan of detector
/// signals: visibility = (max - min) / v_scale, inverted on the
/// near-adiabatic branch. The samples must cover at least one full fringe
/// period for the max/min estimate to be meaningful.
pub fn extract_p_lz(signals: &[f64], cal: &ReadoutCal) -> Result<f64, SweepError> {
    if signals.len() < MIN_FRINGE_SAMPLES {
        return Err(SweepError::TooFewFringeSamples(signals.len()));
    }
    if let Some(i) = signals.iter().position(|v| !v.is_finite()) {
        return Err(SweepError::NonFiniteSample(i));
    }
    let hi = signals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = signals.iter().cloned().fold(f64::INFINITY, f64::min);
    let v = (hi - lo) / cal.v_scale;
    if v > 0.5 {
        return Err(SweepError::InconsistentCalibration(v));
    }
    Ok(invert_visibility(v, VisibilityBranch::NearAdiabatic)?)
}

/// Everything the harness can say about one double-passage pulse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleShotSummary {
    /// Excited-state population from propagation (Lindblad when the qubit
    /// has dephasing, unitary otherwise).
    pub p_excited: f64,
    /// Ensemble-average formula at the realized crossing rate; absent when
    /// the crossing structure is not a clean double passage or p_lz > 1/2.
    pub p_paper_formula: Option<f64>,
    /// Transfer-matrix formula at the realized crossing rate.
    pub p_transfer_matrix: Option<f64>,
    /// Stuckelberg phase between the crossings.
    pub phi: Option<f64>,
    pub crossings: Vec<Crossing>,
    pub steps_accepted: u64,
}

fn propagate_auto(
    w: &Waveform,
    params: &QubitParams,
    tol: f64,
) -> Result<PropagationResult, PropagationError> {
    let eps_start = w.eval(w.time_span().0);
    let psi0 = prepare_ground(eps_start, params);
    if params.gamma_phi() > 0.0 {
        propagate_lindblad(w, params, &DensityMatrix::from_pure(&psi0), tol)
    } else {
        propagate_unitary(w, params, &psi0, tol)
    }
}

/// Propagates the ground state through an arbitrary waveform and compares
/// against the closed-form double-passage predictions where they apply.
pub fn single_shot(
    params: &QubitParams,
    w: &Waveform,
    tol: f64,
) -> Result<SingleShotSummary, SweepError> {
    let res = propagate_auto(w, params, tol)?;
    let report = w.crossing_report();
    let crossings = report.crossings.clone();
    let transversal: Vec<&Crossing> = report.transversal().collect();
    let (p_paper, p_tm, phi) = if transversal.len() == 2 {
        let nu_avg = 0.5 * (transversal[0].rate + transversal[1].rate);
        let phi = stuckelberg_phase(w, params)?;
        let p_lz = lz_probability(params.delta(), nu_avg);
        let d = adiabaticity_parameter(params.delta(), nu_avg);
        let paper = if p_lz <= 0.5 {
            Some(double_passage_paper(p_lz, phi)?)
        } else {
            None
        };
        let tm = Some(double_passage_transfer_matrix(p_lz, phi, d)?);
        (paper, tm, Some(phi))
    } else {
        (None, None, None)
    };
    Ok(SingleShotSummary {
        p_excited: res.p_excited,
        p_paper_formula: p_paper,
        p_transfer_matrix: p_tm,
        phi,
        crossings,
        steps_accepted: res.steps_accepted,
    })
}

const MAP_COLUMNS: [&str; 11] = [
    "eps_lz0",
    "nu",
    "p_excited_numeric",
    "p_paper_formula",
    "p_transfer_matrix",
    "phi",
    "nu_crossing_1",
    "nu_crossing_2",
    "x",
    "rho_theory",
    "flag",
];

const KZ_COLUMNS: [&str; 5] = ["nu", "x", "rho_numeric", "rho_theory", "flag"];

fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One map grid point. Failures that are properties of the grid point (no
/// anti-crossing passage within the pulse, step underflow) produce a
/// flagged row with NaN data instead of aborting the sweep.
fn map_point(cfg: &SweepConfig, index: u64, eps0: f64, nu: f64) -> Vec<f64> {
    let pulse = cfg.pulse.as_ref().expect("validated");
    let n_cols = MAP_COLUMNS.len() + usize::from(cfg.readout.is_some());
    let flagged = |eps0: f64, nu: f64| -> Vec<f64> {
        let mut row = vec![f64::NAN; n_cols];
        row[0] = eps0;
        row[1] = nu;
        row[MAP_COLUMNS.len() - 1] = 1.0;
        if cfg.readout.is_some() {
            *row.last_mut().unwrap() = f64::NAN;
        }
        row
    };
    let (ramp_time, eps_end) = match pulse.convention {
        SweepConvention::FixedAmplitude(a) => (a / nu, eps0 - a),
        SweepConvention::FixedRampTime(t) => (t, eps0 - nu * t),
    };
    if eps_end >= 0.0 {
        return flagged(eps0, nu);
    }
    let ideal = match make_double_passage(eps0, eps_end, ramp_time, pulse.hold_time) {
        Ok(w) => w,
        Err(_) => return flagged(eps0, nu),
    };
    let w = if pulse.filter_tau > 0.0 {
        match ideal.with_lowpass(pulse.filter_tau, pulse.effective_sample_dt()) {
            Ok(w) => w,
            Err(_) => return flagged(eps0, nu),
        }
    } else {
        ideal
    };
    let summary = match single_shot(&cfg.qubit, &w, cfg.tol) {
        Ok(s) => s,
        Err(_) => return flagged(eps0, nu),
    };
    let crossings: Vec<Crossing> = summary
        .crossings
        .iter()
        .filter(|c| !c.tangential)
        .cloned()
        .collect();
    if crossings.len() != 2 {
        return flagged(eps0, nu);
    }
    let nu_avg = 0.5 * (crossings[0].rate + crossings[1].rate);
    let x = map_lz_to_quench_ratio(cfg.qubit.delta(), nu_avg);
    let rho_theory = defect_density(cfg.alpha * x);
    let mut row = vec![
        eps0,
        nu,
        summary.p_excited,
        summary.p_paper_formula.unwrap_or(f64::NAN),
        summary.p_transfer_matrix.unwrap_or(f64::NAN),
        summary.phi.unwrap_or(f64::NAN),
        crossings[0].rate,
        crossings[1].rate,
        x,
        rho_theory,
        0.0,
    ];
    if let Some(cal) = &cfg.readout {
        let mut rng = point_rng(cfg.seed, index);
        row.push(simulate_readout(summary.p_excited, cal, &mut rng));
    }
    row
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, SweepError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| SweepError::Config(format!("failed to build thread pool: {e}")))
}

fn finish(
    cfg: &SweepConfig,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    fit: Option<AlphaFit>,
    started: std::time::Instant,
) -> SweepResult {
    SweepResult {
        metadata: SweepMetadata {
            schema_version: cfg.schema_version,
            config: cfg.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: started.elapsed().as_secs_f64(),
            fit,
        },
        columns,
        rows,
    }
}

fn map_columns(cfg: &SweepConfig) -> Vec<String> {
    let mut cols: Vec<String> = MAP_COLUMNS.iter().map(|s| s.to_string()).collect();
    if cfg.readout.is_some() {
        cols.push("detector_signal".to_string());
    }
    cols
}

/// Runs a 2D interference map over (eps_lz0, nu). Rows are ordered with the
/// eps_lz0 axis outermost, ascending in each axis.
pub fn run_lzs_map(cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    if cfg.kind != ExperimentKind::LzsMap {
        return Err(SweepError::Config(format!(
            "run_lzs_map called with kind {:?}",
            cfg.kind
        )));
    }
    run_map_grid(cfg)
}

/// Runs a single grid point with the map column layout.
pub fn run_single_shot(cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    if cfg.kind != ExperimentKind::SingleShot {
        return Err(SweepError::Config(format!(
            "run_single_shot called with kind {:?}",
            cfg.kind
        )));
    }
    run_map_grid(cfg)
}

fn run_map_grid(cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    let started = std::time::Instant::now();
    let eps_values = cfg.axes[0].values();
    let nu_values = cfg.axes[1].values();
    let n_inner = nu_values.len();
    let n_total = eps_values.len() * n_inner;
    let pool = thread_pool(cfg.workers)?;
    let rows: Vec<Vec<f64>> = pool.install(|| {
        (0..n_total)
            .into_par_iter()
            .map(|i| map_point(cfg, i as u64, eps_values[i / n_inner], nu_values[i % n_inner]))
            .collect()
    });
    Ok(finish(cfg, map_columns(cfg), rows, None, started))
}

/// Runs a defect-density curve: for each sweep rate, a single linear ramp
/// from `+eps0` to `-eps0` with `eps0 = asymptotic_factor * max(delta,
/// sqrt(hbar nu))`, recording the numeric defect density (excited-state
/// population) against the closed-form prediction. When at least
/// [`MIN_FIT_POINTS`](crate::kz::MIN_FIT_POINTS) clean points exist, the
/// freeze-out constant is fitted and attached to the metadata.
pub fn run_kz_curve(cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    if cfg.kind != ExperimentKind::KzCurve {
        return Err(SweepError::Config(format!(
            "run_kz_curve called with kind {:?}",
            cfg.kind
        )));
    }
    let started = std::time::Instant::now();
    let nu_values = cfg.axes[0].values();
    let delta = cfg.qubit.delta();
    let pool = thread_pool(cfg.workers)?;
    let rows: Vec<Vec<f64>> = pool.install(|| {
        nu_values
            .par_iter()
            .map(|&nu| {
                let eps0 = cfg.asymptotic_factor * delta.max((HBAR * nu).sqrt());
                let t_total = 2.0 * eps0 / nu;
                let x = map_lz_to_quench_ratio(delta, nu);
                let rho_theory = defect_density(cfg.alpha * x);
                let w = match Waveform::unfiltered(vec![(0.0, eps0), (t_total, -eps0)]) {
                    Ok(w) => w,
                    Err(_) => return vec![nu, x, f64::NAN, rho_theory, 1.0],
                };
                match propagate_auto(&w, &cfg.qubit, cfg.tol) {
                    Ok(res) => vec![nu, x, res.p_excited, rho_theory, 0.0],
                    Err(_) => vec![nu, x, f64::NAN, rho_theory, 1.0],
                }
            })
            .collect()
    });
    let fit_points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[4] == 0.0 && r[2].is_finite() && r[2] > 0.0 && r[2] <= 1.0)
        .map(|r| (r[1], r[2]))
        .collect();
    let fit = fit_alpha(&fit_points).ok();
    let columns = KZ_COLUMNS.iter().map(|s| s.to_string()).collect();
    Ok(finish(cfg, columns, rows, fit, started))
}

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    match cfg.kind {
        ExperimentKind::LzsMap => run_lzs_map(cfg),
        ExperimentKind::KzCurve => run_kz_curve(cfg),
        ExperimentKind::SingleShot => run_single_shot(cfg),
    }
}
