//! Detuning waveforms: piecewise-linear pulse shapes, an optional RC
//! low-pass filter emulating the finite bandwidth of the drive line, and
//! zero-crossing analysis (crossing times and local sweep rates).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Sample step (ns) used for waveforms that carry no filter.
pub const DEFAULT_SAMPLE_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PulseError {
    #[error("waveform needs at least 2 breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("breakpoint times must be strictly increasing (violated at index {0})")]
    NonMonotonicTime(usize),
    #[error("breakpoint at index {0} is not finite")]
    NonFiniteBreakpoint(usize),
    #[error("filter time constant must be nonnegative and finite, got {0} ns")]
    InvalidFilterTau(f64),
    #[error("sample step must be positive and finite, got {0} ns")]
    InvalidSampleStep(f64),
    #[error("sample step {sample_dt} ns undersamples filter tau {filter_tau} ns (need sample_dt <= filter_tau / 10)")]
    UndersampledFilter { sample_dt: f64, filter_tau: f64 },
    #[error("double passage must start at positive detuning, got {0} ueV")]
    InvalidStart(f64),
    #[error("double passage must turn around at negative detuning, got {0} ueV")]
    InvalidEnd(f64),
    #[error("ramp time must be positive, got {0} ns")]
    InvalidRampTime(f64),
    #[error("hold time must be nonnegative, got {0} ns")]
    InvalidHoldTime(f64),
}

/// A zero crossing of the detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// Time of the crossing in ns.
    pub time: f64,
    /// Local sweep rate |d eps / dt| in ueV/ns (0 for tangential events).
    pub rate: f64,
    /// True when the waveform touches zero without changing sign.
    pub tangential: bool,
}

/// All zero crossings of a waveform, in time order.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
}

impl CrossingReport {
    pub fn transversal(&self) -> impl Iterator<Item = &Crossing> {
        self.crossings.iter().filter(|c| !c.tangential)
    }

    pub fn transversal_count(&self) -> usize {
        self.transversal().count()
    }
}

/// Piecewise-linear detuning waveform eps(t), optionally seen through a
/// single-pole RC low-pass filter.
///
/// When `filter_tau > 0` the filtered trace is precomputed on a grid of step
/// `sample_dt` at construction time; [`Waveform::eval`] and
/// [`Waveform::crossing_report`] then operate on that trace. Outside the
/// breakpoint span the waveform extrapolates as a constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "WaveformRaw", into = "WaveformRaw")]
pub struct Waveform {
    breakpoints: Vec<(f64, f64)>,
    filter_tau: f64,
    sample_dt: f64,
    #[serde(skip)]
    filtered: Option<Arc<Vec<(f64, f64)>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveformRaw {
    breakpoints: Vec<(f64, f64)>,
    #[serde(default)]
    filter_tau: f64,
    #[serde(default = "default_sample_dt")]
    sample_dt: f64,
}

fn default_sample_dt() -> f64 {
    DEFAULT_SAMPLE_DT
}

impl TryFrom<WaveformRaw> for Waveform {
    type Error = PulseError;
    fn try_from(raw: WaveformRaw) -> Result<Self, PulseError> {
        Waveform::new(raw.breakpoints, raw.filter_tau, raw.sample_dt)
    }
}

impl From<Waveform> for WaveformRaw {
    fn from(w: Waveform) -> Self {
        WaveformRaw {
            breakpoints: w.breakpoints,
            filter_tau: w.filter_tau,
            sample_dt: w.sample_dt,
        }
    }
}

impl PartialEq for Waveform {
    fn eq(&self, other: &Self) -> bool {
        self.breakpoints == other.breakpoints
            && self.filter_tau == other.filter_tau
            && self.sample_dt == other.sample_dt
    }
}

impl Waveform {
    pub fn new(
        breakpoints: Vec<(f64, f64)>,
        filter_tau: f64,
        sample_dt: f64,
    ) -> Result<Self, PulseError> {
        if breakpoints.len() < 2 {
            return Err(PulseError::TooFewBreakpoints(breakpoints.len()));
        }
        for (i, &(t, e)) in breakpoints.iter().enumerate() {
            if !t.is_finite() || !e.is_finite() {
                return Err(PulseError::NonFiniteBreakpoint(i));
            }
            if i > 0 && t <= breakpoints[i - 1].0 {
                return Err(PulseError::NonMonotonicTime(i));
            }
        }
        if !filter_tau.is_finite() || filter_tau < 0.0 {
            return Err(PulseError::InvalidFilterTau(filter_tau));
        }
        if !sample_dt.is_finite() || sample_dt <= 0.0 {
            return Err(PulseError::InvalidSampleStep(sample_dt));
        }
        let filtered = if filter_tau > 0.0 {
            if sample_dt > filter_tau / 10.0 {
                return Err(PulseError::UndersampledFilter {
                    sample_dt,
                    filter_tau,
                });
            }
            Some(Arc::new(rc_filter(&breakpoints, filter_tau, sample_dt)))
        } else {
            None
        };
        Ok(Waveform {
            breakpoints,
            filter_tau,
            sample_dt,
            filtered,
        })
    }

    /// Unfiltered waveform with the default sample step.
    pub fn unfiltered(breakpoints: Vec<(f64, f64)>) -> Result<Self, PulseError> {
        Self::new(breakpoints, 0.0, DEFAULT_SAMPLE_DT)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn filter_tau(&self) -> f64 {
        self.filter_tau
    }

    pub fn sample_dt(&self) -> f64 {
        self.sample_dt
    }

    /// First and last breakpoint time. The filtered trace spans the same
    /// interval.
    pub fn time_span(&self) -> (f64, f64) {
        (
            self.breakpoints[0].0,
            self.breakpoints[self.breakpoints.len() - 1].0,
        )
    }

    /// The polyline that evaluation runs on: the dense filtered trace when a
    /// filter is present, the raw breakpoints otherwise.
    pub(crate) fn polyline(&self) -> &[(f64, f64)] {
        match &self.filtered {
            Some(f) => f,
            None => &self.breakpoints,
        }
    }

    /// Detuning at time `t` (ueV): linear interpolation on the active
    /// polyline, constant extrapolation outside its span.
    pub fn eval(&self, t: f64) -> f64 {
        eval_polyline(self.polyline(), t)
    }

    /// Polyline node times strictly inside `(t1, t2)`; integrals over the
    /// trace split at these points because the trace is only piecewise
    /// smooth.
    pub(crate) fn breakpoints_between(&self, t1: f64, t2: f64) -> Vec<f64> {
        self.polyline()
            .iter()
            .map(|&(t, _)| t)
            .filter(|&t| t > t1 && t < t2)
            .collect()
    }

    /// Raw node times strictly inside the span, filter or not.
    ///
    /// Step control must not let a trial step straddle one of these: the
    /// step-doubling error estimate samples the trace at three interior
    /// points, and a step that reaches past a corner can land all three on
    /// the near side, measuring nothing about the far side. A filtered
    /// trace is smooth between the original corners, so the raw times are
    /// the right guard rail in both modes.
    pub(crate) fn corner_times(&self) -> Vec<f64> {
        let (t0, t1) = self.time_span();
        self.breakpoints
            .iter()
            .map(|&(t, _)| t)
            .filter(|&t| t > t0 && t < t1)
            .collect()
    }

    /// Zero crossings of the evaluated waveform.
    ///
    /// For unfiltered waveforms the crossing times come from exact linear
    /// solves on the segments, so they carry no discretization error. For
    /// filtered waveforms the dense trace is solved the same way and the
    /// rate is a central difference with step `sample_dt`. A node that only
    /// touches zero (no sign change, or a zero at the boundary of the span)
    /// is reported with `tangential = true` and rate 0; a run of consecutive
    /// zero nodes collapses to one event at the middle of the run.
    pub fn crossing_report(&self) -> CrossingReport {
        let pts = self.polyline();
        let mut crossings = Vec::new();
        let n = pts.len();
        let mut i = 0;
        while i < n {
            let (t0, e0) = pts[i];
            if e0 == 0.0 {
                let start = i;
                while i + 1 < n && pts[i + 1].1 == 0.0 {
                    i += 1;
                }
                let time = 0.5 * (t0 + pts[i].0);
                let prev = start.checked_sub(1).map(|j| pts[j]);
                let next = pts.get(i + 1).copied();
                crossings.push(self.zero_run_event(time, prev, (t0, pts[i].0), next));
                i += 1;
                continue;
            }
            if i + 1 < n {
                let (t1, e1) = pts[i + 1];
                if e1 != 0.0 && e0.signum() != e1.signum() {
                    let time = t0 + (t1 - t0) * (-e0) / (e1 - e0);
                    let rate = self.rate_at(time, ((e1 - e0) / (t1 - t0)).abs());
                    crossings.push(Crossing {
                        time,
                        rate,
                        tangential: false,
                    });
                }
            }
            i += 1;
        }
        CrossingReport { crossings }
    }

    fn zero_run_event(
        &self,
        time: f64,
        prev: Option<(f64, f64)>,
        run: (f64, f64),
        next: Option<(f64, f64)>,
    ) -> Crossing {
        match (prev, next) {
            (Some((tp, ep)), Some((tn, en))) if ep.signum() != en.signum() => {
                let slope_in = (-ep / (run.0 - tp)).abs();
                let slope_out = (en / (tn - run.1)).abs();
                let rate = self.rate_at(time, 0.5 * (slope_in + slope_out));
                Crossing {
                    time,
                    rate,
                    tangential: false,
                }
            }
            _ => Crossing {
                time,
                rate: 0.0,
                tangential: true,
            },
        }
    }

    fn rate_at(&self, time: f64, segment_rate: f64) -> f64 {
        if self.filter_tau > 0.0 {
            let h = self.sample_dt;
            ((self.eval(time + h) - self.eval(time - h)) / (2.0 * h)).abs()
        } else {
            segment_rate
        }
    }

    /// New waveform whose breakpoints are the RC-filtered trace of this one,
    /// densely sampled with step `sample_dt` and carrying no further filter.
    /// Applying it to an already filtered waveform filters the filtered
    /// trace again (filter composition).
    pub fn apply_lowpass(&self, tau_rc: f64, sample_dt: f64) -> Result<Waveform, PulseError> {
        if !tau_rc.is_finite() || tau_rc <= 0.0 {
            return Err(PulseError::InvalidFilterTau(tau_rc));
        }
        if !sample_dt.is_finite() || sample_dt <= 0.0 {
            return Err(PulseError::InvalidSampleStep(sample_dt));
        }
        if sample_dt > tau_rc / 10.0 {
            return Err(PulseError::UndersampledFilter {
                sample_dt,
                filter_tau: tau_rc,
            });
        }
        Waveform::new(rc_filter(self.polyline(), tau_rc, sample_dt), 0.0, sample_dt)
    }

    /// Same breakpoints with an attached RC filter; evaluation then runs on
    /// the filtered trace.
    pub fn with_lowpass(&self, tau_rc: f64, sample_dt: f64) -> Result<Waveform, PulseError> {
        Waveform::new(self.breakpoints.clone(), tau_rc, sample_dt)
    }
}

/// Double-passage pulse for Landau-Zener-Stuckelberg interferometry: start
/// far on the positive-detuning side at `eps_lz0`, ramp linearly through the
/// anti-crossing to `eps_end < 0` in `ramp_time`, optionally hold there, and
/// ramp back symmetrically. The result has exactly two transversal zero
/// crossings, both with rate `(eps_lz0 - eps_end) / ramp_time`.
pub fn make_double_passage(
    eps_lz0: f64,
    eps_end: f64,
    ramp_time: f64,
    hold_time: f64,
) -> Result<Waveform, PulseError> {
    if !eps_lz0.is_finite() || eps_lz0 <= 0.0 {
        return Err(PulseError::InvalidStart(eps_lz0));
    }
    if !eps_end.is_finite() || eps_end >= 0.0 {
        return Err(PulseError::InvalidEnd(eps_end));
    }
    if !ramp_time.is_finite() || ramp_time <= 0.0 {
        return Err(PulseError::InvalidRampTime(ramp_time));
    }
    if !hold_time.is_finite() || hold_time < 0.0 {
        return Err(PulseError::InvalidHoldTime(hold_time));
    }
    let mut pts = vec![(0.0, eps_lz0), (ramp_time, eps_end)];
    if hold_time > 0.0 {
        pts.push((ramp_time + hold_time, eps_end));
    }
    pts.push((2.0 * ramp_time + hold_time, eps_lz0));
    Waveform::unfiltered(pts)
}

fn eval_polyline(pts: &[(f64, f64)], t: f64) -> f64 {
    let n = pts.len();
    if t <= pts[0].0 {
        return pts[0].1;
    }
    if t >= pts[n - 1].0 {
        return pts[n - 1].1;
    }
    // Index of the first breakpoint strictly past t; the segment before it
    // contains t.
    let hi = pts.partition_point(|&(tk, _)| tk <= t);
    let (t0, e0) = pts[hi - 1];
    let (t1, e1) = pts[hi];
    e0 + (e1 - e0) * (t - t0) / (t1 - t0)
}

/// Exact single-pole RC update marched over a uniform grid of step `dt`:
/// `y_{k+1} = x_{k+1} + (y_k - x_{k+1}) exp(-dt / tau)`, seeded with
/// `y_0 = x(t_0)`. When the span is not a whole number of steps, one final
/// shorter step lands exactly on the end of the span so the filtered trace
/// covers the same time interval as the input.
fn rc_filter(pts: &[(f64, f64)], tau: f64, dt: f64) -> Vec<(f64, f64)> {
    let t0 = pts[0].0;
    let t_end = pts[pts.len() - 1].0;
    let span = t_end - t0;
    let n_full = (span / dt).floor() as usize;
    let decay = (-dt / tau).exp();
    let mut out = Vec::with_capacity(n_full + 2);
    let mut y = pts[0].1;
    out.push((t0, y));
    for k in 1..=n_full {
        let t = t0 + k as f64 * dt;
        let x = eval_polyline(pts, t);
        y = x + (y - x) * decay;
        out.push((t, y));
    }
    let t_last = out[out.len() - 1].0;
    if t_last < t_end {
        let x = eval_polyline(pts, t_end);
        y = x + (y - x) * (-(t_end - t_last) / tau).exp();
        out.push((t_end, y));
    }
    out
}
