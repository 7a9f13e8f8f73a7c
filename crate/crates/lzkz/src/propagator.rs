//! Time evolution of the driven qubit along a detuning waveform.
//!
//! Each accepted step applies the exact 2x2 unitary of the Hamiltonian
//! frozen at the step midpoint (for a traceless real symmetric H the matrix
//! exponential has the closed Euler-Rodrigues form
//! `U = cos(theta) I - i sin(theta) H / |H|`), so the only discretization
//! error is the commutator of H with itself across the step. Step size is
//! controlled by step doubling: the result of one full step is compared
//! against two half steps, the more accurate composition is kept, and the
//! step grows or shrinks to hold the local error under a proportional share
//! of the requested tolerance.
//!
//! With pure dephasing the state is a density matrix and each step is a
//! Strang split: half a dephasing interval, the midpoint unitary, half a
//! dephasing interval. Dephasing at rate `gamma_phi` decays the position
//! off-diagonals as `exp(-2 gamma_phi t)` and is applied in closed form.

use num_complex::Complex64;

use crate::model::{adiabatic_basis, ModelError, PureState, QubitParams};
use crate::pulse::Waveform;
use crate::units::HBAR;

/// Smallest and largest accepted step-doubling tolerance.
pub const TOL_RANGE: (f64, f64) = (1e-13, 1e-2);

const SAFETY: f64 = 0.25;

/// Absolute floor on the per-step error budget. Comparing the full step
/// against two half steps costs a few tens of rounding errors on unit-norm
/// amplitudes, so measured step errors never drop much below ~1e-15 no
/// matter how small the step. A budget proportional to the step size alone
/// would fall under that noise floor for stiff stretches or for the final
/// sliver step and reject forever; the floor keeps the budget satisfiable.
/// Accumulated over a long run this admits at most ~1e-15 per accepted
/// step of extra error, which the reported `error_estimate` still tracks.
const STEP_ERROR_FLOOR: f64 = 5e-15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PropagationError {
    #[error("tolerance {0} outside [{min}, {max}]", min = TOL_RANGE.0, max = TOL_RANGE.1)]
    ToleranceOutOfRange(f64),
    #[error("step size underflowed at t = {time} ns; waveform too stiff for the tolerance")]
    StepUnderflow { time: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Hermitian, unit-trace 2x2 density matrix in the position basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace (both to 1e-9), then stores an
    /// exactly hermitized, exactly normalized matrix.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self, ModelError> {
        let herm_defect = (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs());
        if !herm_defect.is_finite() || herm_defect > 1e-9 {
            return Err(ModelError::NotHermitian(herm_defect));
        }
        let trace = m[0][0].re + m[1][1].re;
        if !trace.is_finite() || (trace - 1.0).abs() > 1e-9 {
            return Err(ModelError::NotNormalized((trace - 1.0).abs()));
        }
        let mut dm = DensityMatrix { m };
        dm.hermitize();
        dm.renormalize();
        Ok(dm)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let l = psi.amp_left();
        let r = psi.amp_right();
        DensityMatrix {
            m: [
                [l * l.conj(), l * r.conj()],
                [r * l.conj(), r * r.conj()],
            ],
        }
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re
    }

    /// tr(rho^2); 1 for pure states, 1/2 for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        let m = &self.m;
        (m[0][0] * m[0][0] + m[0][1] * m[1][0] + m[1][0] * m[0][1] + m[1][1] * m[1][1]).re
    }

    /// Smaller eigenvalue; a physical state has it >= 0 up to rounding.
    pub fn min_eigenvalue(&self) -> f64 {
        let tr = self.trace();
        let det = (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        0.5 * (tr - disc)
    }

    /// `<state| rho |state>`.
    pub fn population_in(&self, state: &PureState) -> f64 {
        let l = state.amp_left();
        let r = state.amp_right();
        let v = l.conj() * (self.m[0][0] * l + self.m[0][1] * r)
            + r.conj() * (self.m[1][0] * l + self.m[1][1] * r);
        v.re.clamp(0.0, 1.0)
    }

    fn hermitize(&mut self) {
        let avg = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        self.m[0][1] = avg;
        self.m[1][0] = avg.conj();
        self.m[0][0] = Complex64::new(self.m[0][0].re, 0.0);
        self.m[1][1] = Complex64::new(self.m[1][1].re, 0.0);
    }

    fn renormalize(&mut self) {
        let tr = self.trace();
        self.m[0][0] /= tr;
        self.m[0][1] /= tr;
        self.m[1][0] /= tr;
        self.m[1][1] /= tr;
    }
}

/// Final state of a propagation run.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

/// Output of a propagation run with step-controller diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub final_state: FinalState,
    /// Population of the instantaneous excited eigenstate at the final
    /// detuning, in [0, 1].
    pub p_excited: f64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    /// Largest accepted per-step error estimate.
    pub max_step_error: f64,
    /// Sum of accepted per-step error estimates (proxy for the global
    /// discretization error).
    pub error_estimate: f64,
}

/// Instantaneous ground state at detuning `eps`: the standard initial state
/// for sweeps prepared far from the anti-crossing.
pub fn prepare_ground(eps: f64, params: &QubitParams) -> PureState {
    adiabatic_basis(eps, params).0
}

#[derive(Clone, Copy)]
struct StepU {
    ul: Complex64, // diagonal entry acting on |L>
    ur: Complex64, // diagonal entry acting on |R>
    od: Complex64, // off-diagonal entry
}

#[inline]
fn step_unitary(eps: f64, delta: f64, h: f64) -> StepU {
    let a = 0.5 * eps;
    let w = a.hypot(delta);
    let theta = w * h / HBAR;
    let (s, c) = theta.sin_cos();
    let f = s / w;
    StepU {
        ul: Complex64::new(c, -f * a),
        ur: Complex64::new(c, f * a),
        od: Complex64::new(0.0, -f * delta),
    }
}

#[inline]
fn apply_unitary(u: &StepU, l: Complex64, r: Complex64) -> (Complex64, Complex64) {
    (u.ul * l + u.od * r, u.od * l + u.ur * r)
}

struct Controller {
    t: f64,
    t_end: f64,
    total: f64,
    h: f64,
    tol: f64,
    corners: Vec<f64>,
    next_corner: usize,
    steps_accepted: u64,
    steps_rejected: u64,
    max_step_error: f64,
    error_estimate: f64,
}

impl Controller {
    fn new(w: &Waveform, tol: f64) -> Result<Self, PropagationError> {
        if !tol.is_finite() || !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
            return Err(PropagationError::ToleranceOutOfRange(tol));
        }
        let (t0, t_end) = w.time_span();
        let total = t_end - t0;
        Ok(Controller {
            t: t0,
            t_end,
            total,
            h: total / 256.0,
            tol,
            corners: w.corner_times(),
            next_corner: 0,
            steps_accepted: 0,
            steps_rejected: 0,
            max_step_error: 0.0,
            error_estimate: 0.0,
        })
    }

    fn done(&self) -> bool {
        self.t_end - self.t <= self.total * 1e-15
    }

    /// Trial step for the current position: the stored step, clamped so it
    /// never reaches past the next waveform corner or the end of the span.
    /// Without the corner clamp, a long step grown on a slowly varying
    /// segment can swallow a corner whole; the error estimate samples the
    /// trace at three interior points and sees nothing wrong, while the
    /// skipped segment change feeds a large phase error into the state.
    fn step_size(&mut self) -> f64 {
        while self.next_corner < self.corners.len()
            && self.corners[self.next_corner] - self.t <= self.total * 1e-15
        {
            self.next_corner += 1;
        }
        self.h = self.h.min(self.t_end - self.t);
        if self.next_corner < self.corners.len() {
            self.h = self.h.min(self.corners[self.next_corner] - self.t);
        }
        self.h
    }

    /// Records the outcome of a trial step; returns true when accepted.
    fn record(&mut self, err: f64) -> Result<bool, PropagationError> {
        let allowed = self.tol * (self.h / self.total) * SAFETY + STEP_ERROR_FLOOR;
        if err.is_finite() && err <= allowed {
            self.t += self.h;
            self.steps_accepted += 1;
            self.max_step_error = self.max_step_error.max(err);
            self.error_estimate += err;
            if err < allowed / 16.0 {
                self.h *= 2.0;
            }
            Ok(true)
        } else {
            self.steps_rejected += 1;
            self.h *= 0.5;
            if self.h < self.total * 1e-16 {
                return Err(PropagationError::StepUnderflow { time: self.t });
            }
            Ok(false)
        }
    }
}

/// Propagates a pure state along the waveform under the Schrodinger
/// equation, ignoring dephasing. The state norm is re-pinned to 1 after
/// every accepted step, so norm conservation holds to machine precision
/// regardless of trajectory length.
pub fn propagate_unitary(
    w: &Waveform,
    params: &QubitParams,
    psi0: &PureState,
    tol: f64,
) -> Result<PropagationResult, PropagationError> {
    let mut ctl = Controller::new(w, tol)?;
    let delta = params.delta();
    let (mut l, mut r) = (psi0.amp_left(), psi0.amp_right());
    while !ctl.done() {
        let h = ctl.step_size();
        let t = ctl.t;
        let u_full = step_unitary(w.eval(t + 0.5 * h), delta, h);
        let (fl, fr) = apply_unitary(&u_full, l, r);
        let u_h1 = step_unitary(w.eval(t + 0.25 * h), delta, 0.5 * h);
        let u_h2 = step_unitary(w.eval(t + 0.75 * h), delta, 0.5 * h);
        let (hl, hr) = apply_unitary(&u_h1, l, r);
        let (hl, hr) = apply_unitary(&u_h2, hl, hr);
        let err = ((fl - hl).norm_sqr() + (fr - hr).norm_sqr()).sqrt();
        if ctl.record(err)? {
            let inv_norm = 1.0 / (hl.norm_sqr() + hr.norm_sqr()).sqrt();
            l = hl * inv_norm;
            r = hr * inv_norm;
        }
    }
    let psi = PureState::new(l, r)?;
    let (_, excited) = adiabatic_basis(w.eval(ctl.t_end), params);
    Ok(PropagationResult {
        p_excited: psi.probability_in(&excited),
        final_state: FinalState::Pure(psi),
        steps_accepted: ctl.steps_accepted,
        steps_rejected: ctl.steps_rejected,
        max_step_error: ctl.max_step_error,
        error_estimate: ctl.error_estimate,
    })
}

#[inline]
fn evolve_density(
    rho: &[[Complex64; 2]; 2],
    u: &StepU,
    decay_half: f64,
) -> [[Complex64; 2]; 2] {
    // Strang split: dephase(h/2), unitary(h), dephase(h/2).
    let mut m = *rho;
    m[0][1] *= decay_half;
    m[1][0] *= decay_half;
    // rho' = U rho U^dagger.
    let (a, b) = (m[0][0], m[0][1]);
    let (c, d) = (m[1][0], m[1][1]);
    let r00 = u.ul * a + u.od * c;
    let r01 = u.ul * b + u.od * d;
    let r10 = u.od * a + u.ur * c;
    let r11 = u.od * b + u.ur * d;
    let mut out = [
        [
            r00 * u.ul.conj() + r01 * u.od.conj(),
            r00 * u.od.conj() + r01 * u.ur.conj(),
        ],
        [
            r10 * u.ul.conj() + r11 * u.od.conj(),
            r10 * u.od.conj() + r11 * u.ur.conj(),
        ],
    ];
    out[0][1] *= decay_half;
    out[1][0] *= decay_half;
    out
}

fn frobenius_diff(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

/// Propagates a density matrix along the waveform under coherent evolution
/// plus pure dephasing at rate `gamma_phi`. Trace and hermiticity are
/// re-pinned after every accepted step.
pub fn propagate_lindblad(
    w: &Waveform,
    params: &QubitParams,
    rho0: &DensityMatrix,
    tol: f64,
) -> Result<PropagationResult, PropagationError> {
    let mut ctl = Controller::new(w, tol)?;
    let delta = params.delta();
    let gamma = params.gamma_phi();
    let mut rho = [
        [rho0.element(0, 0), rho0.element(0, 1)],
        [rho0.element(1, 0), rho0.element(1, 1)],
    ];
    while !ctl.done() {
        let h = ctl.step_size();
        let t = ctl.t;
        // Off-diagonals decay as exp(-gamma_phi t); each Strang half-factor
        // covers half the step duration.
        let decay_full = (-0.5 * gamma * h).exp();
        let decay_half = (-0.25 * gamma * h).exp();
        let u_full = step_unitary(w.eval(t + 0.5 * h), delta, h);
        let full = evolve_density(&rho, &u_full, decay_full);
        let u_h1 = step_unitary(w.eval(t + 0.25 * h), delta, 0.5 * h);
        let u_h2 = step_unitary(w.eval(t + 0.75 * h), delta, 0.5 * h);
        let halves = evolve_density(&evolve_density(&rho, &u_h1, decay_half), &u_h2, decay_half);
        let err = frobenius_diff(&full, &halves);
        if ctl.record(err)? {
            rho = halves;
            // Re-pin hermiticity and trace against rounding drift.
            let avg = 0.5 * (rho[0][1] + rho[1][0].conj());
            rho[0][1] = avg;
            rho[1][0] = avg.conj();
            let tr = rho[0][0].re + rho[1][1].re;
            rho[0][0] = Complex64::new(rho[0][0].re / tr, 0.0);
            rho[1][1] = Complex64::new(rho[1][1].re / tr, 0.0);
            rho[0][1] /= tr;
            rho[1][0] /= tr;
        }
    }
    let dm = DensityMatrix::new(rho)?;
    let (_, excited) = adiabatic_basis(w.eval(ctl.t_end), params);
    Ok(PropagationResult {
        p_excited: dm.population_in(&excited),
        final_state: FinalState::Mixed(dm),
        steps_accepted: ctl.steps_accepted,
        steps_rejected: ctl.steps_rejected,
        max_step_error: ctl.max_step_error,
        error_estimate: ctl.error_estimate,
    })
}
