//! Two-level charge qubit model in the position (left/right dot) basis.
//!
//! The Hamiltonian is
//!
//! ```text
//! H(eps) = [ eps/2   delta ]
//!          [ delta  -eps/2 ]
//! ```
//!
//! where `eps` is the detuning between the dots and `delta` the tunnel
//! coupling, both in ueV. The instantaneous level spacing is
//! `E(eps) = sqrt(eps^2 + 4 delta^2)`, with minimum `2 delta` at `eps = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance accepted by [`PureState::new`] on the input norm.
pub const STATE_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("tunnel coupling must be positive and finite, got {0} ueV")]
    InvalidCoupling(f64),
    #[error("dephasing rate must be nonnegative and finite, got {0} 1/ns")]
    InvalidDephasing(f64),
    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("state amplitudes must be finite and not both zero")]
    DegenerateState,
    #[error("matrix deviates from hermitian by {0:.3e}")]
    NotHermitian(f64),
}

/// Static qubit parameters: tunnel coupling `delta` (ueV) and pure dephasing
/// rate `gamma_phi` (1/ns). The convention is that position-basis coherences
/// decay as `exp(-gamma_phi t)`, i.e. `gamma_phi = 1 / T2`. Validated on
/// construction and on deserialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QubitParamsRaw", into = "QubitParamsRaw")]
pub struct QubitParams {
    delta: f64,
    gamma_phi: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QubitParamsRaw {
    delta: f64,
    #[serde(default)]
    gamma_phi: f64,
}

impl TryFrom<QubitParamsRaw> for QubitParams {
    type Error = ModelError;
    fn try_from(raw: QubitParamsRaw) -> Result<Self, ModelError> {
        QubitParams::new(raw.delta, raw.gamma_phi)
    }
}

impl From<QubitParams> for QubitParamsRaw {
    fn from(p: QubitParams) -> Self {
        QubitParamsRaw {
            delta: p.delta,
            gamma_phi: p.gamma_phi,
        }
    }
}

impl QubitParams {
    pub fn new(delta: f64, gamma_phi: f64) -> Result<Self, ModelError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(ModelError::InvalidCoupling(delta));
        }
        if !(gamma_phi >= 0.0) || !gamma_phi.is_finite() {
            return Err(ModelError::InvalidDephasing(gamma_phi));
        }
        Ok(QubitParams { delta, gamma_phi })
    }

    /// Coherent-only parameter set (`gamma_phi = 0`).
    pub fn coherent(delta: f64) -> Result<Self, ModelError> {
        Self::new(delta, 0.0)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma_phi(&self) -> f64 {
        self.gamma_phi
    }
}

/// Real symmetric 2x2 Hamiltonian at a fixed detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian2 {
    half_detuning: f64,
    coupling: f64,
}

impl Hamiltonian2 {
    pub fn half_detuning(&self) -> f64 {
        self.half_detuning
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Matrix in the (left, right) basis, row major.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [
            [self.half_detuning, self.coupling],
            [self.coupling, -self.half_detuning],
        ]
    }

    /// Eigenvalues as `(lower, upper)`, i.e. `(-E/2, +E/2)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let w = self.half_detuning.hypot(self.coupling);
        (-w, w)
    }

    /// `H |psi>` as raw amplitudes.
    pub fn apply(&self, psi: &PureState) -> (Complex64, Complex64) {
        (
            self.half_detuning * psi.amp_left + self.coupling * psi.amp_right,
            self.coupling * psi.amp_left - self.half_detuning * psi.amp_right,
        )
    }
}

/// Normalized pure state `c_L |L> + c_R |R>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amp_left: Complex64,
    amp_right: Complex64,
}

impl PureState {
    /// Builds a state from amplitudes that are already normalized to within
    /// [`STATE_NORM_TOL`]; the stored amplitudes are renormalized exactly.
    pub fn new(amp_left: Complex64, amp_right: Complex64) -> Result<Self, ModelError> {
        let norm = (amp_left.norm_sqr() + amp_right.norm_sqr()).sqrt();
        if !norm.is_finite() {
            return Err(ModelError::DegenerateState);
        }
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(ModelError::NotNormalized((norm - 1.0).abs()));
        }
        Ok(PureState {
            amp_left: amp_left / norm,
            amp_right: amp_right / norm,
        })
    }

    /// Builds a state from any finite, not-both-zero amplitude pair by
    /// normalizing it.
    pub fn normalized(amp_left: Complex64, amp_right: Complex64) -> Result<Self, ModelError> {
        let norm = (amp_left.norm_sqr() + amp_right.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(ModelError::DegenerateState);
        }
        Ok(PureState {
            amp_left: amp_left / norm,
            amp_right: amp_right / norm,
        })
    }

    pub(crate) fn from_normalized_parts(amp_left: Complex64, amp_right: Complex64) -> Self {
        PureState {
            amp_left,
            amp_right,
        }
    }

    pub fn basis_left() -> Self {
        PureState {
            amp_left: Complex64::new(1.0, 0.0),
            amp_right: Complex64::new(0.0, 0.0),
        }
    }

    pub fn basis_right() -> Self {
        PureState {
            amp_left: Complex64::new(0.0, 0.0),
            amp_right: Complex64::new(1.0, 0.0),
        }
    }

    pub fn amp_left(&self) -> Complex64 {
        self.amp_left
    }

    pub fn amp_right(&self) -> Complex64 {
        self.amp_right
    }

    pub fn norm(&self) -> f64 {
        (self.amp_left.norm_sqr() + self.amp_right.norm_sqr()).sqrt()
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amp_left.conj() * other.amp_left + self.amp_right.conj() * other.amp_right
    }

    /// `|<basis|self>|^2`, clamped to [0, 1] against rounding.
    pub fn probability_in(&self, basis: &PureState) -> f64 {
        basis.overlap(self).norm_sqr().clamp(0.0, 1.0)
    }

    /// Multiplies by a global phase so that the first amplitude of magnitude
    /// above 1e-14 becomes real and positive. Makes state comparisons and
    /// serialized output deterministic.
    pub fn with_canonical_phase(&self) -> Self {
        let pivot = if self.amp_left.norm() > 1e-14 {
            self.amp_left
        } else {
            self.amp_right
        };
        let phase = pivot / pivot.norm();
        PureState {
            amp_left: self.amp_left * phase.conj(),
            amp_right: self.amp_right * phase.conj(),
        }
    }
}

/// Hamiltonian at detuning `eps` for the given parameters.
pub fn build_hamiltonian(eps: f64, params: &QubitParams) -> Hamiltonian2 {
    Hamiltonian2 {
        half_detuning: 0.5 * eps,
        coupling: params.delta(),
    }
}

/// Instantaneous level spacing `E(eps) = sqrt(eps^2 + 4 delta^2)`.
pub fn energy_gap(eps: f64, params: &QubitParams) -> f64 {
    eps.hypot(2.0 * params.delta())
}

/// Instantaneous eigenstates `(ground, excited)` at detuning `eps`.
///
/// Both states are returned with a real, positive left amplitude. The
/// arithmetic avoids the cancellation `eps + E` (for `eps < 0`) and
/// `E - eps` (for `eps > 0`) by rewriting through `4 delta^2`, so the
/// results stay accurate at large |detuning|.
pub fn adiabatic_basis(eps: f64, params: &QubitParams) -> (PureState, PureState) {
    let two_delta = 2.0 * params.delta();
    let e = energy_gap(eps, params);
    let eps_plus_e = if eps >= 0.0 {
        eps + e
    } else {
        (two_delta * two_delta) / (e - eps)
    };
    let eps_minus_e = if eps >= 0.0 {
        -(two_delta * two_delta) / (e + eps)
    } else {
        eps - e
    };
    let ground = real_unit(two_delta, -eps_plus_e);
    let excited = real_unit(two_delta, -eps_minus_e);
    (ground, excited)
}

fn real_unit(a: f64, b: f64) -> PureState {
    let n = a.hypot(b);
    PureState::from_normalized_parts(
        Complex64::new(a / n, 0.0),
        Complex64::new(b / n, 0.0),
    )
}
