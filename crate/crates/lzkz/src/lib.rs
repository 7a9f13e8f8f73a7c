//! Landau-Zener / Kibble-Zurek dynamics of a driven two-level charge qubit.
//!
//! The crate models a charge qubit (single electron in a double quantum dot)
//! whose detuning is swept through the anti-crossing of
//!
//! ```text
//! H(eps) = [[ eps/2,  Delta ],
//!           [ Delta, -eps/2 ]]
//! ```
//!
//! and provides four layers on top of that model:
//!
//! * closed-form results for single and double anti-crossing passages
//!   (transition probability, Stuckelberg phase, interference visibility)
//!   in [`analytic`],
//! * exact-step numerical propagation of pure states and dephasing-damped
//!   density matrices through arbitrary piecewise-linear detuning pulses,
//!   optionally RC-filtered, in [`propagator`] and [`pulse`],
//! * the adiabatic-impulse (freeze-out) scaling theory that maps a detuning
//!   sweep onto a thermodynamic quench, with defect-density predictions and
//!   a one-parameter fit, in [`kz`],
//! * a deterministic, parallel sweep harness with JSON configs, CSV/JSON
//!   export, and a simulated detector readout chain, in [`sweep`].
//!
//! Units throughout: energies in ueV, times in ns, sweep rates in ueV/ns,
//! with `hbar` in matching units in [`units::HBAR`].

pub mod analytic;
pub mod kz;
pub mod model;
pub mod numeric;
pub mod propagator;
pub mod pulse;
pub mod sweep;
pub mod units;

pub use analytic::{
    adiabaticity_parameter, double_passage_paper, double_passage_transfer_matrix, lz_probability,
    stokes_phase, stuckelberg_phase, visibility, AnalyticError,
};
pub use kz::{defect_density, fit_alpha, freeze_out_kz, freeze_out_lz, AlphaFit, KzError};
pub use model::{build_hamiltonian, energy_gap, ModelError, PureState, QubitParams};
pub use propagator::{
    propagate_lindblad, propagate_unitary, prepare_ground, DensityMatrix, PropagationError,
    PropagationResult,
};
pub use pulse::{make_double_passage, Crossing, PulseError, Waveform};
pub use sweep::{run, single_shot, SweepConfig, SweepError, SweepResult};
pub use units::HBAR;
