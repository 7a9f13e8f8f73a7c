//! Unit conventions used throughout the crate.
//!
//! Energies are in microelectronvolts (ueV), times in nanoseconds (ns),
//! sweep rates in ueV/ns, and dephasing rates in 1/ns. With these choices
//! the reduced Planck constant is of order one, so the adiabaticity
//! parameter `delta^2 / (hbar nu)` and phase integrals stay well scaled.

/// Reduced Planck constant in ueV ns.
pub const HBAR: f64 = 0.6582119514;
