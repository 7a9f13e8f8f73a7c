//! Kibble-Zurek freeze-out analysis and its mapping onto anti-crossing
//! sweeps.
//!
//! A linear quench crossing a critical point at `t = 0` has relaxation time
//! `tau(t) = tau0 tau_q / |t|`. The system falls out of equilibrium when
//! the remaining time equals `alpha` times the relaxation time, giving the
//! freeze-out time `t_hat = sqrt(tau0 tau_q / alpha)`, and the resulting
//! defect density depends only on the dimensionless ratio
//! `x = alpha tau_q / tau0`:
//!
//! ```text
//! rho_d(x) = 2 / (x^2 + x sqrt(x^2 + 4) + 2)
//! ```
//!
//! For a two-level anti-crossing swept at rate `nu` the same construction
//! identifies `x = 4 delta^2 / (hbar nu)`, so defect-density scaling can be
//! tested against exact sweep dynamics.

use crate::numeric::{bisect, golden_min};
use crate::units::HBAR;

/// Minimum number of points accepted by [`fit_alpha`].
pub const MIN_FIT_POINTS: usize = 5;

/// Search interval for the freeze-out matching constant in [`fit_alpha`].
pub const ALPHA_RANGE: (f64, f64) = (0.01, 100.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KzError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("relaxation time diverges at the critical point t = 0")]
    CriticalPointDivergence,
    #[error("defect-density fit needs at least {MIN_FIT_POINTS} points, got {0}")]
    FitTooFewPoints(usize),
    #[error("fit point {index} invalid: x = {x}, rho = {rho} (need finite x > 0 and 0 < rho <= 1)")]
    FitInvalidPoint { index: usize, x: f64, rho: f64 },
    #[error("fit abscissas are all identical")]
    FitDegenerateAbscissa,
}

/// Linear quench through a critical point: microscopic time `tau0`, quench
/// time `tau_q`, freeze-out matching constant `alpha` (all positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KZQuench {
    tau0: f64,
    tau_q: f64,
    alpha: f64,
}

impl KZQuench {
    pub fn new(tau0: f64, tau_q: f64, alpha: f64) -> Result<Self, KzError> {
        for (name, value) in [("tau0", tau0), ("tau_q", tau_q), ("alpha", alpha)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(KzError::NonPositiveParameter { name, value });
            }
        }
        Ok(KZQuench { tau0, tau_q, alpha })
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn tau_q(&self) -> f64 {
        self.tau_q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Which side of the freeze-out boundary a time belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Far from the critical point: the system tracks its ground state.
    Adiabatic,
    /// Inside the freeze-out window: the state is effectively frozen.
    Impulse,
}

/// Defect density as a function of the scaled quench ratio `x >= 0`.
/// Equals 1 in the sudden limit (`x = 0`) and falls off as `1/x^2`.
pub fn defect_density(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "defect_density needs x >= 0, got {x}");
    2.0 / (x * x + x * (x * x + 4.0).sqrt() + 2.0)
}

/// Relaxation time `tau0 tau_q / |t|` at time `t` from the critical point.
pub fn relaxation_time(q: &KZQuench, t: f64) -> Result<f64, KzError> {
    if t == 0.0 {
        return Err(KzError::CriticalPointDivergence);
    }
    Ok(q.tau0 * q.tau_q / t.abs())
}

/// Freeze-out time `sqrt(tau0 tau_q / alpha)` of a quench: the |t| at which
/// `alpha |t| = tau(t)`.
pub fn freeze_out_kz(q: &KZQuench) -> f64 {
    (q.tau0 * q.tau_q / q.alpha).sqrt()
}

/// Freeze-out time of an anti-crossing sweep at rate `nu`: solves
/// `hbar / E(nu t) = alpha t` by bisection, where `E` is the level spacing
/// at detuning `nu t`. The left side is the instantaneous quantum
/// relaxation time, so this is the sweep analogue of [`freeze_out_kz`].
pub fn freeze_out_lz(delta: f64, nu: f64, alpha: f64) -> Result<f64, KzError> {
    for (name, value) in [("delta", delta), ("nu", nu), ("alpha", alpha)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(KzError::NonPositiveParameter { name, value });
        }
    }
    let f = |t: f64| alpha * t - HBAR / (nu * t).hypot(2.0 * delta);
    // f(0) < 0; at t = hbar / (2 alpha delta) the relaxation side can be at
    // most hbar / (2 delta), so f >= 0 there.
    let hi = HBAR / (2.0 * alpha * delta);
    Ok(bisect(f, 0.0, hi, 1e-14))
}

/// Adiabatic/impulse classification of a time relative to the freeze-out
/// boundary `t_hat` (the boundary itself counts as adiabatic).
pub fn classify_regime(t: f64, t_hat: f64) -> Regime {
    debug_assert!(t_hat > 0.0, "classify_regime needs t_hat > 0, got {t_hat}");
    if t.abs() >= t_hat {
        Regime::Adiabatic
    } else {
        Regime::Impulse
    }
}

/// Scaled quench ratio equivalent to an anti-crossing sweep:
/// `x = 4 delta^2 / (hbar nu)`. The single-passage exponent then satisfies
/// `2 pi delta^2 / (hbar nu) = (pi / 2) x`.
pub fn map_lz_to_quench_ratio(delta: f64, nu: f64) -> f64 {
    4.0 * delta * delta / (HBAR * nu)
}

/// Defect density predicted for an anti-crossing sweep: the closed form
/// evaluated at `alpha` times the mapped quench ratio.
pub fn kz_prediction_for_lz(delta: f64, nu: f64, alpha: f64) -> f64 {
    defect_density(alpha * map_lz_to_quench_ratio(delta, nu))
}

/// Result of [`fit_alpha`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AlphaFit {
    /// Best-fit freeze-out matching constant.
    pub alpha: f64,
    /// Root-mean-square residual of `ln rho` at the optimum.
    pub rms_log_residual: f64,
}

/// Least-squares fit of the freeze-out constant: minimizes
/// `sum (ln rho_i - ln rho_d(alpha x_i))^2` over `alpha` in [`ALPHA_RANGE`]
/// by golden-section search (the objective is unimodal in `alpha` because
/// `ln rho_d` is monotone).
pub fn fit_alpha(points: &[(f64, f64)]) -> Result<AlphaFit, KzError> {
    if points.len() < MIN_FIT_POINTS {
        return Err(KzError::FitTooFewPoints(points.len()));
    }
    for (index, &(x, rho)) in points.iter().enumerate() {
        if !x.is_finite() || x <= 0.0 || !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
            return Err(KzError::FitInvalidPoint { index, x, rho });
        }
    }
    if points.iter().all(|&(x, _)| x == points[0].0) {
        return Err(KzError::FitDegenerateAbscissa);
    }
    let objective = |alpha: f64| {
        points
            .iter()
            .map(|&(x, rho)| {
                let r = rho.ln() - defect_density(alpha * x).ln();
                r * r
            })
            .sum::<f64>()
    };
    let alpha = golden_min(objective, ALPHA_RANGE.0, ALPHA_RANGE.1);
    let rms = (objective(alpha) / points.len() as f64).sqrt();
    Ok(AlphaFit {
        alpha,
        rms_log_residual: rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn defect_density_limits_and_spot_value() {
        assert_eq!(defect_density(0.0), 1.0);
        // x = 2: 2 / (6 + 4 sqrt(2)) = 3 - 2 sqrt(2).
        assert_relative_eq!(
            defect_density(2.0),
            3.0 - 2.0 * 2.0_f64.sqrt(),
            max_relative = 1e-14
        );
        // 1/x^2 tail.
        let x = 1e6;
        assert_relative_eq!(defect_density(x) * x * x, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn relaxation_time_hand_value_and_symmetry() {
        let q = KZQuench::new(1.0, 4.0, 1.0).unwrap();
        assert_relative_eq!(relaxation_time(&q, 2.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(
            relaxation_time(&q, -0.7).unwrap(),
            relaxation_time(&q, 0.7).unwrap()
        );
        assert_eq!(
            relaxation_time(&q, 0.0),
            Err(KzError::CriticalPointDivergence)
        );
    }

    #[test]
    fn freeze_out_kz_hand_value_and_matching_identity() {
        let q = KZQuench::new(1.0, 4.0, 1.0).unwrap();
        let t_hat = freeze_out_kz(&q);
        assert_relative_eq!(t_hat, 2.0, max_relative = 1e-15);
        // At the freeze-out time the remaining-time and relaxation curves
        // cross: alpha * t_hat = tau(t_hat).
        let q2 = KZQuench::new(0.3, 11.0, 2.5).unwrap();
        let t_hat = freeze_out_kz(&q2);
        assert_relative_eq!(
            q2.alpha() * t_hat,
            relaxation_time(&q2, t_hat).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn quench_constructor_rejects_nonpositive_values() {
        assert!(KZQuench::new(0.0, 1.0, 1.0).is_err());
        assert!(KZQuench::new(1.0, -1.0, 1.0).is_err());
        assert!(KZQuench::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn freeze_out_lz_satisfies_defining_equation() {
        let (delta, nu, alpha) = (10.3, 1461.3, 1.0);
        let t_hat = freeze_out_lz(delta, nu, alpha).unwrap();
        assert_relative_eq!(t_hat, 0.019024, max_relative = 1e-3);
        let lhs = HBAR / (nu * t_hat).hypot(2.0 * delta);
        assert_relative_eq!(lhs, alpha * t_hat, max_relative = 1e-10);
        assert!(freeze_out_lz(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn freeze_out_lz_matches_quartic_closed_form() {
        // alpha^2 nu^2 t^4 + 4 delta^2 alpha^2 t^2 - hbar^2 = 0 solved for
        // t^2 by the quadratic formula.
        let closed = |delta: f64, nu: f64, alpha: f64| {
            let a2 = alpha * alpha;
            let b = 4.0 * delta * delta * a2;
            let disc = (b * b + 4.0 * a2 * nu * nu * HBAR * HBAR).sqrt();
            ((disc - b) / (2.0 * a2 * nu * nu)).sqrt()
        };
        for (delta, nu, alpha) in [
            (10.3, 1461.3, 1.0),
            (0.5, 17.0, 3.3),
            (55.0, 9.9e4, 0.07),
            (2.0, 1.0, 12.0),
        ] {
            let t = freeze_out_lz(delta, nu, alpha).unwrap();
            assert_relative_eq!(t, closed(delta, nu, alpha), max_relative = 1e-10);
        }
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(3.0, 2.0), Regime::Adiabatic);
        assert_eq!(classify_regime(-3.0, 2.0), Regime::Adiabatic);
        assert_eq!(classify_regime(1.0, 2.0), Regime::Impulse);
        assert_eq!(classify_regime(2.0, 2.0), Regime::Adiabatic);
    }

    #[test]
    fn lz_mapping_hand_values() {
        // 4 * 10.3^2 / (hbar * 1461.3) by direct substitution.
        assert_relative_eq!(
            map_lz_to_quench_ratio(10.3, 1461.3),
            0.441193,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            kz_prediction_for_lz(10.3, 1461.3, 1.0),
            0.645525,
            max_relative = 1e-4
        );
    }

    #[test]
    fn sweep_exponent_equals_mapped_ratio_identity() {
        for nu in [3.0, 170.0, 4.4e4] {
            let delta = 10.3;
            let x = map_lz_to_quench_ratio(delta, nu);
            let exponent = 2.0 * std::f64::consts::PI * delta * delta / (HBAR * nu);
            assert_relative_eq!(
                exponent,
                0.5 * std::f64::consts::PI * x,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn fit_alpha_recovers_exact_synthetic_data() {
        for alpha0 in [0.3, 1.0, 7.5] {
            let points: Vec<(f64, f64)> = (0..12)
                .map(|k| {
                    let x = 0.05 * (2.0 / 0.05_f64).powf(k as f64 / 11.0);
                    (x, defect_density(alpha0 * x))
                })
                .collect();
            let fit = fit_alpha(&points).unwrap();
            assert_relative_eq!(fit.alpha, alpha0, max_relative = 1e-8);
            assert!(fit.rms_log_residual < 1e-8);
        }
    }

    #[test]
    fn fit_alpha_rescales_with_abscissa() {
        let alpha0 = 2.0;
        let make = |c: f64| -> Vec<(f64, f64)> {
            (0..10)
                .map(|k| {
                    let x = 0.1 + 0.2 * k as f64;
                    (c * x, defect_density(alpha0 * x))
                })
                .collect()
        };
        let base = fit_alpha(&make(1.0)).unwrap().alpha;
        let scaled = fit_alpha(&make(4.0)).unwrap().alpha;
        assert_relative_eq!(scaled, base / 4.0, max_relative = 1e-7);
    }

    #[test]
    fn fit_alpha_tolerates_multiplicative_noise() {
        let alpha0 = 1.6;
        let points: Vec<(f64, f64)> = (0..16)
            .map(|k| {
                let x = 0.05 * (1.5 / 0.05_f64).powf(k as f64 / 15.0);
                // Deterministic +-2% ripple.
                let noise = 1.0 + 0.02 * (1.7 * k as f64).sin();
                (x, (defect_density(alpha0 * x) * noise).min(1.0))
            })
            .collect();
        let fit = fit_alpha(&points).unwrap();
        assert_relative_eq!(fit.alpha, alpha0, max_relative = 0.1);
        assert!(fit.rms_log_residual > 1e-4);
    }

    #[test]
    fn fit_alpha_validates_input() {
        let good: Vec<(f64, f64)> = (0..6).map(|k| (0.2 + k as f64 * 0.1, 0.5)).collect();
        assert_eq!(fit_alpha(&good[..4]), Err(KzError::FitTooFewPoints(4)));
        let mut bad = good.clone();
        bad[2].1 = 0.0;
        assert!(matches!(
            fit_alpha(&bad),
            Err(KzError::FitInvalidPoint { index: 2, .. })
        ));
        bad[2].1 = 1.5;
        assert!(matches!(fit_alpha(&bad), Err(KzError::FitInvalidPoint { .. })));
        bad[2] = (-0.1, 0.5);
        assert!(matches!(fit_alpha(&bad), Err(KzError::FitInvalidPoint { .. })));
        let degenerate: Vec<(f64, f64)> = (0..6).map(|_| (0.5, 0.4)).collect();
        assert_eq!(fit_alpha(&degenerate), Err(KzError::FitDegenerateAbscissa));
    }

    proptest! {
        #[test]
        fn defect_density_identity(x in 0.0_f64..1e6) {
            let rho = defect_density(x);
            let denom = x * x + x * (x * x + 4.0).sqrt() + 2.0;
            prop_assert!((rho * denom - 2.0).abs() <= 1e-12);
        }

        #[test]
        fn defect_density_is_monotone_decreasing(x in 0.0_f64..1e3, dx in 1e-6_f64..10.0) {
            prop_assert!(defect_density(x + dx) < defect_density(x));
        }

        #[test]
        fn freeze_out_lz_residual_over_random_parameters(
            delta in 0.1_f64..100.0,
            nu in 1.0_f64..1e5,
            alpha in 0.05_f64..20.0,
        ) {
            let t = freeze_out_lz(delta, nu, alpha).unwrap();
            let lhs = HBAR / (nu * t).hypot(2.0 * delta);
            prop_assert!((lhs - alpha * t).abs() <= 1e-10 * (alpha * t));
        }

        #[test]
        fn kz_freeze_out_closed_form(tau0 in 1e-3_f64..1e3, tau_q in 1e-3_f64..1e3, alpha in 0.05_f64..20.0) {
            let q = KZQuench::new(tau0, tau_q, alpha).unwrap();
            let t_hat = freeze_out_kz(&q);
            prop_assert!((alpha * t_hat - relaxation_time(&q, t_hat).unwrap()).abs() <= 1e-10 * alpha * t_hat);
        }
    }
}
