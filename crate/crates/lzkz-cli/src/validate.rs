//! Embedded oracle checks behind `lzkz validate`: quick self-tests of the
//! library's core identities, printable in a couple of seconds. Each check
//! name appears exactly once in the output.

use lzkz::analytic::{invert_visibility, visibility, VisibilityBranch};
use lzkz::model::QubitParams;
use lzkz::propagator::{prepare_ground, propagate_unitary, FinalState};
use lzkz::pulse::{make_double_passage, Waveform};
use lzkz::units::HBAR;
use lzkz::{defect_density, lz_probability};

use crate::Failure;

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn lz_formula_match() -> Check {
    let delta = 10.3;
    let params = QubitParams::coherent(delta).expect("valid");
    let mut worst: f64 = 0.0;
    // Five sweep rates across hbar nu / Delta^2 in [1, 100], windows wide
    // enough that the full-sweep formula applies.
    for k in 0..5 {
        let ratio = 100f64.powf(k as f64 / 4.0);
        let nu = ratio * delta * delta / HBAR;
        let eps0 = 50.0 * delta.max((HBAR * nu).sqrt());
        let ramp = 2.0 * eps0 / nu;
        let w = Waveform::unfiltered(vec![(0.0, eps0), (ramp, -eps0)]).expect("valid");
        let psi0 = prepare_ground(eps0, &params);
        match propagate_unitary(&w, &params, &psi0, 1e-6) {
            Ok(res) => worst = worst.max((res.p_excited - lz_probability(delta, nu)).abs()),
            Err(e) => {
                return Check {
                    name: "lz_formula_match",
                    passed: false,
                    detail: format!("propagation failed: {e}"),
                }
            }
        }
    }
    Check {
        name: "lz_formula_match",
        passed: worst <= 1e-3,
        detail: format!("max |p - exp(-2 pi Delta^2 / hbar nu)| = {worst:.2e} (limit 1e-3)"),
    }
}

fn unitarity() -> Check {
    let params = QubitParams::coherent(10.3).expect("valid");
    let w = make_double_passage(500.0, -500.0, 0.5, 0.25).expect("valid");
    let psi0 = prepare_ground(w.eval(0.0), &params);
    match propagate_unitary(&w, &params, &psi0, 1e-6) {
        Ok(res) => {
            let norm = match res.final_state {
                FinalState::Pure(psi) => psi.norm(),
                FinalState::Mixed(_) => {
                    return Check {
                        name: "unitarity",
                        passed: false,
                        detail: "unitary run returned a mixed state".into(),
                    }
                }
            };
            let defect = (norm - 1.0).abs();
            Check {
                name: "unitarity",
                passed: defect <= 1e-12,
                detail: format!("|norm - 1| = {defect:.2e} (limit 1e-12)"),
            }
        }
        Err(e) => Check {
            name: "unitarity",
            passed: false,
            detail: format!("propagation failed: {e}"),
        },
    }
}

fn visibility_round_trip() -> Check {
    let mut worst: f64 = 0.0;
    for k in 1..50 {
        let p = k as f64 / 100.0;
        let v = visibility(p).expect("p in range");
        let branch = if p <= 0.25 {
            VisibilityBranch::NearAdiabatic
        } else {
            VisibilityBranch::NearSudden
        };
        let back = invert_visibility(v, branch).expect("v in range");
        worst = worst.max((back - p).abs());
    }
    Check {
        name: "visibility_round_trip",
        passed: worst <= 1e-12,
        detail: format!("max |invert(visibility(p)) - p| = {worst:.2e} (limit 1e-12)"),
    }
}

fn defect_density_identity() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let x = 0.01 + 20.0 * k as f64 / 199.0;
        let rho = defect_density(x);
        let residual = (rho * (x * x + x * (x * x + 4.0).sqrt() + 2.0) - 2.0).abs();
        worst = worst.max(residual);
    }
    Check {
        name: "defect_density_identity",
        passed: worst <= 1e-12,
        detail: format!("max |rho * (x^2 + x sqrt(x^2+4) + 2) - 2| = {worst:.2e} (limit 1e-12)"),
    }
}

pub fn cmd_validate() -> Result<(), Failure> {
    let checks = [
        lz_formula_match(),
        unitarity(),
        visibility_round_trip(),
        defect_density_identity(),
    ];
    let mut failures = 0;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("check {}: {status} [{}]", c.name, c.detail);
        if !c.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(Failure::runtime(format!(
            "{failures} of {} checks failed",
            checks.len()
        )))
    }
}
