//! Acceptance gate for the simulator. Eight checks, one printed PASS/FAIL
//! line each:
//!
//! 1. asymptotic sweep propagation reproduces the closed-form transition
//!    probability,
//! 2. propagation keeps states physical (norm, trace, positivity),
//! 3. algebraic identities of the ensemble double-passage formula and the
//!    visibility round trip,
//! 4. fringe extrema of a coherent interference map sit where the
//!    transfer-matrix model puts them,
//! 5. the defect-density curve matches the transition-probability identity
//!    and a frozen fit fixture,
//! 6. sweep exports are byte-identical across worker counts and match a
//!    frozen golden file,
//! 7. freeze-out times agree with closed-form roots,
//! 8. the readout chain recovers planted probabilities from noisy fringe
//!    scans.
//!
//! Tolerances are pinned as constants next to each check. The test fails
//! if any line fails.

use std::f64::consts::PI;
use std::time::Instant;

use lzkz::analytic::{
    adiabaticity_parameter, double_passage_paper, invert_visibility, lz_probability, stokes_phase,
    visibility, VisibilityBranch,
};
use lzkz::kz::{freeze_out_kz, freeze_out_lz, KZQuench};
use lzkz::model::QubitParams;
use lzkz::propagator::{
    propagate_lindblad, propagate_unitary, prepare_ground, DensityMatrix, FinalState,
};
use lzkz::pulse::Waveform;
use lzkz::sweep::io::to_csv_string;
use lzkz::sweep::{
    extract_p_lz, run_kz_curve, run_lzs_map, simulate_readout, AxisSpacing, AxisSpec,
    ExperimentKind, PulseTemplate, ReadoutCal, SweepConfig, SweepConvention,
};
use lzkz::units::HBAR;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Operating tunnel coupling (ueV) used throughout the gate.
const DELTA: f64 = 10.3;

/// Half-window factor for asymptotic sweeps: the ramp spans
/// `+-ASYMPTOTIC_FACTOR * max(delta, sqrt(hbar nu))`.
const ASYMPTOTIC_FACTOR: f64 = 50.0;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Gate {
            failures: Vec::new(),
        }
    }

    fn report(&mut self, number: u32, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {number} ({name}): {verdict} [{detail}]");
        if !pass {
            self.failures.push(format!("criterion {number} ({name}): {detail}"));
        }
    }
}

fn symmetric_sweep(nu: f64) -> Waveform {
    let eps0 = ASYMPTOTIC_FACTOR * DELTA.max((HBAR * nu).sqrt());
    let t_total = 2.0 * eps0 / nu;
    Waveform::unfiltered(vec![(0.0, eps0), (t_total, -eps0)]).unwrap()
}

/// Criteria 1 and 2 share the same 20 sweep propagations.
fn criteria_1_and_2(gate: &mut Gate) {
    const N_POINTS: usize = 20;
    const TOL: f64 = 1e-8;
    const PROBABILITY_TOL: f64 = 1e-4;
    const RUNTIME_LIMIT_S: f64 = 30.0;
    const NORM_TOL: f64 = 1e-12;
    const TRACE_TOL: f64 = 1e-10;
    const EIGENVALUE_FLOOR: f64 = -1e-10;
    const LINDBLAD_GAMMA: f64 = 0.5;

    // hbar nu / delta^2 spans [0.1, 100] on a log grid: sudden to adiabatic.
    let nus: Vec<f64> = (0..N_POINTS)
        .map(|k| {
            let ratio = 0.1 * 1000.0_f64.powf(k as f64 / (N_POINTS - 1) as f64);
            ratio * DELTA * DELTA / HBAR
        })
        .collect();
    let params = QubitParams::coherent(DELTA).unwrap();

    let started = Instant::now();
    let mut max_probability_err: f64 = 0.0;
    let mut max_norm_err: f64 = 0.0;
    for &nu in &nus {
        let w = symmetric_sweep(nu);
        let psi0 = prepare_ground(w.eval(0.0), &params);
        let res = propagate_unitary(&w, &params, &psi0, TOL).unwrap();
        max_probability_err =
            max_probability_err.max((res.p_excited - lz_probability(DELTA, nu)).abs());
        let FinalState::Pure(psi) = res.final_state else {
            panic!("unitary propagation returned a mixed state");
        };
        max_norm_err = max_norm_err.max((psi.norm() - 1.0).abs());
    }
    let elapsed = started.elapsed().as_secs_f64();
    gate.report(
        1,
        "closed-form sweep probability reproduction",
        max_probability_err <= PROBABILITY_TOL && elapsed < RUNTIME_LIMIT_S,
        format!("max |p - formula| = {max_probability_err:.3e} (tol {PROBABILITY_TOL:.0e}), runtime {elapsed:.2} s (limit {RUNTIME_LIMIT_S} s)"),
    );

    // Same sweeps through the dephasing propagator for trace and positivity.
    let damped = QubitParams::new(DELTA, LINDBLAD_GAMMA).unwrap();
    let mut max_trace_err: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    for &nu in &nus {
        let w = symmetric_sweep(nu);
        let rho0 = DensityMatrix::from_pure(&prepare_ground(w.eval(0.0), &damped));
        let res = propagate_lindblad(&w, &damped, &rho0, TOL).unwrap();
        let FinalState::Mixed(dm) = res.final_state else {
            panic!("lindblad propagation returned a pure state");
        };
        max_trace_err = max_trace_err.max((dm.trace() - 1.0).abs());
        min_eigenvalue = min_eigenvalue.min(dm.min_eigenvalue());
    }
    gate.report(
        2,
        "state physicality (norm, trace, positivity)",
        max_norm_err <= NORM_TOL
            && max_trace_err <= TRACE_TOL
            && min_eigenvalue >= EIGENVALUE_FLOOR,
        format!("max |norm-1| = {max_norm_err:.2e} (tol {NORM_TOL:.0e}), max |trace-1| = {max_trace_err:.2e} (tol {TRACE_TOL:.0e}), min eigenvalue = {min_eigenvalue:.2e} (floor {EIGENVALUE_FLOOR:.0e})"),
    );
}

fn criterion_3(gate: &mut Gate) {
    const IDENTITY_TOL: f64 = 1e-12;
    const N_P: usize = 100;
    const N_PHI: usize = 4001;

    let mut worst: f64 = 0.0;
    let phis: Vec<f64> = (0..N_PHI).map(|k| 2.0 * PI * k as f64 / 1000.0).collect();
    for k in 0..N_P {
        let p = 0.5 * k as f64 / (N_P - 1) as f64;
        // Zero at the destructive-interference phase.
        worst = worst.max(double_passage_paper(p, PI).unwrap().abs());
        // Max over a phase grid that contains the constructive phase equals
        // the visibility.
        let max_over_phi = phis
            .iter()
            .map(|&phi| double_passage_paper(p, phi).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((max_over_phi - visibility(p).unwrap()).abs());
        // Visibility inversion is the identity on the matching branch.
        let branch = if p <= 0.25 {
            VisibilityBranch::NearAdiabatic
        } else {
            VisibilityBranch::NearSudden
        };
        let back = invert_visibility(visibility(p).unwrap(), branch).unwrap();
        worst = worst.max((back - p).abs());
    }
    // Zero at the probability endpoints, any phase.
    for &phi in phis.iter().step_by(97) {
        worst = worst.max(double_passage_paper(0.0, phi).unwrap().abs());
        worst = worst.max(double_passage_paper(0.5, phi).unwrap().abs());
    }
    gate.report(
        3,
        "double-passage formula identities",
        worst <= IDENTITY_TOL,
        format!("worst identity defect = {worst:.2e} (tol {IDENTITY_TOL:.0e})"),
    );
}

/// Vertex of the parabola through three points; `None` when degenerate.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d21 = x[1] - x[0];
    let d23 = x[1] - x[2];
    let denom = d21 * (y[1] - y[2]) - d23 * (y[1] - y[0]);
    if denom == 0.0 {
        return None;
    }
    Some(x[1] - 0.5 * (d21 * d21 * (y[1] - y[2]) - d23 * d23 * (y[1] - y[0])) / denom)
}

/// Distance between two angles modulo a full turn.
fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn criterion_4(gate: &mut Gate) {
    const N_EPS: usize = 64;
    const N_NU: usize = 32;
    const ADIABATICITY_RANGE: (f64, f64) = (0.05, 1.0);
    const TOL: f64 = 1e-6;
    /// Allowed extremum displacement as a fraction of the local fringe
    /// period (one period is 2 pi of accumulated phase).
    const PERIOD_FRACTION: f64 = 0.02;
    const MIN_EXTREMA: usize = 32;

    // Fixed pulse amplitude; the rate axis is parameterized by the
    // adiabaticity so the interesting crossover is covered evenly. The long
    // hold at the turnaround makes the fringe phase scan come mostly from
    // the hold-level gap, keeping the fringe density similar in every
    // column.
    let nu_of = |d: f64| DELTA * DELTA / (HBAR * d);
    let cfg = SweepConfig {
        schema_version: 1,
        kind: ExperimentKind::LzsMap,
        qubit: QubitParams::coherent(DELTA).unwrap(),
        pulse: Some(PulseTemplate {
            convention: SweepConvention::FixedAmplitude(700.0),
            hold_time: 3.0,
            filter_tau: 0.0,
            sample_dt: None,
        }),
        axes: vec![
            AxisSpec {
                name: "eps_lz0".into(),
                min: 300.0,
                max: 301.7,
                count: N_EPS,
                spacing: AxisSpacing::Linear,
            },
            AxisSpec {
                name: "nu".into(),
                min: nu_of(ADIABATICITY_RANGE.1),
                max: nu_of(ADIABATICITY_RANGE.0),
                count: N_NU,
                spacing: AxisSpacing::Log,
            },
        ],
        tol: TOL,
        seed: 0,
        workers: None,
        alpha: 1.0,
        asymptotic_factor: 50.0,
        readout: None,
    };
    let res = run_lzs_map(&cfg).unwrap();
    let flag_col = res.column_index("flag").unwrap();
    let phi_col = res.column_index("phi").unwrap();
    let p_col = res.column_index("p_excited_numeric").unwrap();
    let nu_col = res.column_index("nu_crossing_1").unwrap();
    if res.rows.iter().any(|r| r[flag_col] != 0.0) {
        gate.report(4, "interference-map fringe positions", false, "flagged rows in map".into());
        return;
    }

    let mut extrema = 0usize;
    let mut worst_fraction: f64 = 0.0;
    for j in 0..N_NU {
        let column: Vec<&Vec<f64>> = (0..N_EPS).map(|i| &res.rows[i * N_NU + j]).collect();
        let nu = column[0][nu_col];
        let phi_s = stokes_phase(adiabaticity_parameter(DELTA, nu));
        // Transfer matrix: maxima where phi/2 + phi_s hits pi/2 (mod pi),
        // minima where it hits 0 (mod pi).
        let maxima_base = PI - 2.0 * phi_s;
        let minima_base = -2.0 * phi_s;
        for i in 1..N_EPS - 1 {
            let (prev, here, next) = (column[i - 1][p_col], column[i][p_col], column[i + 1][p_col]);
            let is_max = here > prev && here > next;
            let is_min = here < prev && here < next;
            if !is_max && !is_min {
                continue;
            }
            let Some(vertex) = parabola_vertex(
                [column[i - 1][phi_col], column[i][phi_col], column[i + 1][phi_col]],
                [prev, here, next],
            ) else {
                continue;
            };
            let base = if is_max { maxima_base } else { minima_base };
            let fraction = circular_distance(vertex, base) / (2.0 * PI);
            worst_fraction = worst_fraction.max(fraction);
            extrema += 1;
        }
    }
    gate.report(
        4,
        "interference-map fringe positions",
        extrema >= MIN_EXTREMA && worst_fraction <= PERIOD_FRACTION,
        format!("{extrema} extrema, worst displacement = {:.2}% of a period (limit {:.0}%)", 100.0 * worst_fraction, 100.0 * PERIOD_FRACTION),
    );
}

/// Frozen fit fixture for criterion 5, generated once from this crate's own
/// deterministic curve run and pinned here to catch regressions.
const KZ_FIT_ALPHA: f64 = 1.74945112992623253e0;
const KZ_FIT_RESIDUAL: f64 = 5.61599386224032326e-2;

fn criterion_5(gate: &mut Gate) {
    const N_POINTS: usize = 24;
    const X_RANGE: (f64, f64) = (0.05, 1.5);
    const TOL: f64 = 1e-8;
    const IDENTITY_TOL: f64 = 1e-3;
    const FIXTURE_TOL: f64 = 1e-6;
    const SUDDEN_LIMIT_FLOOR: f64 = 0.9;

    let nu_of = |x: f64| 4.0 * DELTA * DELTA / (HBAR * x);
    let cfg = SweepConfig {
        schema_version: 1,
        kind: ExperimentKind::KzCurve,
        qubit: QubitParams::coherent(DELTA).unwrap(),
        pulse: None,
        axes: vec![AxisSpec {
            name: "nu".into(),
            min: nu_of(X_RANGE.1),
            max: nu_of(X_RANGE.0),
            count: N_POINTS,
            spacing: AxisSpacing::Log,
        }],
        tol: TOL,
        seed: 0,
        workers: None,
        alpha: 1.0,
        asymptotic_factor: 50.0,
        readout: None,
    };
    let res = run_kz_curve(&cfg).unwrap();
    let x = res.column("x").unwrap();
    let rho = res.column("rho_numeric").unwrap();
    let flags = res.column("flag").unwrap();
    let clean = flags.iter().all(|&f| f == 0.0);

    // Identity: the numeric defect density equals the single-passage
    // transition probability written in the scaled quench ratio.
    let mut max_identity_err: f64 = 0.0;
    for (x, rho) in x.iter().zip(&rho) {
        max_identity_err = max_identity_err.max((rho - (-0.5 * PI * x).exp()).abs());
    }
    // Rows are ordered by ascending rate, so descending x: the defect
    // density must rise strictly toward the sudden limit at small x.
    let monotone = rho.windows(2).all(|p| p[1] > p[0]);
    let sudden_limit = *rho.last().unwrap();

    let fit = res.metadata.fit.expect("curve fit missing");
    let fit_ok = (fit.alpha - KZ_FIT_ALPHA).abs() <= FIXTURE_TOL
        && (fit.rms_log_residual - KZ_FIT_RESIDUAL).abs() <= FIXTURE_TOL;

    gate.report(
        5,
        "defect-density scaling curve",
        clean
            && max_identity_err <= IDENTITY_TOL
            && monotone
            && sudden_limit > SUDDEN_LIMIT_FLOOR
            && fit_ok,
        format!(
            "max |rho - exp(-pi x/2)| = {max_identity_err:.2e} (tol {IDENTITY_TOL:.0e}), monotone = {monotone}, rho(x={:.2}) = {sudden_limit:.4}, fit alpha = {:.9} (frozen {KZ_FIT_ALPHA:.9}), residual = {:.9} (frozen {KZ_FIT_RESIDUAL:.9})",
            x.last().unwrap(),
            fit.alpha,
            fit.rms_log_residual
        ),
    );
}

fn determinism_config() -> SweepConfig {
    SweepConfig {
        schema_version: 1,
        kind: ExperimentKind::LzsMap,
        qubit: QubitParams::coherent(DELTA).unwrap(),
        pulse: Some(PulseTemplate {
            convention: SweepConvention::FixedAmplitude(180.0),
            hold_time: 0.12,
            filter_tau: 0.0,
            sample_dt: None,
        }),
        axes: vec![
            AxisSpec {
                name: "eps_lz0".into(),
                min: 80.0,
                max: 95.0,
                count: 4,
                spacing: AxisSpacing::Linear,
            },
            AxisSpec {
                name: "nu".into(),
                min: 400.0,
                max: 800.0,
                count: 4,
                spacing: AxisSpacing::Log,
            },
        ],
        tol: 1e-7,
        seed: 20260814,
        workers: None,
        alpha: 1.0,
        asymptotic_factor: 50.0,
        readout: Some(ReadoutCal {
            v_scale: 1.0,
            offset: -0.1,
            noise_sigma: 0.02,
        }),
    }
}

fn criterion_6(gate: &mut Gate) {
    const WORKER_COUNTS: [usize; 3] = [1, 4, 16];
    let golden = include_str!("fixtures/golden_map.csv");

    let mut csvs = Vec::new();
    for workers in WORKER_COUNTS {
        let mut cfg = determinism_config();
        cfg.workers = Some(workers);
        csvs.push(to_csv_string(&run_lzs_map(&cfg).unwrap()));
    }
    let all_equal = csvs.iter().all(|c| c == &csvs[0]);
    let matches_golden = csvs[0] == golden;
    gate.report(
        6,
        "byte-identical exports across worker counts",
        all_equal && matches_golden,
        format!(
            "workers {WORKER_COUNTS:?} identical = {all_equal}, matches frozen golden file = {matches_golden}"
        ),
    );
}

fn criterion_7(gate: &mut Gate) {
    const N_TRIALS: usize = 1000;
    const KZ_TOL: f64 = 1e-12;
    const LZ_TOL: f64 = 1e-10;

    // Independent closed form for the sweep freeze-out: squaring
    // alpha t sqrt((nu t)^2 + 4 delta^2) = hbar gives a quadratic in t^2;
    // the positive root, written to avoid cancellation, is
    // t^2 = (hbar/alpha)^2 / (2 delta^2 + sqrt(4 delta^4 + (nu hbar/alpha)^2)).
    let quartic_root = |delta: f64, nu: f64, alpha: f64| -> f64 {
        let q = HBAR / alpha;
        let t2 = q * q / (2.0 * delta * delta + (4.0 * delta.powi(4) + (nu * q) * (nu * q)).sqrt());
        t2.sqrt()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_kz: f64 = 0.0;
    let mut worst_lz: f64 = 0.0;
    for _ in 0..N_TRIALS {
        let tau0 = 10.0_f64.powf(rng.random_range(-3.0..3.0));
        let tau_q = 10.0_f64.powf(rng.random_range(-3.0..3.0));
        let alpha = 10.0_f64.powf(rng.random_range(-1.0..1.0));
        let q = KZQuench::new(tau0, tau_q, alpha).unwrap();
        let reference = tau0.sqrt() * tau_q.sqrt() / alpha.sqrt();
        worst_kz = worst_kz.max((freeze_out_kz(&q) - reference).abs() / reference);

        let delta = 10.0_f64.powf(rng.random_range(0.0..1.7));
        let nu = 10.0_f64.powf(rng.random_range(1.0..5.0));
        let reference = quartic_root(delta, nu, alpha);
        let solved = freeze_out_lz(delta, nu, alpha).unwrap();
        worst_lz = worst_lz.max((solved - reference).abs() / reference);
    }
    gate.report(
        7,
        "closed-form freeze-out roots",
        worst_kz <= KZ_TOL && worst_lz <= LZ_TOL,
        format!("worst quench-form error = {worst_kz:.2e} (tol {KZ_TOL:.0e}), worst sweep-form error = {worst_lz:.2e} (tol {LZ_TOL:.0e})"),
    );
}

fn criterion_8(gate: &mut Gate) {
    const TARGETS: [f64; 3] = [0.05, 0.1, 0.2];
    const N_TRIALS: usize = 100;
    const N_PHASES: usize = 8;
    const RECOVERY_TOL: f64 = 0.02;
    /// The deepest target sits near the visibility ceiling, where noise
    /// pushes some scans over it; those trials fail loudly (inconsistent
    /// calibration) rather than silently, and the rest must still recover
    /// the planted value.
    const MIN_VALID_FRACTION: f64 = 0.85;

    let cal = ReadoutCal {
        v_scale: 1.0,
        offset: 0.3,
        noise_sigma: 0.01,
    };
    let mut worst_recovery: f64 = 0.0;
    let mut worst_validity: f64 = 1.0;
    for (index, &p) in TARGETS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + index as u64);
        let mut valid = 0usize;
        let mut sum = 0.0;
        for _ in 0..N_TRIALS {
            // Eight phases per scan, aligned with the fringe extrema: the
            // spread estimator is unbiased in this geometry, and eight is
            // the minimum scan the extractor accepts.
            let signals: Vec<f64> = (0..N_PHASES)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / N_PHASES as f64;
                    simulate_readout(double_passage_paper(p, phi).unwrap(), &cal, &mut rng)
                })
                .collect();
            if let Ok(estimate) = extract_p_lz(&signals, &cal) {
                valid += 1;
                sum += estimate;
            }
        }
        let validity = valid as f64 / N_TRIALS as f64;
        let mean = sum / valid as f64;
        worst_recovery = worst_recovery.max((mean - p).abs());
        worst_validity = worst_validity.min(validity);
    }
    gate.report(
        8,
        "readout round trip",
        worst_recovery <= RECOVERY_TOL && worst_validity >= MIN_VALID_FRACTION,
        format!("worst mean recovery error = {worst_recovery:.4} (tol {RECOVERY_TOL}), worst validity = {worst_validity:.2} (floor {MIN_VALID_FRACTION})"),
    );
}

#[test]
fn acceptance_gate() {
    let mut gate = Gate::new();
    criteria_1_and_2(&mut gate);
    criterion_3(&mut gate);
    criterion_4(&mut gate);
    criterion_5(&mut gate);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    assert!(
        gate.failures.is_empty(),
        "failed criteria:\n{}",
        gate.failures.join("\n")
    );
}
