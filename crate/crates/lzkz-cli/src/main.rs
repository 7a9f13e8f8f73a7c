//! Command-line front end for the lzkz library.
//!
//! Thin shell: every number printed or written here comes from a library
//! call with the same parameters. Exit codes are a stable contract:
//! 0 success, 1 runtime/validation failure, 2 usage/config error.

mod render;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lzkz::model::QubitParams;
use lzkz::pulse::{make_double_passage, Waveform};
use lzkz::sweep::io::{read_csv, write_csv};
use lzkz::sweep::{run, single_shot, ExperimentKind, SweepConfig, SweepError};

const WORKERS_ENV: &str = "LZKZ_WORKERS";

#[derive(Parser)]
#[command(
    name = "lzkz",
    about = "Landau-Zener / Kibble-Zurek simulator for a driven charge qubit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one pulse and print the closed-form comparison as JSON.
    Single(SingleArgs),
    /// Run an interference map config and write CSV (optionally SVG).
    Map(RunArgs),
    /// Run a defect-density curve config and write CSV (optionally SVG).
    KzCurve(RunArgs),
    /// Fit the freeze-out scale factor to a (x, rho) table from a CSV file.
    FitAlpha(FitAlphaArgs),
    /// Run the embedded oracle checks and report pass/fail.
    Validate,
}

#[derive(Args)]
struct SingleArgs {
    /// Tunnel coupling Delta in ueV.
    #[arg(long)]
    delta: f64,
    /// Pure dephasing rate in 1/ns (0 = coherent).
    #[arg(long, default_value_t = 0.0)]
    gamma_phi: f64,
    /// Integration tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Waveform JSON file ({"breakpoints": [[t, eps], ...], ...});
    /// alternative to the trapezoid flags below.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["eps_start", "eps_end", "ramp_time", "hold_time"])]
    waveform: Option<PathBuf>,
    /// Trapezoid start/readout detuning in ueV (positive).
    #[arg(long, requires_all = ["eps_end", "ramp_time"], allow_negative_numbers = true)]
    eps_start: Option<f64>,
    /// Trapezoid turnaround detuning in ueV (negative).
    #[arg(long, allow_negative_numbers = true)]
    eps_end: Option<f64>,
    /// Trapezoid ramp time in ns (each way).
    #[arg(long)]
    ramp_time: Option<f64>,
    /// Hold time at the turnaround in ns.
    #[arg(long, default_value_t = 0.0)]
    hold_time: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Sweep config JSON file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override a config field before parsing, e.g. --set tol=1e-6 or
    /// --set axes.1.count=16. Repeatable; later overrides win.
    #[arg(long = "set", value_name = "PATH=JSON")]
    set: Vec<String>,
    /// Directory for output files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Also write an SVG rendering next to the CSV.
    #[arg(long)]
    render: bool,
}

#[derive(Args)]
struct FitAlphaArgs {
    /// CSV file with the curve data (e.g. kz-curve output).
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Column with the dimensionless quench ratio.
    #[arg(long, default_value = "x")]
    x_column: String,
    /// Column with the measured defect density.
    #[arg(long, default_value = "rho_numeric")]
    rho_column: String,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

/// Config-shaped problems are usage errors (2); everything downstream of a
/// valid config is a runtime failure (1).
impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(_) | SweepError::Json(_) => Failure::usage(e.to_string()),
            other => Failure::runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap's exit carries its own code: 2 for usage errors, 0 for
        // --help/--version.
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Single(args) => cmd_single(args),
        Command::Map(args) => cmd_run(args, ExperimentKind::LzsMap),
        Command::KzCurve(args) => cmd_run(args, ExperimentKind::KzCurve),
        Command::FitAlpha(args) => cmd_fit_alpha(args),
        Command::Validate => validate::cmd_validate(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_waveform(args: &SingleArgs) -> Result<Waveform, Failure> {
    if let Some(path) = &args.waveform {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())));
    }
    match (args.eps_start, args.eps_end, args.ramp_time) {
        (Some(e0), Some(e1), Some(ramp)) => {
            make_double_passage(e0, e1, ramp, args.hold_time)
                .map_err(|e| Failure::usage(e.to_string()))
        }
        _ => Err(Failure::usage(
            "provide either --waveform or --eps-start/--eps-end/--ramp-time",
        )),
    }
}

fn cmd_single(args: SingleArgs) -> Result<(), Failure> {
    let params = QubitParams::new(args.delta, args.gamma_phi)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let w = load_waveform(&args)?;
    let summary = single_shot(&params, &w, args.tol)?;
    let nu_per_crossing: Vec<f64> = summary.crossings.iter().map(|c| c.rate).collect();
    let out = json!({
        "p_excited": summary.p_excited,
        "p_paper_formula": summary.p_paper_formula,
        "p_transfer_matrix": summary.p_transfer_matrix,
        "phi": summary.phi,
        "nu_per_crossing": nu_per_crossing,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("plain data"));
    Ok(())
}

/// Applies one `path=json` override to the config document. Path segments
/// are dot-separated; numeric segments index arrays. Values parse as JSON,
/// with a bare-string fallback so `--set axes.0.name=nu` works unquoted.
fn apply_override(doc: &mut Value, spec: &str) -> Result<(), Failure> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("--set needs path=value, got '{spec}'")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let mut cursor = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(idx) = seg.parse::<usize>() {
            let arr = cursor.as_array_mut().ok_or_else(|| {
                Failure::usage(format!("--set {path}: segment '{seg}' indexes a non-array"))
            })?;
            if idx >= arr.len() {
                return Err(Failure::usage(format!(
                    "--set {path}: index {idx} out of bounds (len {})",
                    arr.len()
                )));
            }
            if last {
                arr[idx] = value;
                return Ok(());
            }
            cursor = &mut arr[idx];
        } else {
            let obj = cursor.as_object_mut().ok_or_else(|| {
                Failure::usage(format!("--set {path}: segment '{seg}' keys a non-object"))
            })?;
            if last {
                obj.insert(seg.to_string(), value);
                return Ok(());
            }
            cursor = obj
                .entry(seg.to_string())
                .or_insert(Value::Object(Default::default()));
        }
    }
    Ok(())
}

fn load_config(args: &RunArgs) -> Result<SweepConfig, Failure> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.config.display())))?;
    for spec in &args.set {
        apply_override(&mut doc, spec)?;
    }
    let mut cfg = SweepConfig::from_json_str(&doc.to_string()).map_err(Failure::from)?;
    if cfg.workers.is_none() {
        if let Ok(raw) = std::env::var(WORKERS_ENV) {
            let n: usize = raw.parse().map_err(|_| {
                Failure::usage(format!("{WORKERS_ENV}='{raw}' is not a worker count"))
            })?;
            cfg.workers = Some(n);
            cfg.validate().map_err(Failure::from)?;
        }
    }
    Ok(cfg)
}

fn cmd_run(args: RunArgs, kind: ExperimentKind) -> Result<(), Failure> {
    let cfg = load_config(&args)?;
    if cfg.kind != kind {
        return Err(Failure::usage(format!(
            "config kind {:?} does not match this subcommand",
            cfg.kind
        )));
    }
    let result = run(&cfg)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::runtime(format!("{}: {e}", args.out_dir.display())))?;
    let stem = match kind {
        ExperimentKind::LzsMap => "map",
        ExperimentKind::KzCurve => "kz_curve",
        ExperimentKind::SingleShot => "single_shot",
    };
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    write_csv(&result, &csv_path)?;
    println!("wrote {}", csv_path.display());
    if args.render {
        let svg = match kind {
            ExperimentKind::KzCurve => render::kz_curve_svg(&result),
            _ => render::heatmap_svg(&result),
        }
        .map_err(Failure::runtime)?;
        let svg_path = args.out_dir.join(format!("{stem}.svg"));
        std::fs::write(&svg_path, svg)
            .map_err(|e| Failure::runtime(format!("{}: {e}", svg_path.display())))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn cmd_fit_alpha(args: FitAlphaArgs) -> Result<(), Failure> {
    let table = read_csv(Path::new(&args.input)).map_err(Failure::from)?;
    let xs = table
        .column(&args.x_column)
        .ok_or_else(|| Failure::usage(format!("column '{}' not in {}", args.x_column, args.input.display())))?;
    let rhos = table
        .column(&args.rho_column)
        .ok_or_else(|| Failure::usage(format!("column '{}' not in {}", args.rho_column, args.input.display())))?;
    // Flagged rows carry NaN; the fit runs on the clean points.
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(&rhos)
        .filter(|(x, r)| x.is_finite() && r.is_finite())
        .map(|(&x, &r)| (x, r))
        .collect();
    let fit = lzkz::fit_alpha(&points).map_err(|e| Failure::runtime(e.to_string()))?;
    let out = json!({
        "alpha_hat": fit.alpha,
        "rms_log_residual": fit.rms_log_residual,
        "points_used": points.len(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("plain data"));
    Ok(())
}
