//! Command-line front end: run scenarios, verify the lemma, inspect snapshots.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use muskat_core::diagnostics::turning_report;
use muskat_core::lemma::lemma_report;
use muskat_core::scenario::{import_snapshot, load_config, run_scenario, RunConfig, RunStatus, ScenarioId};
use muskat_core::spectral::ThresholdScale;
use muskat_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(name = "muskat", version, about = "Periodic Muskat interface simulator and lemma verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run(RunArgs),
    /// Evaluate every integral, bound and sign condition of the block construction.
    VerifyLemma {
        /// Relative tolerance of the predictor quadratures.
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the turning report of an exported snapshot.
    Inspect {
        snapshot: PathBuf,
        /// Width of the CRITICAL band.
        #[arg(long, default_value_t = muskat_core::diagnostics::DEFAULT_SLOPE_TOL)]
        slope_tol: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (TOML); defaults apply to absent keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// BACKWARD_SEED, FORWARD_RERUN, CONJ_TURNOVER, LEMMA_VERIFY or DELTA_TILT.
    #[arg(long)]
    scenario: Option<ScenarioId>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid size.
    #[arg(long)]
    n: Option<usize>,
    /// Time step.
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    /// Smoothing threshold for backward runs.
    #[arg(long)]
    eps: Option<f64>,
    /// Density jump rho_minus - rho_plus.
    #[arg(long, allow_negative_numbers = true)]
    density_jump: Option<f64>,
    /// End time (scenario default when absent).
    #[arg(long, allow_negative_numbers = true)]
    t_final: Option<f64>,
    /// Compare the threshold with raw FFT sums or normalized coefficients.
    #[arg(long, value_parser = parse_threshold)]
    threshold: Option<ThresholdScale>,
    /// Starting snapshot for FORWARD_RERUN.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> Result<ThresholdScale, String> {
    match s.to_ascii_lowercase().as_str() {
        "raw" => Ok(ThresholdScale::Raw),
        "normalized" => Ok(ThresholdScale::Normalized),
        _ => Err(format!("`{s}` is neither `raw` nor `normalized`")),
    }
}

fn build_config(args: RunArgs) -> Result<RunConfig, Error> {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = args.scenario {
        config.scenario = v;
    }
    if let Some(v) = args.out {
        config.out_dir = v;
    }
    if let Some(v) = args.n {
        config.n = v;
    }
    if let Some(v) = args.dt {
        config.dt = v;
    }
    if let Some(v) = args.eps {
        config.eps = v;
    }
    if let Some(v) = args.density_jump {
        config.density_jump = v;
    }
    if let Some(v) = args.t_final {
        config.t_final = Some(v);
    }
    if let Some(v) = args.threshold {
        config.threshold = v;
    }
    if let Some(v) = args.input {
        config.input = Some(v);
    }
    config.validate()?;
    Ok(config)
}

fn run(args: RunArgs) -> ExitCode {
    let config = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let manifest = match run_scenario(&config) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    println!("scenario = {}", manifest.scenario);
    println!("status = {:?}", manifest.status);
    println!("out_dir = {}", config.out_dir.display());
    println!("wall_time_s = {:.3}", manifest.wall_time_s);
    for p in &manifest.phases {
        let pattern: Vec<&str> = p.regime_pattern.iter().map(|r| r.as_str()).collect();
        println!(
            "[{}] t = {:e} -> {:e}, min slope {:.6e} at alpha = {:.6e} ({}), pattern {}",
            p.phase,
            p.t_start,
            p.t_end,
            p.min_slope,
            p.argmin,
            p.regime.as_str(),
            pattern.join(" -> ")
        );
        for m in &p.near_critical_minima {
            println!(
                "    near-critical minimum: slope {:.3e} at z = ({:+.6e}, {:+.6e})",
                m.value, m.z1, m.z2
            );
        }
    }
    for e in &manifest.events {
        println!("event [{}] {:?} at t = {:.10e}", e.phase, e.kind, e.time);
    }
    if !manifest.message.is_empty() {
        eprintln!("{}", manifest.message);
    }
    match manifest.status {
        RunStatus::Ok => ExitCode::SUCCESS,
        RunStatus::NumericalFailure => ExitCode::from(EXIT_NUMERICAL),
        RunStatus::Error => ExitCode::from(EXIT_USAGE),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run(args) => run(args),
        Command::VerifyLemma { quad_tol, out } => match lemma_report(quad_tol) {
            Ok(report) => {
                let text = report.to_text();
                print!("{text}");
                if let Some(path) = out {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(EXIT_USAGE);
                    }
                }
                if report.all_pass() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_NUMERICAL)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
            }
        },
        Command::Inspect { snapshot, slope_tol } => match import_snapshot(&snapshot) {
            Ok(s) => {
                println!("t = {:.16e}", s.time);
                println!("n = {}", s.curve.grid().n());
                print!("{}", turning_report(&s.curve, slope_tol));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            }
        },
    }
}
