use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use warpcheck::geometry::{FdConfig, FdOrder};
use warpcheck::scenario::{evaluate, list_scenarios, parse_override, write_atomic, RunConfig, ScenarioError};
use warpcheck::verify::{CURVATURE_TOL, DEFAULT_SAMPLES};

/// Builds warped-product geometries and verifies them numerically.
#[derive(Debug, Parser)]
#[command(name = "warpcheck", version)]
struct Cli {
    /// Scenario id (see --list).
    #[arg(long, required_unless_present = "list")]
    scenario: Option<String>,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_set)]
    set: Vec<(String, f64)>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Relative finite-difference step.
    #[arg(long, default_value_t = FdConfig::DEFAULT_STEP)]
    fd_step: f64,
    /// Tolerance of curvature-level checks.
    #[arg(long, default_value_t = CURVATURE_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write per-sample rows here.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// List scenarios and exit.
    #[arg(long)]
    list: bool,
    /// Allow dimensions below the theorem hypotheses.
    #[arg(long)]
    relax: bool,
}

fn parse_set(s: &str) -> Result<(String, f64), String> {
    parse_override(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<bool, ScenarioError> {
    let fd = FdConfig::new(cli.fd_step, FdOrder::Fourth).map_err(|e| ScenarioError::InvalidParameter {
        name: "fd-step".into(),
        value: cli.fd_step.to_string(),
        accepted: e.to_string(),
    })?;
    let run = RunConfig {
        samples: cli.samples,
        fd,
        seed: cli.seed,
        curvature_tol: cli.tol,
        relax: cli.relax,
    };
    let id = cli.scenario.unwrap_or_default();
    let out = evaluate(&id, &cli.set, &run)?;
    let json = out.report.to_json()?;
    match &cli.report {
        Some(path) => write_atomic(path, &json)?,
        None => println!("{json}"),
    }
    if let Some(path) = &cli.dump {
        write_atomic(path, &out.dump.to_csv())?;
    }
    for c in &out.report.checks {
        eprintln!(
            "{:<4} {:<20} max {:.3e}  tol {:.0e}",
            if c.passed { "ok" } else { "FAIL" },
            c.check_id,
            c.max_residual,
            c.tolerance
        );
    }
    Ok(out.report.overall_passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.list {
        print!("{}", list_scenarios());
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
