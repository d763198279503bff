//! `poledec`: run pole-decoherence scenarios and the acceptance suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use poledec::runner::verify::{self, VerifyOptions, CRITERIA};
use poledec::runner::{run_basis, run_evolve, run_poles, run_timescales, Prepared, RunReport, Scenario};
use poledec::tolerances::{Tolerances, TOLERANCE_ENV};

const EXIT_INTERNAL: u8 = 1;
const EXIT_SCENARIO: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "poledec", version, about = "Pole-based relaxation, decoherence and preferred-basis runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Second-order pole and its ladder (poles.csv)
    Poles(RunArgs),
    /// Reduced-state trajectory on the time grid (trajectory.csv)
    Evolve(RunArgs),
    /// Relaxation and decoherence times (timescales.json)
    Timescales(RunArgs),
    /// Moving preferred basis with diagonality and fidelity diagnostics
    Basis(RunArgs),
    /// Run the acceptance suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML); the bundled default when omitted
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// List the criteria without running them
    #[arg(long)]
    list: bool,
    /// Run only these criteria (repeatable)
    #[arg(long = "criterion", short = 'c', value_name = "ID")]
    criteria: Vec<u8>,
    #[arg(long, short)]
    quiet: bool,
}

/// A failure tagged with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn scenario_error(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: EXIT_SCENARIO, error: error.into() }
}

fn internal_error(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: EXIT_INTERNAL, error: error.into() }
}

fn tolerance_overrides() -> Result<Option<String>, Failure> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(spec) => {
            Tolerances::default()
                .with_overrides(&spec)
                .with_context(|| format!("{TOLERANCE_ENV}={spec}"))
                .map_err(scenario_error)?;
            Ok(Some(spec))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(scenario_error(anyhow::anyhow!("{TOLERANCE_ENV}: {e}"))),
    }
}

fn prepare(args: &RunArgs) -> Result<Prepared, Failure> {
    let overrides = tolerance_overrides()?;
    let scenario = match &args.scenario {
        Some(path) => Scenario::load(path).map_err(scenario_error)?,
        None => Scenario::default_scenario(),
    };
    Prepared::new(scenario, overrides.as_deref()).map_err(scenario_error)
}

fn run(args: &RunArgs, f: fn(&Prepared, &Path) -> poledec::Result<RunReport>) -> Result<(), Failure> {
    let prepared = prepare(args)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(internal_error)?;
    let report = f(&prepared, &args.out).map_err(internal_error)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !args.quiet {
        print_summary(&report, &args.out);
    }
    Ok(())
}

fn print_summary(report: &RunReport, out: &Path) {
    let p = &report.pole;
    println!("pole z0 = {} - i {}/2 (ladder n_max = {})", p.omega_prime, p.gamma, report.ladder.n_max);
    if let Some(ts) = &report.timescales {
        println!("t_R = {}", ts.t_r);
        match ts.t_d {
            Some(t_d) => println!("t_D = {t_d}"),
            None => println!("t_D = (none)"),
        }
    }
    for a in &report.artifacts {
        println!("wrote {}", out.join(a).display());
    }
    println!("wrote {}", out.join(poledec::runner::report::REPORT_FILE).display());
}

fn run_verify(args: &VerifyArgs) -> Result<(), Failure> {
    if args.list {
        for c in CRITERIA {
            println!("{} {} (budget {} s)", c.id, c.name, c.budget.as_secs());
        }
        return Ok(());
    }
    let opts = VerifyOptions { tolerance_overrides: tolerance_overrides()? };
    let ids: Vec<u8> =
        if args.criteria.is_empty() { CRITERIA.iter().map(|c| c.id).collect() } else { args.criteria.clone() };
    if let Some(bad) = ids.iter().find(|&&id| verify::criterion(id).is_none()) {
        return Err(scenario_error(anyhow::anyhow!("no criterion {bad}; see `poledec verify --list`")));
    }
    let mut failed = Vec::new();
    for id in ids {
        let outcome = verify::run_criterion(id, &opts).map_err(internal_error)?;
        if !args.quiet || !outcome.passed {
            println!("{outcome}");
        }
        if !outcome.passed {
            failed.push(format!("[{}] {}", outcome.id, outcome.name));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY, error: anyhow::anyhow!("failed criteria: {}", failed.join(", ")) })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Poles(a) => run(a, run_poles),
        Command::Evolve(a) => run(a, run_evolve),
        Command::Timescales(a) => run(a, run_timescales),
        Command::Basis(a) => run(a, run_basis),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
