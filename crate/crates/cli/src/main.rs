use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pelletctl::{parse_scenario, run, sweep, write_sweep_csv, Axis, CliError, RunOptions};
use pelletctl_core::{certify, compare, simulate, simulate_numeric, ScenarioF64};

/// Exit code when the run completed but an applicable check failed.
const CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pelletctl",
    version,
    about = "Pellet-fuelled density control simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the tuning certificate for a scenario.
    Certify { scenario: PathBuf },
    /// Simulate and write trajectory.csv and summary.json.
    Simulate(RunArgs),
    /// Simulate, then exit non-zero if any applicable check fails.
    Verify(RunArgs),
    /// Evaluate the scenario across values of one parameter.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        axis: Axis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare the analytic engine against the RK4 reference.
    CompareOracle {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        oracle_steps: u32,
        #[arg(long, default_value_t = 1e-6)]
        rtol: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write plot.svg.
    #[arg(long)]
    svg: bool,
    /// Override the scenario's output sampling.
    #[arg(long)]
    samples_per_tick: Option<u32>,
}

fn load(path: &Path) -> Result<ScenarioF64, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text)
}

fn to_json<S: serde::Serialize>(v: &S) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Writes a line to stdout; a closed pipe (`| head`) is not an error.
fn say(line: impl std::fmt::Display) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn execute(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Certify { scenario } => {
            let s = load(&scenario)?;
            let cert = certify(&s.plant, &s.actuator, &s.controller)?;
            say(to_json(&cert));
            Ok(true)
        }
        Command::Simulate(args) => run_args(args).map(|_| true),
        Command::Verify(args) => run_args(args),
        Command::Sweep {
            scenario,
            axis,
            values,
            out,
        } => {
            let s = load(&scenario)?;
            let rows = sweep(&s, axis, &values)?;
            fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            let path = out.join("sweep.csv");
            let f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            write_sweep_csv(axis, &rows, BufWriter::new(f)).map_err(|e| CliError::io(&path, e))?;
            say(path.display());
            Ok(true)
        }
        Command::CompareOracle {
            scenario,
            oracle_steps,
            rtol,
        } => {
            let s = load(&scenario)?;
            // One sample per tick puts both runs on the same grid.
            let analytic = simulate(&ScenarioF64 {
                samples_per_tick: 1,
                ..s.clone()
            })?;
            let numeric = simulate_numeric(&s, oracle_steps)?;
            let cmp = compare(&analytic, &numeric, rtol)?;
            say(to_json(&cmp));
            Ok(cmp.within_tolerance)
        }
    }
}

fn run_args(args: RunArgs) -> Result<bool, CliError> {
    let mut s = load(&args.scenario)?;
    if let Some(n) = args.samples_per_tick {
        s.samples_per_tick = n;
        s.validate()?;
    }
    let outcome = run(
        &s,
        &args.out,
        RunOptions {
            svg: args.svg,
            ..RunOptions::default()
        },
    )?;
    let sum = &outcome.summary;
    say(format_args!(
        "{}: {} pellets, feasible={}, status={}",
        args.out.display(),
        sum.metrics.pellet_count,
        sum.certificate.feasible,
        if sum.passed() { "pass" } else { "fail" }
    ));
    for f in &sum.failures {
        eprintln!("check failed: {f}");
    }
    Ok(sum.passed())
}

/// 0: every applicable check passed; 1: I/O; 2: bad scenario or arguments;
/// 3: a check failed.
fn exit_code(result: &Result<bool, CliError>) -> u8 {
    match result {
        Ok(true) => 0,
        Ok(false) => CHECK_FAILED,
        Err(
            CliError::Parse(_)
            | CliError::Schema(_)
            | CliError::Validation(_)
            | CliError::EmptyAxis,
        ) => 2,
        Err(CliError::Io { .. }) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(cli.command);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result))
}
