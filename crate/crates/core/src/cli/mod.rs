//! Command-line front end: argument parsing, config ingestion, report
//! emission and exit codes.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::error::Error;
use commands::Outcome;
use config::SCHEMA_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const THREADS_ENV: &str = "DISC_ODE_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config or expressions.
    Input(String),
    /// The computation itself failed.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OutsideDisc { .. }
            | Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::NonIntegerExponent { .. }
            | Error::InvalidArgument(_)
            | Error::EmptyGrid(_) => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "disc-ode", version, about = "Solve, factorize and verify f'' + A f = 0 in the unit disc")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the initial value problem and certify the residual.
    Solve(CommonArgs),
    /// Locate zeros and factorize the solution as B e^g.
    Factorize(CommonArgs),
    /// Run norm, Carleson, Hardy and separation checks on explicit functions.
    Verify(CommonArgs),
    /// Solve the Riccati equation and run the transform checks.
    Riccati(CommonArgs),
    /// Run the admissibility probe for a function space.
    Admissibility(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Report path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of sampled z, f, f' (solve and factorize).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Override the solver or grid radius.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Override the solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Record wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Factorize(_) => "factorize",
            Command::Verify(_) => "verify",
            Command::Riccati(_) => "riccati",
            Command::Admissibility(_) => "admissibility",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a)
            | Command::Factorize(a)
            | Command::Verify(a)
            | Command::Riccati(a)
            | Command::Admissibility(a) => a,
        }
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let raw: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: invalid JSON: {e}", path.display())))?;
    match raw.get("schema_version").and_then(Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(CliError::Input(format!(
                "{}: schema_version {v} is not supported (expected {SCHEMA_VERSION})",
                path.display()
            )))
        }
        None => return Err(CliError::Input(format!("{}: missing integer schema_version", path.display()))),
    }
    serde_json::from_value(raw).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn not_applicable(flag: &str, command: &str) -> CliError {
    CliError::Input(format!("{flag} does not apply to {command}"))
}

/// Loads the config, applies flag overrides and runs the command; returns
/// the effective config and the outcome.
fn execute(command: &Command) -> Result<(Value, Outcome), CliError> {
    let args = command.args();
    let name = command.name();
    let want_csv = args.csv.is_some();
    if want_csv && !matches!(command, Command::Solve(_) | Command::Factorize(_)) {
        return Err(not_applicable("--csv", name));
    }
    fn echo<T: serde::Serialize>(c: &T) -> Value {
        serde_json::to_value(c).expect("configs serialize")
    }
    match command {
        Command::Solve(_) => {
            let mut c: config::SolveConfig = load(&args.config)?;
            c.solver.r_max = args.r_max.unwrap_or(c.solver.r_max);
            c.solver.tol = args.tol.unwrap_or(c.solver.tol);
            Ok((echo(&c), commands::solve(&c, want_csv)?))
        }
        Command::Factorize(_) => {
            let mut c: config::FactorizeConfig = load(&args.config)?;
            c.solver.r_max = args.r_max.unwrap_or(c.solver.r_max);
            c.solver.tol = args.tol.unwrap_or(c.solver.tol);
            Ok((echo(&c), commands::factorize(&c, want_csv)?))
        }
        Command::Verify(_) => {
            let mut c: config::VerifyConfig = load(&args.config)?;
            if args.tol.is_some() {
                return Err(not_applicable("--tol", name));
            }
            if let Some(r) = args.r_max {
                c.grid.r_max = r;
            }
            Ok((echo(&c), commands::verify(&c)?))
        }
        Command::Riccati(_) => {
            let mut c: config::RiccatiConfig = load(&args.config)?;
            c.r_max = args.r_max.unwrap_or(c.r_max);
            c.tol = args.tol.unwrap_or(c.tol);
            Ok((echo(&c), commands::riccati(&c)?))
        }
        Command::Admissibility(_) => {
            let c: config::AdmissibilityConfig = load(&args.config)?;
            if args.r_max.is_some() {
                return Err(not_applicable("--r-max", name));
            }
            if args.tol.is_some() {
                return Err(not_applicable("--tol", name));
            }
            Ok((echo(&c), commands::admissibility(&c)?))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_outputs(
    command: &Command,
    (effective, outcome): (Value, Outcome),
    start: Instant,
    stdout: &mut dyn Write,
) -> Result<bool, CliError> {
    let args = command.args();
    let pass = outcome.assertions.iter().all(|a| a.pass);
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "config": effective,
        "results": outcome.results,
        "assertions": serde_json::to_value(&outcome.assertions).expect("assertions serialize"),
        "pass": pass,
    });
    if args.timing {
        report["wall_time_seconds"] = json!(start.elapsed().as_secs_f64());
    }
    let text = report::to_json(&report).map_err(|e| CliError::Numerical(format!("report encoding: {e}")))?;
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write report: {e}")))?,
    }
    if let (Some(path), Some(csv)) = (&args.csv, &outcome.csv) {
        write_file(path, csv)?;
    }
    Ok(pass)
}

/// Runs the tool on the given arguments (program name first) and returns
/// the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let start = Instant::now();
    let computed = match cli.command.args().threads {
        Some(0) => Err(CliError::Input("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli.command)),
            Err(e) => Err(CliError::Input(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&cli.command),
    };
    let result = computed.and_then(|c| write_outputs(&cli.command, c, start, stdout));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "assertion failure: see the report's assertions");
            EXIT_ASSERTION
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
