//! Front end for the `critshe` binary: argument parsing, configuration,
//! result envelopes and exit codes.
//!
//! Exit codes: `0` success, `2` invalid input or usage, `3` results written
//! with accuracy warnings, `4` numerical failure.

mod commands;
mod config;
mod envelope;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use commands::{BetaconstArgs, DiagramsArgs, MomentArgs, SimulateArgs, Suite, VerifyArgs};
pub use config::{DiagramsConfig, MollifierSpec, MomentConfig, Quantity, SimulateConfig, CONFIG_SCHEMA};
pub use envelope::{canonical_json, content_hash, format_float, Envelope, Table, ENVELOPE_SCHEMA};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "critshe", version, about = "Correlation functions of the critical 2D stochastic heat equation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true, env = "CRITSHE_THREADS")]
    pub threads: Option<usize>,
    /// JSON configuration file, or an envelope from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Where to write the JSON envelope (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Where to write the CSV table, for commands that produce one.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Record wall-clock timings in the envelope (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limiting correlation function or centered third moment.
    Moment(MomentArgs),
    /// Monte Carlo moments of the mollified equation.
    Simulate(SimulateArgs),
    /// Count or list diagram indices.
    Diagrams(DiagramsArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// β_φ of a mollifier and the resulting β⋆.
    Betaconst(BetaconstArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Moment(_) => "moment",
            Command::Simulate(_) => "simulate",
            Command::Diagrams(_) => "diagrams",
            Command::Verify(_) => "verify",
            Command::Betaconst(_) => "betaconst",
        }
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Output {
    pub envelope: Option<Envelope>,
    /// Printed verbatim instead of an envelope.
    pub plain: Option<String>,
    pub table: Option<Table>,
}

/// Parse `argv`, execute, write outputs and return the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(warnings) if warnings.is_empty() => 0,
        Ok(warnings) => {
            for w in &warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            3
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<Vec<String>, CliError> {
    let threads = match cli.global.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let raw = match &cli.global.config {
        Some(path) => Some(config::load(path, cli.command.name())?),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
    let start = Instant::now();
    let mut out = pool.install(|| match &cli.command {
        Command::Moment(a) => commands::moment(a, raw),
        Command::Simulate(a) => commands::simulate(a, raw),
        Command::Diagrams(a) => commands::diagrams(a, raw),
        Command::Verify(a) => commands::verify(a, raw),
        Command::Betaconst(a) => commands::betaconst(a, raw),
    })?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut warnings = Vec::new();
    if let Some(env) = out.envelope.as_mut() {
        if cli.global.timings {
            env.timings = Some(serde_json::json!({ "wall_seconds": elapsed, "threads": threads }));
        }
        warnings.extend(env.warnings.iter().cloned());
    }
    if let (Some(table), Some(path)) = (&out.table, &cli.global.csv) {
        envelope::write_file(path, &table.to_csv()?)?;
    }
    if let Some(text) = &out.plain {
        write!(stdout, "{text}").map_err(|e| CliError::io("<stdout>", e))?;
    }
    if let Some(env) = &out.envelope {
        let text = env.render();
        match &cli.global.out {
            Some(path) => envelope::write_file(path, &text)?,
            None => write!(stdout, "{text}").map_err(|e| CliError::io("<stdout>", e))?,
        }
    }
    Ok(warnings)
}
