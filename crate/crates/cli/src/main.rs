//! `dirac`: scenario runner for constrained Hamiltonian systems.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or usage
//! error, 3 numerical degeneracy.

mod commands;
mod config;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dirac_core::verify::{self, Suite, VerifyOptions};
use serde_json::json;

use crate::config::ScenarioConfig;
use crate::table::{Format, Table};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
    Verification(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Verification(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<dirac_core::Error> for CliError {
    fn from(e: dirac_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "dirac", version, about = "Dirac brackets, constrained flows and circle quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coordinate Poisson and Dirac brackets against closed forms.
    Brackets(Common),
    /// Integrate a Poisson, Dirac or gauge flow.
    Evolve(Common),
    /// Expectation values of a circle state on a time grid.
    Quantum(Common),
    /// Lattice projector identities and Coulomb-gauge evolution.
    Maxwell(Common),
    /// Run the invariant suite.
    Verify {
        /// all, brackets, constraints, klauder, dynamics, particle, maxwell or quantum.
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Adds this offset to every oracle value (negative control).
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb: f64,
    },
}

struct Resolved {
    cfg: ScenarioConfig,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
}

fn resolve(c: &Common) -> Result<Resolved, CliError> {
    let cfg = ScenarioConfig::load(&c.config)?;
    let from_file = cfg.output.clone().unwrap_or_default();
    let format = match c.format.as_deref().or(from_file.format.as_deref()) {
        Some(f) => f.parse()?,
        None => Format::Csv,
    };
    let out = c.out.clone().or(from_file.path.map(PathBuf::from));
    let seed = c.seed.or(cfg.seed).unwrap_or(commands::DEFAULT_SEED);
    Ok(Resolved { cfg, seed, format, out })
}

fn emit(table: &Table, format: Format, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write(&mut w, format)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(&mut w, format)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Brackets(c) => {
            let r = resolve(&c)?;
            let table = commands::brackets(&r.cfg, r.seed)?;
            emit(&table, r.format, &r.out)
        }
        Command::Evolve(c) => {
            let r = resolve(&c)?;
            let result = commands::evolve(&r.cfg, r.seed)?;
            if !result.table.columns.is_empty() {
                emit(&result.table, r.format, &r.out)?;
            }
            result.failure.map_or(Ok(()), Err)
        }
        Command::Quantum(c) => {
            let r = resolve(&c)?;
            let table = commands::quantum(&r.cfg)?;
            emit(&table, r.format, &r.out)
        }
        Command::Maxwell(c) => {
            let r = resolve(&c)?;
            let result = commands::maxwell(&r.cfg, r.seed)?;
            emit(&result.table, r.format, &r.out)?;
            result.failure.map_or(Ok(()), Err)
        }
        Command::Verify {
            suite,
            seed,
            format,
            out,
            perturb,
        } => {
            let suite: Suite = suite.parse().map_err(|e: dirac_core::Error| CliError::Config(e.to_string()))?;
            let format = match format.as_deref() {
                Some(f) => f.parse()?,
                None => Format::Csv,
            };
            let mut opts = VerifyOptions {
                perturbation: perturb,
                ..VerifyOptions::default()
            };
            if let Some(s) = seed {
                opts.seed = s;
            }
            let outcomes = verify::run(suite, &opts);
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let mut sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(
                    File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
                )),
                None => Box::new(io::stdout().lock()),
            };
            match format {
                Format::Csv => {
                    for o in &outcomes {
                        writeln!(sink, "{o}")?;
                    }
                    writeln!(sink, "{} passed, {failed} failed", outcomes.len() - failed)?;
                }
                Format::Json => {
                    let checks: Vec<_> = outcomes
                        .iter()
                        .map(|o| {
                            json!({
                                "suite": o.suite,
                                "name": o.name,
                                "observed": o.observed,
                                "tolerance": o.tolerance,
                                "passed": o.passed,
                            })
                        })
                        .collect();
                    let doc = json!({"seed": opts.seed, "failed": failed, "checks": checks});
                    serde_json::to_writer_pretty(&mut sink, &doc).map_err(|e| CliError::Io(e.to_string()))?;
                    writeln!(sink)?;
                }
            }
            sink.flush()?;
            if failed > 0 {
                Err(CliError::Verification(failed))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
