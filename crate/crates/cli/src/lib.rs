//! Command-line front-end: reads an instance file, runs one verification or
//! construction and writes a JSON report.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
//! or input errors.

pub mod commands;
pub mod instance;
pub mod json;
pub mod report;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{Map, Value};

use crate::instance::{number, InputError, Instance};
use crate::report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "rkhcm", version, about = "Verify reproducing kernel Hilbert C*-module constructions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Instance file (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Eigenvalue slack for positivity checks [default: 1e-9].
    #[arg(long, global = true, value_parser = positive)]
    pub tol_psd: Option<f64>,
    /// Relative residual for membership and identity checks [default: 1e-8].
    #[arg(long, global = true, value_parser = positive)]
    pub tol_residual: Option<f64>,
    /// Relative singular-value threshold for inverting algebra elements [default: 1e-8].
    #[arg(long, global = true, value_parser = positive)]
    pub eps_invert: Option<f64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Hermitian, positivity and Schwarz checks of the kernel.
    CheckKernel,
    /// Minimal-norm interpolation on a finite set of points.
    Interpolate {
        /// Comma-separated point labels; overrides the file's interpolation block.
        #[arg(long, value_delimiter = ',', requires = "targets")]
        points: Option<Vec<String>>,
        /// JSON array of algebra elements, one per point.
        #[arg(long, requires = "points")]
        targets: Option<String>,
    },
    /// Schur-complement deflation at a point.
    Deflate {
        #[arg(long)]
        point: String,
    },
    /// Tensor product with the kernel of a second instance.
    Tensor {
        #[arg(long = "with")]
        with: PathBuf,
    },
    /// Multiplication operators of the file's symbols.
    Multiplier,
    /// Berezin transform and symbol recovery.
    Berezin,
    /// Sharp frame bounds.
    FrameBounds,
    /// Whether the frame is Parseval.
    Parseval,
    /// The kernel identity characterizing Parseval frames.
    Papadakis,
    /// Multipliers from the ψ-contraction condition.
    PsiMultiplier,
    /// Built-in oracle cross-checks.
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckKernel => "check-kernel",
            Command::Interpolate { .. } => "interpolate",
            Command::Deflate { .. } => "deflate",
            Command::Tensor { .. } => "tensor",
            Command::Multiplier => "multiplier",
            Command::Berezin => "berezin",
            Command::FrameBounds => "frame-bounds",
            Command::Parseval => "parseval",
            Command::Papadakis => "papadakis",
            Command::PsiMultiplier => "psi-multiplier",
            Command::Selftest => "selftest",
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

/// Resolved tolerances: flags override the file, which overrides defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub psd: f64,
    pub residual: f64,
    pub invert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { psd: rkhcm::tol::PSD, residual: rkhcm::tol::RESIDUAL, invert: rkhcm::tol::INVERT }
    }
}

impl Tolerances {
    fn resolve(cli: &Cli, file: Option<&instance::Tolerances>) -> Self {
        let d = Tolerances::default();
        let f = file.copied().unwrap_or_default();
        Tolerances {
            psd: cli.tol_psd.or(f.psd).unwrap_or(d.psd),
            residual: cli.tol_residual.or(f.residual).unwrap_or(d.residual),
            invert: cli.eps_invert.or(f.invert).unwrap_or(d.invert),
        }
    }

    fn to_value(self) -> Value {
        let mut m = Map::new();
        m.insert("psd".into(), number(self.psd));
        m.insert("residual".into(), number(self.residual));
        m.insert("invert".into(), number(self.invert));
        Value::Object(m)
    }
}

/// Usage or input failure, reported on stderr with exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum UsageError {
    #[error("{path}: {source}")]
    Input { path: String, source: InputError },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub fn read_instance(path: &Path) -> Result<Instance, UsageError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| UsageError::Io { path: shown.clone(), source })?;
    Instance::parse_str(&text).map_err(|source| UsageError::Input { path: shown, source })
}

fn execute(cli: &Cli) -> Result<Report, UsageError> {
    let start = Instant::now();
    let mut command = Map::new();
    command.insert("name".into(), Value::String(cli.command.name().into()));
    let outcome = if let Command::Selftest = cli.command {
        let tol = Tolerances::resolve(cli, None);
        command.insert("tolerances".into(), tol.to_value());
        selftest::run(tol)
    } else {
        let path = cli.input.as_ref().ok_or_else(|| UsageError::Usage(format!("{} requires --input", cli.command.name())))?;
        let inst = read_instance(path)?;
        let tol = Tolerances::resolve(cli, Some(&inst.tolerances));
        command.insert("input".into(), Value::String(path.display().to_string()));
        let args = commands::echo_args(&cli.command);
        if !args.is_empty() {
            command.insert("args".into(), Value::Object(args));
        }
        command.insert("tolerances".into(), tol.to_value());
        commands::dispatch(&cli.command, &inst, tol)?
    };
    Ok(Report { command, outcome, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "rkhcm: error: {e}");
            return EXIT_USAGE;
        }
    };
    let text = report.to_canonical_string();
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|source| UsageError::Io { path: path.display().to_string(), source }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| UsageError::Io { path: "<stdout>".into(), source }),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "rkhcm: error: {e}");
        return EXIT_USAGE;
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}
