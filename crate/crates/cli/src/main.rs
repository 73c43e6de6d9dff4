use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qalg::linalg::Tolerances;

mod commands;
mod report;

use report::{Report, Verdict};

/// Operator algebras, quantum states and channels from JSON files.
///
/// Every command prints one JSON report on stdout. Exit status is 0 when
/// the verdict is pass or n/a, 1 on a semantic failure and 2 when an input
/// cannot be read or has the wrong shape.
#[derive(Debug, Parser)]
#[command(name = "qalg", version)]
struct Cli {
    /// Seed for randomized steps.
    #[arg(long, global = true, env = "QALG_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    eps_pos: Option<f64>,
    #[arg(long, global = true)]
    eps_rank: Option<f64>,
    #[arg(long, global = true)]
    eps_cluster: Option<f64>,
    /// Also write the resulting object to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    State,
    Effect,
    Povm,
    Channel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a state, effect, POVM or channel.
    Check { kind: CheckKind, file: PathBuf },
    /// Convert a channel to its Choi matrix.
    Choi { file: PathBuf },
    /// Convert a channel to a minimal set of Kraus operators.
    Kraus { file: PathBuf },
    /// Stinespring dilation of a channel.
    Dilate { file: PathBuf },
    /// Partial trace (or partial transpose) of a bipartite operator.
    Ptrace {
        file: PathBuf,
        /// Factor dimensions, e.g. `2,3`.
        #[arg(long, value_parser = parse_dims)]
        dims: (usize, usize),
        /// Factor to keep (or to transpose with --transpose).
        #[arg(long, value_enum, default_value = "a")]
        keep: Side,
        #[arg(long)]
        transpose: bool,
    },
    /// Qubit state to Bloch vector, or Bloch vector to state.
    Bloch { file: PathBuf },
    /// Von Neumann entropy of a state, or of an ensemble with its mixing entropy.
    Entropy {
        file: PathBuf,
        /// Report in bits instead of nats.
        #[arg(long)]
        bits: bool,
    },
    /// Canonical hybrid form of a state restricted to an algebra.
    CanonicalState { algebra: PathBuf, state: PathBuf },
    /// Block structure of the algebra generated by a set of matrices.
    Decompose { file: PathBuf },
    /// Outcome probabilities of a POVM, optionally with sampled counts.
    Measure {
        state: PathBuf,
        povm: PathBuf,
        #[arg(long)]
        samples: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Choi { .. } => "choi",
            Command::Kraus { .. } => "kraus",
            Command::Dilate { .. } => "dilate",
            Command::Ptrace { .. } => "ptrace",
            Command::Bloch { .. } => "bloch",
            Command::Entropy { .. } => "entropy",
            Command::CanonicalState { .. } => "canonical-state",
            Command::Decompose { .. } => "decompose",
            Command::Measure { .. } => "measure",
        }
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?,
            b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?,
        )),
        _ => Err(format!("expected two comma-separated dimensions, got {s:?}")),
    }
}

/// Why a command stopped early.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input; exit 2.
    Input(String),
    /// Well-formed input that fails the operation; exit 1.
    Semantic(String),
}

impl From<qalg::Error> for Failure {
    fn from(e: qalg::Error) -> Self {
        match e {
            qalg::Error::Format(_) | qalg::Error::Dimension(_) => Failure::Input(e.to_string()),
            other => Failure::Semantic(other.to_string()),
        }
    }
}

pub struct Context {
    pub seed: u64,
    pub tol: Tolerances,
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Some(e) = cli.eps_pos {
        tol.eps_pos = e;
    }
    if let Some(e) = cli.eps_rank {
        tol.eps_rank = e;
    }
    if let Some(e) = cli.eps_cluster {
        tol.eps_cluster = e;
    }
    tol.validate()?;
    Ok(tol)
}

fn run(cli: &Cli, report: &mut Report) -> Result<(), Failure> {
    let ctx = Context {
        seed: cli.seed,
        tol: tolerances(cli)?,
    };
    match &cli.command {
        Command::Check { kind, file } => commands::check(&ctx, *kind, file, report),
        Command::Choi { file } => commands::choi(&ctx, file, report),
        Command::Kraus { file } => commands::kraus(&ctx, file, report),
        Command::Dilate { file } => commands::dilate(&ctx, file, report),
        Command::Ptrace {
            file,
            dims,
            keep,
            transpose,
        } => commands::ptrace(file, *dims, *keep, *transpose, report),
        Command::Bloch { file } => commands::bloch(&ctx, file, report),
        Command::Entropy { file, bits } => commands::entropy(&ctx, file, *bits, report),
        Command::CanonicalState { algebra, state } => commands::canonical_state(&ctx, algebra, state, report),
        Command::Decompose { file } => commands::decompose(&ctx, file, report),
        Command::Measure { state, povm, samples } => commands::measure(&ctx, state, povm, *samples, report),
    }
}

fn write_output(path: &Path, report: &Report) -> Result<(), Failure> {
    let Some(output) = &report.output else {
        return Ok(());
    };
    let text = serde_json::to_string_pretty(output).expect("values serialize");
    std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = Report::new(cli.command.name());
    let mut result = run(&cli, &mut report);
    if let (Ok(()), Some(path)) = (&result, &cli.out) {
        result = write_output(path, &report);
    }
    let code = match result {
        Ok(()) if report.verdict == Verdict::Fail => 1,
        Ok(()) => 0,
        Err(failure) => {
            report.verdict = Verdict::Fail;
            let (code, msg) = match failure {
                Failure::Input(m) => (2, m),
                Failure::Semantic(m) => (1, m),
            };
            eprintln!("qalg {}: {msg}", report.command);
            report.error = Some(msg);
            code
        }
    };
    println!("{}", serde_json::to_string(&report).expect("reports serialize"));
    ExitCode::from(code)
}
