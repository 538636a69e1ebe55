//! `noisenet`: Monte-Carlo simulation, analytic curves, comparisons and
//! parameter sweeps for networks of noisy linear neurons.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] noisenet::Error),
    #[error("tolerance exceeded")]
    Tolerance,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use noisenet::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(E::Config(_) | E::NotApplicable(_)) => 1,
            CliError::Core(_) => 2,
            CliError::Tolerance => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "noisenet", version, about = "Noise propagation in networks of noisy linear neurons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (rayon default when omitted)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative tolerance for `compare` (0.05 feed-forward, 0.07 recurrent by default)
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Do not subtract the offset before forming the SNR
    #[arg(long, global = true)]
    raw_snr: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte-Carlo SNR curve: `t,mean_raw,mean_shifted,std,snr`
    Simulate,
    /// Analytic curve: `t,mean,variance,snr`
    Analytic,
    /// Monte-Carlo vs analytic deviation report
    Compare,
    /// Parameter sweep: `series,<axis>,summary,ratio`
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    FnnConnectivity,
    RnnConnectivity,
    Depth,
    Beta,
    Multiplex,
    ReadoutAveraging,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = config::load(path)?;

    let (text, outcome) = match cli.command {
        Command::Simulate => (commands::simulate(&cfg, cli.raw_snr)?, Ok(())),
        Command::Analytic => (commands::analytic(&cfg, cli.raw_snr)?, Ok(())),
        Command::Compare => {
            let tol = cli.tolerance.unwrap_or(if cfg.is_rnn() { 0.07 } else { 0.05 });
            let (report, ok) = commands::compare(&cfg, tol)?;
            (report, if ok { Ok(()) } else { Err(CliError::Tolerance) })
        }
        Command::Sweep { kind } => (commands::sweep(&cfg, kind)?, Ok(())),
    };

    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("writing {}: {e}", p.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("writing stdout: {e}")))?,
    }
    outcome
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("noisenet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
