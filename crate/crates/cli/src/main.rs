//! `dqsim`: run a circuit or one of the experiment sweeps from a JSON config.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dqsim::algorithms::qpe::QftMode;
use dqsim::experiments::distload::{distload, DistloadConfig};
use dqsim::experiments::qae::{qae, QaeConfig};
use dqsim::experiments::qpe_sweep::{qpe_sweep, QpeSweepConfig};
use dqsim::experiments::resources::{resources, ResourcesConfig};
use dqsim::experiments::run::{compiled_json, run, RunConfig};
use dqsim::experiments::{load_config, write_csv, write_csv_file};
use dqsim::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dqsim", version, about = "Noisy simulation of distributed quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// CSV output; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Compile (when a node map is given) and simulate one circuit.
    Run {
        #[command(flatten)]
        common: Common,
        /// Replace the terminal QFT on `qft_qubits` with its dynamic form.
        #[arg(long)]
        dynamic_qft: bool,
        /// Also write the compiled circuit as JSON.
        #[arg(long)]
        emit_circuit: Option<PathBuf>,
    },
    /// Correct-outcome probability of local vs distributed phase estimation.
    QpeSweep {
        #[command(flatten)]
        common: Common,
        /// Use the dynamic QFT in the distributed variant regardless of the config.
        #[arg(long)]
        dynamic_qft: bool,
    },
    /// Maximum-likelihood amplitude estimation over node counts.
    Qae {
        #[command(flatten)]
        common: Common,
    },
    /// Hellinger fidelity of a loaded normal distribution against node count.
    Distload {
        #[command(flatten)]
        common: Common,
    },
    /// Entanglement-generation attempts per amplitude-estimation circuit.
    Resources {
        #[command(flatten)]
        common: Common,
    },
}

fn emit<T: Serialize>(rows: &[T], out: Option<&Path>) -> dqsim::Result<()> {
    match out {
        Some(path) => write_csv_file(rows, path),
        None => write_csv(rows, io::stdout().lock()),
    }
}

#[derive(Serialize)]
struct CountRow<'a> {
    outcome: &'a str,
    count: u64,
}

fn execute(cli: Cli) -> dqsim::Result<()> {
    match cli.command {
        Command::Run { common, dynamic_qft, emit_circuit } => {
            let cfg: RunConfig = load_config(&common.config)?;
            let inputs = cfg.resolve(common.config.parent())?;
            let output = run(&inputs, dynamic_qft, common.seed)?;
            if let Some(path) = emit_circuit {
                std::fs::write(&path, compiled_json(&inputs, dynamic_qft)?)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            if let Some(path) = &common.out {
                let rows: Vec<CountRow> =
                    output.histogram.counts.iter().map(|(k, &v)| CountRow { outcome: k, count: v }).collect();
                write_csv_file(&rows, path)?;
            }
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &output)?;
            writeln!(stdout)?;
        }
        Command::QpeSweep { common, dynamic_qft } => {
            let mut cfg: QpeSweepConfig = load_config(&common.config)?;
            if dynamic_qft {
                cfg.dqpe_qft = QftMode::Dynamic;
            }
            emit(&qpe_sweep(&cfg, common.seed)?, common.out.as_deref())?;
        }
        Command::Qae { common } => {
            let cfg: QaeConfig = load_config(&common.config)?;
            emit(&qae(&cfg, common.seed)?, common.out.as_deref())?;
        }
        Command::Distload { common } => {
            let cfg: DistloadConfig = load_config(&common.config)?;
            emit(&distload(&cfg, common.seed)?, common.out.as_deref())?;
        }
        Command::Resources { common } => {
            let cfg: ResourcesConfig = load_config(&common.config)?;
            emit(&resources(&cfg, common.seed)?, common.out.as_deref())?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_compile_failure() => 3,
        Error::Config(_) | Error::Parse(_) | Error::Validation(_) | Error::RewriteRefused(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dqsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
