use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mimo_ee::harness::{
    parse_config_as, render_csv, run_experiment, write_outputs, ExperimentKind,
};
use mimo_ee::Error;

/// Energy-efficient antenna selection and user scheduling for massive MIMO.
#[derive(Parser)]
#[command(name = "mimo-ee", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured system once per realization.
    Solve(RunArgs),
    /// Sweep the transmit SNR in dB.
    SweepSnr(RunArgs),
    /// Sweep the RF-chain budget.
    SweepRf(RunArgs),
    /// Sweep the power budget parameter ρ under a power allocation scheme.
    SweepRho(RunArgs),
    /// Compare the learned selection against random selection per count.
    CompareBaselines(RunArgs),
    /// Compare the learned selection against exhaustive search.
    ConvergenceCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value configuration file; omitted keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Realizations per grid point; overrides the file.
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads; overrides the file.
    #[arg(long)]
    parallel: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Solve(a) => (ExperimentKind::Solve, a),
        Command::SweepSnr(a) => (ExperimentKind::SweepSnr, a),
        Command::SweepRf(a) => (ExperimentKind::SweepRf, a),
        Command::SweepRho(a) => (ExperimentKind::SweepRho, a),
        Command::CompareBaselines(a) => (ExperimentKind::CompareBaselines, a),
        Command::ConvergenceCheck(a) => (ExperimentKind::ConvergenceCheck, a),
    };
    match run(kind, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mimo-ee: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::from(EXIT_SOLVER),
            }
        }
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<ExitCode, Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Config {
            key: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?,
        None => String::new(),
    };
    let (sys, mut spec, learner) = parse_config_as(&text, Some(kind))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(out) = args.out {
        spec.output = out;
    }
    if let Some(n) = args.realizations {
        spec.realizations = n;
    }
    if let Some(n) = args.parallel {
        spec.parallel = n;
    }
    spec.validate(&sys)?;

    let table = run_experiment(&sys, &spec, &learner)?;
    let files = write_outputs(&table, &sys, &spec, &learner, &spec.output)?;
    print!("{}", render_csv(&table.summary()));
    eprintln!("wrote {}", files.csv.display());
    eprintln!("wrote {}", files.plotdata.display());
    eprintln!("wrote {}", files.manifest.display());

    let failures = table.failures();
    if failures > 0 {
        eprintln!(
            "mimo-ee: {failures} of {} solver runs failed",
            table.rows.len()
        );
        return Ok(ExitCode::from(EXIT_SOLVER));
    }
    Ok(ExitCode::SUCCESS)
}
