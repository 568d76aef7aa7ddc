use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ismuc::channels;
use ismuc::experiments::{self, trace, ExperimentError, OracleSummary, RunConfig};
use ismuc::optimizer::{self, OptimizerError};
use ismuc::sdp::dump::write_sdpa;
use ismuc::Error;

#[derive(Parser)]
#[command(name = "ismuc", version, about = "IRS-aided NOMA joint beamforming solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `system.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the JSON report.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Load channels from a JSON file instead of generating them.
        #[arg(long)]
        channels: Option<PathBuf>,
        /// Save the channels used to a JSON file.
        #[arg(long)]
        channels_out: Option<PathBuf>,
        /// Write the final transmit and reflect relaxations (SDPA format) into this directory.
        #[arg(long)]
        dump_sdp: Option<PathBuf>,
    },
    /// Run the configured parameter sweep and write CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Record per-iteration convergence traces as CSV.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Brute-force a tiny instance and compare with the solver.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.system.seed = Some(seed);
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(ExperimentError::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn solve(
    common: &Common,
    channels_in: Option<&Path>,
    channels_out: Option<&Path>,
    dump: Option<&Path>,
) -> Result<(), Error> {
    let cfg = load(common)?;
    let system = cfg.system_config()?;
    let set = match channels_in {
        Some(p) => channels::read_channels(p)?,
        None => experiments::channels_for(&system, &cfg.channel)?,
    };
    if let Some(p) = channels_out {
        channels::write_channels(p, &set)?;
    }
    let (solution, report) = optimizer::dinkelbach_solve(&system, &set, &cfg.solver)?;
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).map_err(ExperimentError::from)?;
        let (transmit, reflect) = optimizer::relaxations_at(&system, &set, &solution, report.final_q())?;
        write_sdpa(&transmit, &dir.join("transmit.dat-s")).map_err(ExperimentError::from)?;
        if let Some(r) = reflect {
            write_sdpa(&r, &dir.join("reflect.dat-s")).map_err(ExperimentError::from)?;
        }
    }
    emit(common.out.as_deref(), &(report.to_json() + "\n"))
}

fn sweep(common: &Common, jobs: Option<usize>) -> Result<(), Error> {
    let cfg = load(common)?;
    let result = experiments::run_experiment(&cfg.system_config()?, &cfg.channel, &cfg.solver, &cfg.experiment, jobs)?;
    let out = common.out.clone().or(cfg.experiment.output.clone());
    emit(out.as_deref(), &result.to_csv()?)
}

fn run_trace(common: &Common, jobs: Option<usize>) -> Result<(), Error> {
    let cfg = load(common)?;
    let rows = experiments::convergence_trace(&cfg.system_config()?, &cfg.channel, &cfg.solver, &cfg.trace, jobs)?;
    let out = common.out.clone().or(cfg.trace.output.clone());
    emit(out.as_deref(), &trace::trace_to_csv(&rows)?)
}

fn oracle(common: &Common) -> Result<(), Error> {
    let cfg = load(common)?;
    let system = cfg.system_config()?;
    let set = experiments::channels_for(&system, &cfg.channel)?;
    let best = experiments::brute_force_oracle(&system, &set, &cfg.oracle)?;
    let (_, report) = optimizer::dinkelbach_solve(&system, &set, &cfg.solver)?;
    let json = serde_json::json!({
        "oracle": OracleSummary::from(&best),
        "pipeline_rate": report.rates.r_unicast,
        "ratio": report.rates.r_unicast / best.best_rate,
    });
    emit(common.out.as_deref(), &(serde_json::to_string_pretty(&json).expect("json") + "\n"))
}

/// Short machine-readable kind for the error line.
fn kind(e: &Error) -> &'static str {
    match e {
        Error::Model(_) => "model",
        Error::Channel(_) => "channel",
        Error::Sdp(_) => "sdp",
        Error::Srocr(_) => "srocr",
        Error::Optimizer(OptimizerError::InfeasibleInstance { .. }) => "infeasible_instance",
        Error::Optimizer(_) => "optimizer",
        Error::Experiment(ExperimentError::Parse(_)) => "config",
        Error::Experiment(ExperimentError::OracleInfeasible { .. }) => "oracle_infeasible",
        Error::Experiment(ExperimentError::Optimizer(OptimizerError::InfeasibleInstance { .. })) => {
            "infeasible_instance"
        }
        Error::Experiment(_) => "experiment",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common, channels, channels_out, dump_sdp } => {
            solve(common, channels.as_deref(), channels_out.as_deref(), dump_sdp.as_deref())
        }
        Command::Sweep { common, jobs } => sweep(common, *jobs),
        Command::Trace { common, jobs } => run_trace(common, *jobs),
        Command::Oracle { common } => oracle(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", kind(&e));
            ExitCode::from(2)
        }
    }
}
