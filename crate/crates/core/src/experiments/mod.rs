//! Run configuration, parameter sweeps, convergence traces and the
//! brute-force oracle.

pub mod config;
pub mod oracle;
pub mod sweep;
pub mod trace;

use thiserror::Error;

use crate::channels::{generate_channels, ChannelError, ChannelModelSpec};
use crate::model::{ChannelSet, ModelError, SystemConfig};
use crate::optimizer::{self, DinkelbachConfig, OptimizerError};
use crate::sdp::dump::DumpError;

pub use config::{ChannelSection, RunConfig, SystemSection};
pub use oracle::{brute_force_oracle, OracleResult, OracleSpec, OracleSummary};
pub use sweep::{channel_file_name, run_experiment, ExperimentSpec, Scheme, SweepAxis, SweepResult, SweepRow};
pub use trace::{convergence_trace, TraceRow, TraceSpec};

/// Version of the CSV layouts written by this module.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("no feasible grid point among {evaluated} evaluated")]
    OracleInfeasible { evaluated: u64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("sdp dump: {0}")]
    Dump(#[from] DumpError),
}

/// Channels for `config` drawn with the run seed `config.seed`.
pub fn channels_for(config: &SystemConfig, channel: &ChannelSection) -> Result<ChannelSet, ExperimentError> {
    let spec = ChannelModelSpec::from_config(config, channel.irs_exponent);
    Ok(generate_channels(config, &spec, config.seed)?)
}

/// Pipeline rate next to the oracle rate on the same instance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OracleComparison {
    pub oracle_rate: f64,
    pub pipeline_rate: f64,
    /// `pipeline_rate / oracle_rate`.
    pub ratio: f64,
}

pub fn compare_with_oracle(
    config: &SystemConfig,
    channels: &ChannelSet,
    spec: &OracleSpec,
    solver: &DinkelbachConfig,
) -> Result<OracleComparison, ExperimentError> {
    let oracle = brute_force_oracle(config, channels, spec)?;
    let (_, report) = optimizer::dinkelbach_solve(config, channels, solver)?;
    let pipeline_rate = report.rates.r_unicast;
    Ok(OracleComparison { oracle_rate: oracle.best_rate, pipeline_rate, ratio: pipeline_rate / oracle.best_rate })
}

fn write_csv<T: serde::Serialize>(rows: &[T]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(ExperimentError::InvalidSpec("jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    builder.build().map_err(|e| ExperimentError::InvalidSpec(e.to_string()))
}
