//! Per-iteration convergence traces of the Dinkelbach loop.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::SystemConfig;
use crate::optimizer::{self, DinkelbachConfig};

use super::{channels_for, thread_pool, write_csv, ChannelSection, ExperimentError, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSpec {
    pub r_m_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

impl Default for TraceSpec {
    fn default() -> Self {
        Self { r_m_values: vec![0.5, 1.0, 2.0], seeds: vec![1], output: None }
    }
}

/// One outer iteration of one run. A failed run yields a single row with
/// `iteration = 0` and the error text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub schema_version: u32,
    pub r_m: f64,
    pub seed: u64,
    pub iteration: usize,
    pub q: Option<f64>,
    pub gap: Option<f64>,
    pub r_unicast: Option<f64>,
    pub r_multicast: Option<f64>,
    pub worst_residual: Option<f64>,
    pub error: String,
}

fn trace_one(
    base: &SystemConfig,
    channel: &ChannelSection,
    solver: &DinkelbachConfig,
    r_m: f64,
    seed: u64,
) -> Vec<TraceRow> {
    let config = SystemConfig { r_m, seed, ..base.clone() };
    let row = |iteration, error: String| TraceRow {
        schema_version: SCHEMA_VERSION,
        r_m,
        seed,
        iteration,
        q: None,
        gap: None,
        r_unicast: None,
        r_multicast: None,
        worst_residual: None,
        error,
    };
    let outcome = channels_for(&config, channel)
        .and_then(|ch| optimizer::dinkelbach_solve(&config, &ch, solver).map_err(ExperimentError::from));
    match outcome {
        Ok((_, report)) => report
            .iterations
            .iter()
            .map(|it| TraceRow {
                q: Some(it.q),
                gap: Some(it.gap),
                r_unicast: Some(it.rates.r_unicast),
                r_multicast: Some(it.rates.r_multicast),
                worst_residual: Some(it.worst_residual),
                ..row(it.index, String::new())
            })
            .collect(),
        Err(e) => vec![row(0, e.to_string())],
    }
}

pub fn convergence_trace(
    base: &SystemConfig,
    channel: &ChannelSection,
    solver: &DinkelbachConfig,
    spec: &TraceSpec,
    jobs: Option<usize>,
) -> Result<Vec<TraceRow>, ExperimentError> {
    base.validate()?;
    solver.validate()?;
    if spec.r_m_values.is_empty() || spec.seeds.is_empty() {
        return Err(ExperimentError::InvalidSpec("trace needs r_m values and seeds".into()));
    }
    let solver = DinkelbachConfig { record_timings: false, ..*solver };
    let tasks: Vec<(f64, u64)> =
        spec.r_m_values.iter().flat_map(|&r| spec.seeds.iter().map(move |&s| (r, s))).collect();
    let pool = thread_pool(jobs)?;
    let nested: Vec<Vec<TraceRow>> =
        pool.install(|| tasks.par_iter().map(|&(r, s)| trace_one(base, channel, &solver, r, s)).collect());
    Ok(nested.into_iter().flatten().collect())
}

pub fn trace_to_csv(rows: &[TraceRow]) -> Result<String, ExperimentError> {
    write_csv(rows)
}

pub fn write_trace_csv(rows: &[TraceRow], path: &Path) -> Result<(), ExperimentError> {
    std::fs::write(path, trace_to_csv(rows)?)?;
    Ok(())
}
