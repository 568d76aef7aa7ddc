//! Parameter sweeps over one system parameter, averaged over seeded trials.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::write_channels;
use crate::model::{dbm_to_watts, SystemConfig};
use crate::optimizer::{self, DinkelbachConfig, SolveReport};

use super::{channels_for, thread_pool, write_csv, ChannelSection, ExperimentError, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PMaxDbm,
    RM,
    Zeta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PMaxDbm => "p_max_dbm",
            SweepAxis::RM => "r_m",
            SweepAxis::Zeta => "zeta",
        }
    }

    pub fn apply(self, config: &SystemConfig, value: f64) -> SystemConfig {
        let mut c = config.clone();
        match self {
            SweepAxis::PMaxDbm => c.p_max = dbm_to_watts(value),
            SweepAxis::RM => c.r_m = value,
            SweepAxis::Zeta => c.zeta = value,
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    IrsNoma,
    NoIrsNoma,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::IrsNoma => "irs_noma",
            Scheme::NoIrsNoma => "no_irs_noma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Trial `t` runs with seed `system.seed + t`.
    pub trials: usize,
    pub output: Option<PathBuf>,
    /// Adds wall-clock seconds per run; makes the CSV non-reproducible.
    pub record_runtime: bool,
    /// Saves each run's channels as `<scheme>_<axis>_<value>_t<trial>.json`.
    pub channels_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            axis: SweepAxis::PMaxDbm,
            values: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            schemes: vec![Scheme::IrsNoma, Scheme::NoIrsNoma],
            trials: 10,
            output: None,
            record_runtime: false,
            channels_dir: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidSpec(m.to_string()));
        if self.values.is_empty() || self.schemes.is_empty() || self.trials == 0 {
            return bad("values, schemes and trials must be non-empty");
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite");
        }
        Ok(())
    }
}

/// One CSV line: a single run (`row_kind = "trial"`) or the average over
/// the successful trials of a point (`row_kind = "mean"`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub schema_version: u32,
    pub row_kind: &'static str,
    pub scheme: &'static str,
    pub axis: &'static str,
    pub axis_value: f64,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    pub successes: Option<usize>,
    pub r_unicast: Option<f64>,
    pub r_multicast: Option<f64>,
    pub illumination_w: Option<f64>,
    pub feasible: Option<bool>,
    pub outer_iterations: Option<usize>,
    pub rank_w_u: Option<f64>,
    pub rank_w_m: Option<f64>,
    pub rank_v: Option<f64>,
    pub rank_flagged: Option<bool>,
    pub termination: Option<&'static str>,
    pub error: String,
    pub runtime_s: Option<f64>,
}

impl SweepRow {
    fn blank(kind: &'static str, scheme: Scheme, axis: SweepAxis, value: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            row_kind: kind,
            scheme: scheme.name(),
            axis: axis.name(),
            axis_value: value,
            trial: None,
            seed: None,
            successes: None,
            r_unicast: None,
            r_multicast: None,
            illumination_w: None,
            feasible: None,
            outer_iterations: None,
            rank_w_u: None,
            rank_w_m: None,
            rank_v: None,
            rank_flagged: None,
            termination: None,
            error: String::new(),
            runtime_s: None,
        }
    }

    fn fill(&mut self, report: &SolveReport) {
        self.r_unicast = Some(report.rates.r_unicast);
        self.r_multicast = Some(report.rates.r_multicast);
        self.illumination_w = Some(report.rates.illumination);
        self.feasible = Some(report.feasibility.feasible);
        self.outer_iterations = Some(report.outer_iterations);
        self.rank_w_u = Some(report.rank_ratios.w_u);
        self.rank_w_m = Some(report.rank_ratios.w_m);
        self.rank_v = report.rank_ratios.v;
        self.rank_flagged = Some(report.rank_flagged);
        self.termination = Some(match report.termination {
            optimizer::Termination::Converged => "converged",
            optimizer::Termination::MaxOuter => "max_outer",
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn trials(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.row_kind == "trial")
    }

    pub fn mean(&self, scheme: Scheme, value: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.row_kind == "mean" && r.scheme == scheme.name() && r.axis_value == value)
    }

    /// Mean unicast rate at a point, if any trial succeeded.
    pub fn mean_rate(&self, scheme: Scheme, value: f64) -> Option<f64> {
        self.mean(scheme, value).and_then(|r| r.r_unicast)
    }

    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        write_csv(&self.rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ExperimentError> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn run_one(
    base: &SystemConfig,
    channel: &ChannelSection,
    solver: &DinkelbachConfig,
    spec: &ExperimentSpec,
    (scheme, value, trial): (Scheme, f64, usize),
) -> SweepRow {
    let started = Instant::now();
    let mut row = SweepRow::blank("trial", scheme, spec.axis, value);
    let seed = base.seed.wrapping_add(trial as u64);
    row.trial = Some(trial);
    row.seed = Some(seed);
    let mut config = spec.axis.apply(base, value);
    config.seed = seed;
    if scheme == Scheme::NoIrsNoma {
        config = config.without_irs();
    }
    let outcome = channels_for(&config, channel).and_then(|ch| {
        if let Some(dir) = &spec.channels_dir {
            write_channels(dir.join(channel_file_name(scheme, spec.axis, value, trial)), &ch)?;
        }
        Ok(optimizer::dinkelbach_solve(&config, &ch, solver)?)
    });
    match outcome {
        Ok((_, report)) => row.fill(&report),
        Err(e) => row.error = e.to_string(),
    }
    if spec.record_runtime {
        row.runtime_s = Some(started.elapsed().as_secs_f64());
    }
    row
}

pub fn channel_file_name(scheme: Scheme, axis: SweepAxis, value: f64, trial: usize) -> String {
    format!("{}_{}_{value}_t{trial}.json", scheme.name(), axis.name())
}

/// Runs every `(scheme, value, trial)` combination, in parallel on `jobs`
/// threads, and appends one mean row per `(scheme, value)`. Failed runs are
/// recorded in their row and left out of the means. The output does not
/// depend on `jobs`.
pub fn run_experiment(
    base: &SystemConfig,
    channel: &ChannelSection,
    solver: &DinkelbachConfig,
    spec: &ExperimentSpec,
    jobs: Option<usize>,
) -> Result<SweepResult, ExperimentError> {
    base.validate()?;
    solver.validate()?;
    spec.validate()?;
    for &v in &spec.values {
        spec.axis.apply(base, v).validate()?;
    }
    let solver = DinkelbachConfig { record_timings: spec.record_runtime && solver.record_timings, ..*solver };
    let tasks: Vec<(Scheme, f64, usize)> = spec
        .schemes
        .iter()
        .flat_map(|&s| spec.values.iter().flat_map(move |&v| (0..spec.trials).map(move |t| (s, v, t))))
        .collect();
    if let Some(dir) = &spec.channels_dir {
        std::fs::create_dir_all(dir)?;
    }
    let pool = thread_pool(jobs)?;
    let mut rows: Vec<SweepRow> =
        pool.install(|| tasks.par_iter().map(|&task| run_one(base, channel, &solver, spec, task)).collect());

    let mut means = Vec::new();
    for &scheme in &spec.schemes {
        for &value in &spec.values {
            let ok: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.scheme == scheme.name() && r.axis_value == value && r.error.is_empty())
                .collect();
            let failed = spec.trials - ok.len();
            let mut m = SweepRow::blank("mean", scheme, spec.axis, value);
            m.successes = Some(ok.len());
            m.r_unicast = mean_of(ok.iter().filter_map(|r| r.r_unicast));
            m.r_multicast = mean_of(ok.iter().filter_map(|r| r.r_multicast));
            m.illumination_w = mean_of(ok.iter().filter_map(|r| r.illumination_w));
            m.feasible = (!ok.is_empty()).then(|| ok.iter().all(|r| r.feasible == Some(true)));
            m.rank_flagged = (!ok.is_empty()).then(|| ok.iter().any(|r| r.rank_flagged == Some(true)));
            if failed > 0 {
                m.error = format!("{failed} of {} trials failed", spec.trials);
            }
            means.push(m);
        }
    }
    rows.extend(means);
    Ok(SweepResult { rows })
}
