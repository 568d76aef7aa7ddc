//! Dinkelbach outer loop around alternating optimization.
//!
//! The unicast SINR is a ratio `U / M` with `U = |h_n^H w_u|^2` and
//! `M = zeta |h_n^H w_m|^2 + sigma_n^2`. For a parameter `q` the solver
//! maximizes `U - q M` by alternating between the transmit beamformers (at
//! fixed IRS phases) and the phases (at fixed beamformers), each through a
//! semidefinite relaxation tightened by [`crate::srocr`]. `q` is then set to
//! the achieved ratio until `U - q M` falls below `epsilon1`.
//!
//! All solves run in normalized units: `G` and the direct links are scaled
//! by `sqrt(P_max / sigma_n^2)`, which turns the budget and the near-user
//! noise into 1 while leaving every SINR unchanged.

pub mod recovery;
pub mod subproblem;

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{CMatrix, CVector, C64};
use crate::model::{
    self, BeamformingSolution, ChannelSet, FeasibilityReport, LinkGains, ModelError, RateBreakdown, ReflectVector,
    SystemConfig, User,
};
use crate::sdp::{self, SdpError, SdpProblem};
use crate::srocr::{self, SrocrConfig, SrocrError};

pub use recovery::{best_power_split, recover_rank_one, DirectionGains, Recovered, RecoveryKind};
pub use subproblem::{build_reflect_subproblem, build_transmit_subproblem, LiftedLink, Scenario, SubproblemMatrices};

/// ChaCha stream for the initial IRS phases (channel links use 1..=5).
const PHASE_STREAM: u64 = 6;

/// Internal acceptance tolerance; tighter than the reported one so that
/// unscaling cannot push a point over the edge.
const ACCEPT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Srocr(#[from] SrocrError),
    #[error("infeasible instance: {constraint} cannot be met ({detail})")]
    InfeasibleInstance { constraint: String, detail: String },
    #[error("no feasible rank-one point found: {0}")]
    NoFeasiblePoint(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DinkelbachConfig {
    /// Stop when `U - q M` (normalized units) falls below this.
    pub epsilon1: f64,
    pub max_outer: usize,
    pub ao_inner_max: usize,
    /// Relative change of `U - q M` that ends the alternating loop.
    pub ao_epsilon: f64,
    pub srocr: SrocrConfig,
    /// Plain relaxations inside the loop and one rank-tightened pass at the end.
    pub lazy_rank: bool,
    /// Skip the phase update and keep the initial phases.
    pub optimize_reflect: bool,
    pub feasibility_tol: f64,
    pub record_timings: bool,
}

impl Default for DinkelbachConfig {
    fn default() -> Self {
        Self {
            epsilon1: 1e-4,
            max_outer: 30,
            ao_inner_max: 20,
            ao_epsilon: 1e-4,
            srocr: SrocrConfig::default(),
            lazy_rank: false,
            optimize_reflect: true,
            feasibility_tol: model::FEASIBILITY_TOL,
            record_timings: true,
        }
    }
}

impl DinkelbachConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::InvalidConfig(m.to_string()));
        if !(self.epsilon1 > 0.0) {
            return bad("epsilon1 must be positive");
        }
        if self.max_outer == 0 || self.ao_inner_max == 0 {
            return bad("iteration caps must be at least 1");
        }
        if !(self.ao_epsilon > 0.0) {
            return bad("ao_epsilon must be positive");
        }
        self.srocr.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxOuter,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RankRatios {
    pub w_u: f64,
    pub w_m: f64,
    /// Absent without an IRS or when no phase update was accepted.
    pub v: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub transmit_secs: f64,
    pub reflect_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterIteration {
    pub index: usize,
    /// Parameter used in this iteration.
    pub q: f64,
    /// `U - q M` at the iteration's solution, normalized units.
    pub gap: f64,
    pub ao_passes: usize,
    pub rates: RateBreakdown,
    pub worst_residual: f64,
    pub rank_ratios: RankRatios,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `q` per outer iteration followed by the final ratio.
    pub q_iterates: Vec<f64>,
    pub iterations: Vec<OuterIteration>,
    pub rates: RateBreakdown,
    pub feasibility: FeasibilityReport,
    pub rank_ratios: RankRatios,
    pub rank_flagged: bool,
    pub flags: Vec<String>,
    pub termination: Termination,
    pub outer_iterations: usize,
    pub sdp_solves: usize,
    pub timings: Option<Timings>,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn final_q(&self) -> f64 {
        self.q_iterates.last().copied().unwrap_or(0.0)
    }
}

/// Scenario and channels in normalized units.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub channels: ChannelSet,
    pub scenario: Scenario,
    pub config: SystemConfig,
    /// Physical beamformer = `amplitude` x normalized beamformer.
    pub amplitude: f64,
}

impl Normalized {
    pub fn new(config: &SystemConfig, channels: &ChannelSet) -> Result<Self, OptimizerError> {
        config.validate()?;
        channels.validate_against(config)?;
        let factor = (config.p_max / config.sigma2_nu).sqrt();
        let scenario = Scenario {
            p_max: 1.0,
            sigma2_nu: 1.0,
            sigma2_fu: config.sigma2_fu / config.sigma2_nu,
            zeta: config.zeta,
            gamma: config.gamma / config.sigma2_nu,
            gamma_bar: config.gamma_bar(),
        };
        let normalized = SystemConfig {
            p_max: 1.0,
            sigma2_nu: 1.0,
            sigma2_fu: scenario.sigma2_fu,
            gamma: scenario.gamma,
            ..config.clone()
        };
        Ok(Self { channels: channels.scaled(factor), scenario, config: normalized, amplitude: config.p_max.sqrt() })
    }

    pub fn to_physical(&self, s: &BeamformingSolution) -> BeamformingSolution {
        let a = C64::new(self.amplitude, 0.0);
        BeamformingSolution { w_u: &s.w_u * a, w_m: &s.w_m * a, reflect: s.reflect.clone() }
    }

    pub fn from_physical(&self, s: &BeamformingSolution) -> BeamformingSolution {
        let a = C64::new(1.0 / self.amplitude, 0.0);
        BeamformingSolution { w_u: &s.w_u * a, w_m: &s.w_m * a, reflect: s.reflect.clone() }
    }
}

/// `U / M` for fixed beamformers and phases, i.e. the unicast SINR.
pub fn dinkelbach_ratio(
    config: &SystemConfig,
    channels: &ChannelSet,
    s: &BeamformingSolution,
) -> Result<f64, OptimizerError> {
    let g = model::link_gains(channels, &s.reflect, &s.w_u, &s.w_m)?;
    Ok(g.unicast_sinr(config.zeta, config.sigma2_nu))
}

/// Uniform random phases in `(0, 2 pi]` drawn from the run seed.
pub fn initial_reflect(k: usize, seed: u64) -> ReflectVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(PHASE_STREAM);
    ReflectVector::from_phases((0..k).map(|_| TAU - rng.gen::<f64>() * TAU))
}

/// A feasible operating point with its parametric objective pieces.
#[derive(Debug, Clone)]
struct Point {
    sol: BeamformingSolution,
    gains: LinkGains,
    ranks: RankRatios,
    flags: Vec<String>,
}

impl Point {
    fn objective(&self, q: f64, s: &Scenario) -> f64 {
        self.gains.nu_u - q * (s.zeta * self.gains.nu_m + s.sigma2_nu)
    }

    fn ratio(&self, s: &Scenario) -> f64 {
        self.gains.nu_u / (s.zeta * self.gains.nu_m + s.sigma2_nu)
    }
}

/// Outcome of one alternating pass.
#[derive(Debug, Clone)]
pub struct AoStep {
    pub solution: BeamformingSolution,
    pub objective_before: f64,
    pub objective_after: f64,
    pub transmit_accepted: bool,
    pub reflect_accepted: bool,
}

struct Engine<'a> {
    norm: Normalized,
    cfg: &'a DinkelbachConfig,
    sdp_solves: usize,
    timings: Timings,
}

enum Relaxed {
    Solved { matrices: Vec<CMatrix>, ratios: Vec<f64>, flagged: bool },
    NotSolvable(String),
}

impl<'a> Engine<'a> {
    fn scenario(&self) -> &Scenario {
        &self.norm.scenario
    }

    fn evaluate(
        &self,
        sol: BeamformingSolution,
        ranks: RankRatios,
        flags: Vec<String>,
    ) -> Result<Option<Point>, OptimizerError> {
        let report = model::check_feasibility(&self.norm.config, &self.norm.channels, &sol, ACCEPT_TOL)?;
        if !report.feasible {
            return Ok(None);
        }
        let gains = model::link_gains(&self.norm.channels, &sol.reflect, &sol.w_u, &sol.w_m)?;
        Ok(Some(Point { sol, gains, ranks, flags }))
    }

    fn solve_relaxed(
        &mut self,
        problem: &SdpProblem,
        tracked: &[&str],
        tighten: bool,
    ) -> Result<Relaxed, OptimizerError> {
        let idx: Vec<usize> = tracked.iter().map(|l| problem.variable_index(l).expect("tracked variable")).collect();
        if tighten {
            match srocr::srocr_run(problem, tracked, &self.cfg.srocr) {
                Ok(out) => {
                    self.sdp_solves += out.state.history.len();
                    let ratios = out.state.tracked.iter().map(|t| t.rank_ratio).collect();
                    let matrices = idx.iter().map(|&i| out.solution.matrices[i].clone()).collect();
                    Ok(Relaxed::Solved { matrices, ratios, flagged: out.state.rank_not_reached })
                }
                Err(SrocrError::RelaxationNotSolvable { status, detail }) => {
                    self.sdp_solves += 1;
                    Ok(Relaxed::NotSolvable(describe(status, &detail)))
                }
                Err(e) => Err(e.into()),
            }
        } else {
            let sol = sdp::solve(problem)?;
            self.sdp_solves += 1;
            if !sol.is_optimal() {
                return Ok(Relaxed::NotSolvable(describe(sol.status, &sol.accuracy.detail)));
            }
            let matrices: Vec<CMatrix> = idx.iter().map(|&i| sol.matrices[i].clone()).collect();
            let ratios = matrices.iter().map(|m| srocr::rank_ratio(m).unwrap_or(1.0)).collect();
            Ok(Relaxed::Solved { matrices, ratios, flagged: false })
        }
    }

    /// Best powers along the directions of `w_u`, `w_m` at phases `reflect`.
    fn repair(
        &self,
        q: f64,
        w_u: &CVector,
        w_m: &CVector,
        reflect: &ReflectVector,
    ) -> Result<Option<BeamformingSolution>, OptimizerError> {
        let h_nu = model::effective_channel(&self.norm.channels, reflect, User::Near)?;
        let h_fu = model::effective_channel(&self.norm.channels, reflect, User::Far)?;
        let d_u = recovery::direction(w_u, &h_nu);
        let d_m = recovery::direction(w_m, &h_fu);
        let g = DirectionGains::new(&h_nu, &h_fu, &d_u, &d_m);
        Ok(best_power_split(&g, q, self.scenario()).map(|(pu, pm)| BeamformingSolution {
            w_u: d_u * C64::new(pu.sqrt(), 0.0),
            w_m: d_m * C64::new(pm.sqrt(), 0.0),
            reflect: reflect.clone(),
        }))
    }

    fn transmit_update(
        &mut self,
        q: f64,
        reflect: &ReflectVector,
        current: Option<&Point>,
        tighten: bool,
    ) -> Result<Result<Option<Point>, String>, OptimizerError> {
        let start = Instant::now();
        let n = self.norm.channels.n_antennas();
        let zero = CVector::zeros(n);
        let (wu, wm) = current.map_or((&zero, &zero), |p| (&p.sol.w_u, &p.sol.w_m));
        let m = SubproblemMatrices::new(&self.norm.channels, reflect, wu, wm, self.scenario())?;
        let problem = build_transmit_subproblem(q, &m, self.scenario());
        let relaxed =
            self.solve_relaxed(&problem, &[subproblem::TRANSMIT_UNICAST, subproblem::TRANSMIT_MULTICAST], tighten)?;
        let out = match relaxed {
            Relaxed::NotSolvable(why) => Err(why),
            Relaxed::Solved { matrices, ratios, flagged } => {
                let ru = recover_rank_one(&matrices[0], RecoveryKind::Beamformer);
                let rm = recover_rank_one(&matrices[1], RecoveryKind::Beamformer);
                let mut flags = Vec::new();
                if flagged {
                    flags.push("transmit_rank_not_reached".to_string());
                }
                let ranks = RankRatios { w_u: ratios[0], w_m: ratios[1], v: current.and_then(|p| p.ranks.v) };
                match self.repair(q, &ru.vector, &rm.vector, reflect)? {
                    Some(sol) => Ok(self.evaluate(sol, ranks, flags)?),
                    None => Ok(None),
                }
            }
        };
        self.timings.transmit_secs += start.elapsed().as_secs_f64();
        Ok(out)
    }

    fn reflect_update(&mut self, q: f64, current: &Point, tighten: bool) -> Result<Option<Point>, OptimizerError> {
        let start = Instant::now();
        let m = SubproblemMatrices::new(
            &self.norm.channels,
            &current.sol.reflect,
            &current.sol.w_u,
            &current.sol.w_m,
            self.scenario(),
        )?;
        let problem = build_reflect_subproblem(q, &m, self.scenario());
        let out = match self.solve_relaxed(&problem, &[subproblem::REFLECT], tighten)? {
            Relaxed::NotSolvable(_) => None,
            Relaxed::Solved { matrices, ratios, flagged } => {
                let rec = recover_rank_one(&matrices[0], RecoveryKind::Reflect);
                let reflect = ReflectVector::from_coefficients(&rec.vector);
                let mut flags = Vec::new();
                if flagged {
                    flags.push("reflect_rank_not_reached".to_string());
                }
                if rec.fallback {
                    flags.push("reflect_pivot_fallback".to_string());
                }
                let ranks = RankRatios { v: Some(ratios[0]), ..current.ranks };
                match self.repair(q, &current.sol.w_u, &current.sol.w_m, &reflect)? {
                    Some(sol) => self.evaluate(sol, ranks, flags)?,
                    None => None,
                }
            }
        };
        self.timings.reflect_secs += start.elapsed().as_secs_f64();
        Ok(out)
    }

    /// One pass: transmit update, then phase update. Each is kept only if
    /// feasible and not worse for `U - q M`.
    fn pass(&mut self, q: f64, current: Point, tighten: bool) -> Result<(Point, bool, bool), OptimizerError> {
        let s = *self.scenario();
        let mut cur = current;
        let mut t_ok = false;
        let mut r_ok = false;
        if let Ok(Some(cand)) = self.transmit_update(q, &cur.sol.reflect.clone(), Some(&cur), tighten)? {
            if cand.objective(q, &s) >= cur.objective(q, &s) {
                cur = merge_flags(cand, &cur, "transmit");
                t_ok = true;
            }
        }
        if self.cfg.optimize_reflect && self.norm.channels.n_elements() > 0 {
            if let Some(cand) = self.reflect_update(q, &cur, tighten)? {
                if cand.objective(q, &s) >= cur.objective(q, &s) {
                    cur = merge_flags(cand, &cur, "reflect");
                    r_ok = true;
                }
            }
        }
        Ok((cur, t_ok, r_ok))
    }

    fn ao_loop(&mut self, q: f64, start: Point, tighten: bool) -> Result<(Point, usize), OptimizerError> {
        let s = *self.scenario();
        let mut cur = start;
        let mut passes = 0;
        for _ in 0..self.cfg.ao_inner_max {
            let before = cur.objective(q, &s);
            let (next, _, _) = self.pass(q, cur, tighten)?;
            passes += 1;
            let after = next.objective(q, &s);
            cur = next;
            if (after - before).abs() < self.cfg.ao_epsilon * before.abs().max(1.0) {
                break;
            }
        }
        Ok((cur, passes))
    }

    /// Transmit relaxation at `q = 0`; on failure, finds which constraint
    /// group makes it infeasible.
    fn initial_point(&mut self, reflect: &ReflectVector) -> Result<Point, OptimizerError> {
        let tighten = !self.cfg.lazy_rank;
        match self.transmit_update(0.0, reflect, None, tighten)? {
            Ok(Some(p)) => Ok(p),
            Ok(None) => Err(OptimizerError::NoFeasiblePoint("rank-one recovery of the initial relaxation".into())),
            Err(why) => Err(self.diagnose(reflect, why)?),
        }
    }

    fn diagnose(&mut self, reflect: &ReflectVector, why: String) -> Result<OptimizerError, OptimizerError> {
        let n = self.norm.channels.n_antennas();
        let zero = CVector::zeros(n);
        let m = SubproblemMatrices::new(&self.norm.channels, reflect, &zero, &zero, self.scenario())?;
        let full = build_transmit_subproblem(0.0, &m, self.scenario());
        let without = |labels: &[&str]| {
            let mut p = full.clone();
            p.constraints.retain(|c| !labels.contains(&c.label.as_str()));
            p
        };
        let solvable = |p: &SdpProblem| sdp::solve(p).map(|s| s.is_optimal());
        let constraint = if solvable(&without(&["illumination"]))? {
            "illumination"
        } else if solvable(&without(&["multicast_nu", "multicast_fu"]))? {
            "multicast_rate"
        } else {
            "multicast_rate+illumination"
        };
        Ok(OptimizerError::InfeasibleInstance { constraint: constraint.to_string(), detail: why })
    }
}

fn describe(status: sdp::SolveStatus, detail: &str) -> String {
    let status = format!("relaxation status {status:?}");
    if detail.is_empty() {
        status
    } else {
        format!("{status}: {detail}")
    }
}

fn merge_flags(mut cand: Point, prev: &Point, stage: &str) -> Point {
    // Flags describe the latest accepted update of each stage.
    let keep: Vec<String> = prev.flags.iter().filter(|f| !f.starts_with(stage)).cloned().collect();
    let mut flags = keep;
    flags.append(&mut cand.flags);
    cand.flags = flags;
    cand
}

/// Solves the joint problem from random initial phases.
pub fn dinkelbach_solve(
    config: &SystemConfig,
    channels: &ChannelSet,
    dconfig: &DinkelbachConfig,
) -> Result<(BeamformingSolution, SolveReport), OptimizerError> {
    dinkelbach_solve_from(config, channels, None, dconfig)
}

/// As [`dinkelbach_solve`], optionally starting from given phases.
pub fn dinkelbach_solve_from(
    config: &SystemConfig,
    channels: &ChannelSet,
    initial: Option<ReflectVector>,
    dconfig: &DinkelbachConfig,
) -> Result<(BeamformingSolution, SolveReport), OptimizerError> {
    dconfig.validate()?;
    let started = Instant::now();
    let norm = Normalized::new(config, channels)?;
    let reflect = initial.unwrap_or_else(|| initial_reflect(channels.n_elements(), config.seed));
    if reflect.len() != channels.n_elements() {
        return Err(ModelError::Dimension {
            what: "initial reflect vector",
            expected: channels.n_elements(),
            actual: reflect.len(),
        }
        .into());
    }
    let mut engine = Engine { norm, cfg: dconfig, sdp_solves: 0, timings: Timings::default() };
    let s = *engine.scenario();
    let tighten = !dconfig.lazy_rank;

    let mut point = engine.initial_point(&reflect)?;
    let mut q = 0.0;
    let mut q_iterates = Vec::new();
    let mut iterations = Vec::new();
    let mut termination = Termination::MaxOuter;

    for index in 1..=dconfig.max_outer {
        q_iterates.push(q);
        let (next, passes) = engine.ao_loop(q, point, tighten)?;
        point = next;
        let gap = point.objective(q, &s);
        let phys = engine.norm.to_physical(&point.sol);
        let rates = model::rate_breakdown(config, channels, &phys)?;
        let worst = model::check_feasibility(config, channels, &phys, dconfig.feasibility_tol)?.worst();
        iterations.push(OuterIteration {
            index,
            q,
            gap,
            ao_passes: passes,
            rates,
            worst_residual: worst,
            rank_ratios: point.ranks,
        });
        if gap < dconfig.epsilon1 {
            termination = Termination::Converged;
            break;
        }
        q = point.ratio(&s);
    }

    if dconfig.lazy_rank {
        let q_final = point.ratio(&s);
        let (next, _) = engine.ao_loop(q_final, point, true)?;
        point = next;
    }

    let solution = engine.norm.to_physical(&point.sol);
    q_iterates.push(point.ratio(&s));
    let rates = model::rate_breakdown(config, channels, &solution)?;
    let feasibility = model::check_feasibility(config, channels, &solution, dconfig.feasibility_tol)?;
    let threshold = dconfig.srocr.rank_threshold;
    let ranks = point.ranks;
    let mut flags = point.flags.clone();
    let low_rank = ranks.w_u < threshold || ranks.w_m < threshold || ranks.v.is_some_and(|v| v < threshold);
    if low_rank && !flags.iter().any(|f| f.contains("rank")) {
        flags.push("rank_below_threshold".to_string());
    }
    if !feasibility.feasible {
        flags.push("infeasible_after_unscaling".to_string());
    }
    let rank_flagged = flags.iter().any(|f| f.contains("rank") || f.contains("fallback"));
    engine.timings.total_secs = started.elapsed().as_secs_f64();

    let report = SolveReport {
        outer_iterations: iterations.len(),
        q_iterates,
        iterations,
        rates,
        feasibility,
        rank_ratios: ranks,
        rank_flagged,
        flags,
        termination,
        sdp_solves: engine.sdp_solves,
        timings: dconfig.record_timings.then_some(engine.timings),
    };
    Ok((solution, report))
}

/// Transmit and (with an IRS) reflect relaxations at a physical-unit point
/// and parameter `q`, in normalized units.
pub fn relaxations_at(
    config: &SystemConfig,
    channels: &ChannelSet,
    solution: &BeamformingSolution,
    q: f64,
) -> Result<(SdpProblem, Option<SdpProblem>), OptimizerError> {
    let norm = Normalized::new(config, channels)?;
    let sol = norm.from_physical(solution);
    let m = SubproblemMatrices::new(&norm.channels, &sol.reflect, &sol.w_u, &sol.w_m, &norm.scenario)?;
    let transmit = build_transmit_subproblem(q, &m, &norm.scenario);
    let reflect = (channels.n_elements() > 0).then(|| build_reflect_subproblem(q, &m, &norm.scenario));
    Ok((transmit, reflect))
}

/// One alternating pass at parameter `q` from a physical-unit solution.
pub fn ao_step(
    config: &SystemConfig,
    channels: &ChannelSet,
    q: f64,
    current: &BeamformingSolution,
    dconfig: &DinkelbachConfig,
) -> Result<AoStep, OptimizerError> {
    dconfig.validate()?;
    let norm = Normalized::new(config, channels)?;
    let sol = norm.from_physical(current);
    let mut engine = Engine { norm, cfg: dconfig, sdp_solves: 0, timings: Timings::default() };
    let s = *engine.scenario();
    let start = engine
        .evaluate(sol.clone(), RankRatios { w_u: 1.0, w_m: 1.0, v: None }, Vec::new())?
        .ok_or_else(|| OptimizerError::NoFeasiblePoint("starting point violates the constraints".into()))?;
    let before = start.objective(q, &s);
    let (next, t, r) = engine.pass(q, start, !dconfig.lazy_rank)?;
    Ok(AoStep {
        objective_before: before,
        objective_after: next.objective(q, &s),
        solution: engine.norm.to_physical(&next.sol),
        transmit_accepted: t,
        reflect_accepted: r,
    })
}
