//! Sequential rank-one constraint relaxation.
//!
//! Starting from the semidefinite relaxation, each tracked PSD variable `X`
//! receives the linear constraint `u^H X u >= m Tr(X)`, where `u` is the
//! principal eigenvector of the previous accepted iterate. The parameter `m`
//! is pushed towards 1 by a step `delta`; when a tightened problem cannot be
//! solved the step is divided and the same anchor is retried.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector};
use crate::sdp::{
    self, AffineExpr, Coefficient, ConicBackend, InteriorPoint, Relation, SdpError, SdpProblem, SdpSolution,
    SolveStatus,
};

/// Traces at or below this are rejected by [`rank_ratio`].
pub const MIN_TRACE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SrocrError {
    #[error("degenerate variable: trace {0:e} is too small for a rank ratio")]
    DegenerateVariable(f64),
    #[error("unknown tracked variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("relaxation not solvable ({status:?}): {detail}")]
    RelaxationNotSolvable { status: SolveStatus, detail: String },
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SrocrConfig {
    pub rank_threshold: f64,
    pub max_iters: usize,
    pub backoff_divisor: f64,
    /// Upper bound on the initial step.
    pub initial_step_cap: f64,
    /// The run stops once every step has shrunk below this.
    pub min_step: f64,
    /// Variables whose trace is below this fraction of the total tracked
    /// trace are treated as rank one.
    pub degenerate_fraction: f64,
}

impl Default for SrocrConfig {
    fn default() -> Self {
        Self {
            rank_threshold: 0.99,
            max_iters: 50,
            backoff_divisor: 3.0,
            initial_step_cap: 0.1,
            min_step: 1e-12,
            degenerate_fraction: 1e-7,
        }
    }
}

impl SrocrConfig {
    pub fn validate(&self) -> Result<(), SrocrError> {
        let bad = |msg: &str| Err(SrocrError::InvalidConfig(msg.to_string()));
        if !(self.rank_threshold > 0.9 && self.rank_threshold <= 1.0) {
            return bad("rank_threshold must lie in (0.9, 1]");
        }
        if !(self.backoff_divisor > 1.0) {
            return bad("backoff_divisor must exceed 1");
        }
        if !(self.initial_step_cap > 0.0 && self.initial_step_cap <= 1.0) {
            return bad("initial_step_cap must lie in (0, 1]");
        }
        if !(self.min_step > 0.0) {
            return bad("min_step must be positive");
        }
        Ok(())
    }
}

/// `lambda_max(X) / Tr(X)`.
pub fn rank_ratio(x: &CMatrix) -> Result<f64, SrocrError> {
    let tr = linalg::trace(x).re;
    if !(tr > MIN_TRACE) {
        return Err(SrocrError::DegenerateVariable(tr));
    }
    let lam = linalg::hermitian_eigenvalues(x).last().copied().unwrap_or(0.0);
    Ok((lam / tr).clamp(0.0, 1.0))
}

/// Largest eigenvalue and a unit eigenvector whose largest-magnitude entry
/// is real and positive.
pub fn principal_eigpair(x: &CMatrix) -> (f64, CVector) {
    let n = x.nrows();
    if n == 0 {
        return (0.0, CVector::zeros(0));
    }
    let eig = linalg::hermitian_part(x).symmetric_eigen();
    let (idx, lam) = eig.eigenvalues.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
    let mut u: CVector = eig.eigenvectors.column(idx).into_owned();
    let norm = u.norm();
    if norm > 0.0 {
        u.unscale_mut(norm);
    }
    linalg::fix_phase(&mut u);
    (lam, u)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackedVariable {
    pub label: String,
    #[serde(skip)]
    pub index: usize,
    /// Relaxation parameter of the next tightened solve.
    pub m: f64,
    /// Parameter of the last accepted solve.
    pub m_accepted: f64,
    pub delta: f64,
    pub initial_delta: f64,
    #[serde(skip)]
    pub anchor: CVector,
    /// Rank ratio of the last accepted iterate.
    pub rank_ratio: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrocrIteration {
    pub index: usize,
    pub accepted: bool,
    pub m: Vec<f64>,
    pub delta: Vec<f64>,
    pub rank_ratio: Vec<f64>,
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrocrState {
    pub tracked: Vec<TrackedVariable>,
    pub iteration: usize,
    pub history: Vec<SrocrIteration>,
    pub rank_not_reached: bool,
}

impl SrocrState {
    pub fn min_rank_ratio(&self) -> f64 {
        self.tracked.iter().map(|t| t.rank_ratio).fold(1.0, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct SrocrOutcome {
    pub solution: SdpSolution,
    pub state: SrocrState,
}

/// Rank ratio with near-zero variables counted as rank one.
fn tracked_ratio(x: &CMatrix, total_trace: f64, cfg: &SrocrConfig) -> (f64, bool) {
    let tr = linalg::trace(x).re;
    if tr <= cfg.degenerate_fraction * total_trace.max(1.0) || tr <= MIN_TRACE {
        return (1.0, true);
    }
    (rank_ratio(x).unwrap_or(1.0), false)
}

fn refresh(tracked: &mut [TrackedVariable], sol: &SdpSolution, cfg: &SrocrConfig) {
    let total: f64 = tracked.iter().map(|t| linalg::trace(&sol.matrices[t.index]).re.max(0.0)).sum();
    for t in tracked.iter_mut() {
        let x = &sol.matrices[t.index];
        let (ratio, degenerate) = tracked_ratio(x, total, cfg);
        t.rank_ratio = ratio;
        t.degenerate = degenerate;
        t.anchor = principal_eigpair(x).1;
    }
}

fn tightened(base: &SdpProblem, tracked: &[TrackedVariable]) -> SdpProblem {
    let mut p = base.clone();
    for t in tracked.iter().filter(|t| !t.degenerate) {
        let coeff = Coefficient::LowRank { shift: -t.m, terms: vec![(1.0, t.anchor.clone())] };
        p.add_constraint(format!("rank:{}", t.label), AffineExpr::new().term(t.index, coeff), Relation::GreaterEq, 0.0);
    }
    p
}

fn snapshot(index: usize, accepted: bool, tracked: &[TrackedVariable], objective: Option<f64>) -> SrocrIteration {
    SrocrIteration {
        index,
        accepted,
        m: tracked.iter().map(|t| t.m).collect(),
        delta: tracked.iter().map(|t| t.delta).collect(),
        rank_ratio: tracked.iter().map(|t| t.rank_ratio).collect(),
        objective,
    }
}

pub fn srocr_run(base: &SdpProblem, tracked: &[&str], config: &SrocrConfig) -> Result<SrocrOutcome, SrocrError> {
    srocr_run_with(base, tracked, config, &InteriorPoint::default())
}

pub fn srocr_run_with(
    base: &SdpProblem,
    tracked: &[&str],
    config: &SrocrConfig,
    backend: &dyn ConicBackend,
) -> Result<SrocrOutcome, SrocrError> {
    config.validate()?;
    let indices = tracked
        .iter()
        .map(|l| base.variable_index(l).ok_or_else(|| SrocrError::UnknownVariable(l.to_string())))
        .collect::<Result<Vec<_>, _>>()?;

    let relaxed = sdp::solve_with(base, backend)?;
    if !relaxed.is_optimal() {
        return Err(SrocrError::RelaxationNotSolvable {
            status: relaxed.status,
            detail: relaxed.accuracy.detail.clone(),
        });
    }

    let mut vars: Vec<TrackedVariable> = tracked
        .iter()
        .zip(&indices)
        .map(|(l, &index)| TrackedVariable {
            label: l.to_string(),
            index,
            m: 0.0,
            m_accepted: 0.0,
            delta: 0.0,
            initial_delta: 0.0,
            anchor: CVector::zeros(0),
            rank_ratio: 0.0,
            degenerate: false,
        })
        .collect();
    refresh(&mut vars, &relaxed, config);
    for t in vars.iter_mut() {
        let gap = 1.0 - t.rank_ratio;
        t.initial_delta = if gap > 0.0 { config.initial_step_cap.min(gap) } else { config.initial_step_cap };
        t.delta = t.initial_delta;
        t.m = (t.rank_ratio + t.delta).min(1.0);
    }

    let mut state = SrocrState {
        tracked: Vec::new(),
        iteration: 0,
        history: vec![snapshot(0, true, &vars, Some(relaxed.objective))],
        rank_not_reached: false,
    };
    let mut best = relaxed;
    let mut reached = false;

    while state.iteration < config.max_iters {
        state.iteration += 1;
        let attempt = sdp::solve_with(&tightened(base, &vars), backend)?;
        if attempt.is_optimal() {
            for t in vars.iter_mut() {
                t.m_accepted = t.m;
            }
            refresh(&mut vars, &attempt, config);
            state.history.push(snapshot(state.iteration, true, &vars, Some(attempt.objective)));
            // The reported solution keeps only the base problem's variables.
            best = attempt;
            if vars.iter().all(|t| t.rank_ratio >= config.rank_threshold) {
                reached = true;
                break;
            }
            for t in vars.iter_mut() {
                t.delta = t.initial_delta;
                t.m = (t.rank_ratio + t.delta).min(1.0).max(t.m_accepted);
            }
        } else {
            for t in vars.iter_mut() {
                t.delta /= config.backoff_divisor;
                t.m = (t.rank_ratio + t.delta).min(1.0).max(t.m_accepted);
            }
            state.history.push(snapshot(state.iteration, false, &vars, None));
            if vars.iter().all(|t| t.delta < config.min_step) {
                break;
            }
        }
    }

    state.rank_not_reached = !reached;
    state.tracked = vars;
    Ok(SrocrOutcome { solution: best, state })
}
