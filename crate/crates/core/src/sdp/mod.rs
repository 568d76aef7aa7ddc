//! Hermitian semidefinite programs with affine trace constraints.
//!
//! A problem has Hermitian PSD variables `X_1..X_p`, a real-linear objective
//! `sum_i Tr(A_i X_i) + c` to maximize, and constraints
//! `sum_i Tr(B_i X_i) {>=, <=, =} c`. Problems are solved by embedding each
//! Hermitian block into a real symmetric block of twice the size (see
//! [`embed`]) and handing the result to a [`ConicBackend`].

pub mod dump;
pub mod embed;
pub mod ipm;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector};

pub use embed::{embed_hermitian, embed_real, extract_hermitian, RealSdp, RealSym};
pub use ipm::InteriorPoint;

/// Constraint residual bound for an `Optimal` status.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("coefficient for variable {var} has dimension {actual}, expected {expected}")]
    Dimension { var: String, expected: usize, actual: usize },
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("coefficient is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("variable {0} has zero dimension")]
    EmptyVariable(String),
}

/// Coefficient matrix of a trace term.
///
/// `LowRank` stands for `shift * I + sum_k weight_k v_k v_k^H`; most
/// beamforming coefficients are of this form and the backend exploits it.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Dense(CMatrix),
    LowRank { shift: f64, terms: Vec<(f64, CVector)> },
}

impl Coefficient {
    pub fn identity(scale: f64) -> Self {
        Coefficient::LowRank { shift: scale, terms: Vec::new() }
    }

    /// `weight * v v^H`.
    pub fn outer(v: CVector, weight: f64) -> Self {
        Coefficient::LowRank { shift: 0.0, terms: vec![(weight, v)] }
    }

    pub fn dense(m: CMatrix) -> Result<Self, SdpError> {
        let defect = linalg::hermitian_defect(&m);
        if defect > 1e-10 * (1.0 + linalg::max_abs(&m)) {
            return Err(SdpError::NotHermitian(defect));
        }
        Ok(Coefficient::Dense(linalg::hermitian_part(&m)))
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Coefficient::Dense(m) => Some(m.nrows()),
            Coefficient::LowRank { terms, .. } => terms.first().map(|(_, v)| v.len()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Coefficient::Dense(m) => Coefficient::Dense(m * linalg::real(factor)),
            Coefficient::LowRank { shift, terms } => Coefficient::LowRank {
                shift: shift * factor,
                terms: terms.iter().map(|(w, v)| (w * factor, v.clone())).collect(),
            },
        }
    }

    pub fn to_dense(&self, n: usize) -> CMatrix {
        match self {
            Coefficient::Dense(m) => m.clone(),
            Coefficient::LowRank { shift, terms } => {
                let mut out = CMatrix::identity(n, n) * linalg::real(*shift);
                for (w, v) in terms {
                    out += linalg::outer(v, v) * linalg::real(*w);
                }
                out
            }
        }
    }

    /// `Tr(A X)` for Hermitian `X`.
    pub fn trace_with(&self, x: &CMatrix) -> f64 {
        match self {
            Coefficient::Dense(m) => linalg::trace_product(m, x).re,
            Coefficient::LowRank { shift, terms } => {
                shift * linalg::trace(x).re + terms.iter().map(|(w, v)| w * linalg::quad_form(v, x)).sum::<f64>()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermitianVariable {
    pub dim: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTerm {
    pub var: usize,
    pub coeff: Coefficient,
}

/// `sum Tr(coeff_i X_{var_i}) + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineExpr {
    pub terms: Vec<LinearTerm>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, var: usize, coeff: Coefficient) -> Self {
        self.terms.push(LinearTerm { var, coeff });
        self
    }

    pub fn constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn evaluate(&self, values: &[CMatrix]) -> f64 {
        self.constant + self.terms.iter().map(|t| t.coeff.trace_with(&values[t.var])).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    GreaterEq,
    LessEq,
    Equal,
}

/// `lhs {rel} rhs`. Any constant inside `lhs` is moved to the right-hand side
/// when the problem is embedded.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub lhs: AffineExpr,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    /// Signed slack: non-negative when satisfied.
    pub fn residual(&self, values: &[CMatrix]) -> f64 {
        let lhs = self.lhs.evaluate(values);
        match self.relation {
            Relation::GreaterEq => lhs - self.rhs,
            Relation::LessEq => self.rhs - lhs,
            Relation::Equal => -(lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SdpProblem {
    pub variables: Vec<HermitianVariable>,
    /// Maximized.
    pub objective: AffineExpr,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, label: impl Into<String>, dim: usize) -> usize {
        self.variables.push(HermitianVariable { dim, label: label.into() });
        self.variables.len() - 1
    }

    pub fn variable_index(&self, label: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.label == label)
    }

    pub fn set_objective(&mut self, objective: AffineExpr) {
        self.objective = objective;
    }

    pub fn add_constraint(&mut self, label: impl Into<String>, lhs: AffineExpr, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { label: label.into(), lhs, relation, rhs });
    }

    /// Pins every diagonal entry of `var` to `value` through equality
    /// constraints `Tr(E_kk X) = value`.
    pub fn pin_diagonal(&mut self, var: usize, value: f64) {
        let n = self.variables[var].dim;
        let label = self.variables[var].label.clone();
        for k in 0..n {
            self.add_constraint(
                format!("{label}[{k},{k}]"),
                AffineExpr::new().term(var, Coefficient::outer(linalg::basis(n, k), 1.0)),
                Relation::Equal,
                value,
            );
        }
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        for v in &self.variables {
            if v.dim == 0 {
                return Err(SdpError::EmptyVariable(v.label.clone()));
            }
        }
        let exprs = std::iter::once(&self.objective).chain(self.constraints.iter().map(|c| &c.lhs));
        for expr in exprs {
            for t in &expr.terms {
                let var = self.variables.get(t.var).ok_or(SdpError::UnknownVariable(t.var))?;
                let bad_dim = |actual| SdpError::Dimension { var: var.label.clone(), expected: var.dim, actual };
                match &t.coeff {
                    Coefficient::Dense(m) => {
                        if m.nrows() != var.dim || m.ncols() != var.dim {
                            return Err(bad_dim(m.nrows()));
                        }
                    }
                    Coefficient::LowRank { terms, .. } => {
                        if let Some((_, v)) = terms.iter().find(|(_, v)| v.len() != var.dim) {
                            return Err(bad_dim(v.len()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[CMatrix]) -> f64 {
        self.objective.evaluate(values)
    }

    /// Signed residual of every constraint, in order.
    pub fn residuals(&self, values: &[CMatrix]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.residual(values)).collect()
    }

    /// Largest violation, each scaled by `1 + |rhs|`.
    pub fn max_relative_violation(&self, values: &[CMatrix]) -> f64 {
        self.constraints.iter().map(|c| (-c.residual(values)).max(0.0) / (1.0 + c.rhs.abs())).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AccuracyReport {
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    /// Objective reported by the backend, mapped back to the Hermitian
    /// problem's sense and constant.
    pub backend_objective: f64,
    pub max_constraint_violation: f64,
    pub min_eigenvalue: f64,
    pub retried: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub matrices: Vec<CMatrix>,
    /// Recomputed from `matrices`.
    pub objective: f64,
    pub status: SolveStatus,
    pub accuracy: AccuracyReport,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Status returned by a real conic backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Failed,
}

#[derive(Debug, Clone)]
pub struct RealSolution {
    pub status: BackendStatus,
    /// One symmetric matrix per PSD block.
    pub blocks: Vec<nalgebra::DMatrix<f64>>,
    pub lp: nalgebra::DVector<f64>,
    pub y: nalgebra::DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
}

/// Any solver for block-diagonal real SDPs in the standard primal form
/// `min <C, X>  s.t.  <A_i, X> = b_i,  X in S_+ x ... x R_+`.
pub trait ConicBackend: Send + Sync {
    fn solve(&self, problem: &RealSdp) -> RealSolution;
}

/// Solves with the default interior-point backend.
pub fn solve(problem: &SdpProblem) -> Result<SdpSolution, SdpError> {
    solve_with(problem, &InteriorPoint::default())
}

/// Embeds, solves, extracts. A numerical failure is retried once with
/// row-equilibrated data before it is reported.
pub fn solve_with(problem: &SdpProblem, backend: &dyn ConicBackend) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    let mut real = embed_real(problem, false)?;
    let mut raw = backend.solve(&real);
    let mut retried = false;
    if raw.status == BackendStatus::Failed {
        real = embed_real(problem, true)?;
        raw = backend.solve(&real);
        retried = true;
    }

    let matrices: Vec<CMatrix> =
        problem.variables.iter().zip(&raw.blocks).map(|(v, block)| extract_hermitian(block, v.dim)).collect();
    let objective = problem.objective_value(&matrices);
    let max_violation = problem.max_relative_violation(&matrices);
    let min_eig = matrices.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min);

    let mut detail = String::new();
    let status = match raw.status {
        BackendStatus::Optimal if max_violation <= RESIDUAL_TOL => SolveStatus::Optimal,
        BackendStatus::Optimal => {
            detail = format!("constraint violation {max_violation:e} after extraction");
            SolveStatus::NumericalFailure
        }
        BackendStatus::PrimalInfeasible => SolveStatus::Infeasible,
        BackendStatus::DualInfeasible => {
            detail = "objective unbounded".to_string();
            SolveStatus::NumericalFailure
        }
        BackendStatus::Failed => {
            detail = "backend did not converge".to_string();
            SolveStatus::NumericalFailure
        }
    };

    Ok(SdpSolution {
        matrices,
        objective,
        status,
        accuracy: AccuracyReport {
            iterations: raw.iterations,
            primal_infeasibility: raw.primal_infeasibility,
            dual_infeasibility: raw.dual_infeasibility,
            relative_gap: raw.relative_gap,
            backend_objective: real.objective_sign * raw.primal_objective / real.objective_scale
                + problem.objective.constant,
            max_constraint_violation: max_violation,
            min_eigenvalue: min_eig,
            retried,
            detail,
        },
    })
}
