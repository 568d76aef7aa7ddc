//! Matrices and SDPs of the two alternating subproblems.
//!
//! Everything here works in normalized units (see [`super::Normalized`]):
//! noise at the near user is 1 and the power budget is 1.

use crate::linalg::{self, CMatrix, CVector, C64};
use crate::model::{self, ChannelSet, ReflectVector, User};
use crate::sdp::{AffineExpr, Coefficient, Relation, SdpProblem};

use super::OptimizerError;

pub const TRANSMIT_UNICAST: &str = "W_u";
pub const TRANSMIT_MULTICAST: &str = "W_m";
pub const REFLECT: &str = "V";

/// Scalars shared by both subproblems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub p_max: f64,
    pub sigma2_nu: f64,
    pub sigma2_fu: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub gamma_bar: f64,
}

/// Per-link blocks of the lifted reflect problem for one beamformer `w`:
/// `z = [diag(h_I^H) G w ; h_B^H w]` with `|h^H w|^2 = |z^H vbar|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedLink {
    pub z: CVector,
    /// `|h_B^H w|^2`, the part of `z z^H` carried as a constant.
    pub direct: f64,
}

impl LiftedLink {
    fn new(h_irs_mix: &CMatrix, h_bs: &CVector, w: &CVector) -> Self {
        let k = h_irs_mix.nrows();
        let mut z = CVector::zeros(k + 1);
        z.rows_mut(0, k).copy_from(&(h_irs_mix * w));
        let b = h_bs.dotc(w);
        z[k] = b;
        Self { z, direct: b.norm_sqr() }
    }

    /// `R = z z^H` with the lower-right entry zeroed.
    pub fn block(&self) -> CMatrix {
        let k = self.z.len() - 1;
        let mut r = linalg::outer(&self.z, &self.z);
        r[(k, k)] = C64::new(0.0, 0.0);
        r
    }

    /// The same block as a low-rank coefficient.
    pub fn coefficient(&self, weight: f64) -> Coefficient {
        let k = self.z.len() - 1;
        Coefficient::LowRank {
            shift: 0.0,
            terms: vec![(weight, self.z.clone()), (-weight * self.direct, linalg::basis(k + 1, k))],
        }
    }
}

/// All matrices of both subproblems at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemMatrices {
    pub h_eff_nu: CVector,
    pub h_eff_fu: CVector,
    /// `h_n h_n^H`.
    pub h_nu: CMatrix,
    pub h_fu: CMatrix,
    /// `diag(h_I^H) G`, K x N.
    pub h_irs_nu: CMatrix,
    pub h_irs_fu: CMatrix,
    /// Illumination block over the lifted vector.
    pub illumination: CMatrix,
    pub r_nu: LiftedLink,
    pub r_nm: LiftedLink,
    pub r_fu: LiftedLink,
    pub r_fm: LiftedLink,
    pub a_nu: f64,
    pub a_nm: f64,
    /// Constant of the near-user multicast constraint.
    pub c: f64,
    /// Constant of the far-user multicast constraint.
    pub d: f64,
    pub gamma_bar: f64,
}

fn irs_mix(h_irs: &CVector, g: &CMatrix) -> CMatrix {
    let mut out = g.clone();
    for (k, mut row) in out.row_iter_mut().enumerate() {
        row *= h_irs[k].conj();
    }
    out
}

impl SubproblemMatrices {
    pub fn new(
        channels: &ChannelSet,
        reflect: &ReflectVector,
        w_u: &CVector,
        w_m: &CVector,
        scenario: &Scenario,
    ) -> Result<Self, OptimizerError> {
        let h_eff_nu = model::effective_channel(channels, reflect, User::Near)?;
        let h_eff_fu = model::effective_channel(channels, reflect, User::Far)?;
        let h_irs_nu = irs_mix(&channels.h_irs_nu, &channels.g_bs_irs);
        let h_irs_fu = irs_mix(&channels.h_irs_fu, &channels.g_bs_irs);
        let r_nu = LiftedLink::new(&h_irs_nu, &channels.h_bs_nu, w_u);
        let r_nm = LiftedLink::new(&h_irs_nu, &channels.h_bs_nu, w_m);
        let r_fu = LiftedLink::new(&h_irs_fu, &channels.h_bs_fu, w_u);
        let r_fm = LiftedLink::new(&h_irs_fu, &channels.h_bs_fu, w_m);
        let illumination = linalg::outer(&r_fu.z, &r_fu.z) + linalg::outer(&r_fm.z, &r_fm.z);
        let gb = scenario.gamma_bar;
        Ok(Self {
            h_nu: linalg::outer(&h_eff_nu, &h_eff_nu),
            h_fu: linalg::outer(&h_eff_fu, &h_eff_fu),
            h_eff_nu,
            h_eff_fu,
            h_irs_nu,
            h_irs_fu,
            illumination,
            a_nu: r_nu.direct,
            a_nm: r_nm.direct,
            c: r_nm.direct - gb * r_nu.direct - gb * scenario.sigma2_nu,
            d: r_fm.direct - gb * r_fu.direct - gb * scenario.sigma2_fu,
            r_nu,
            r_nm,
            r_fu,
            r_fm,
            gamma_bar: gb,
        })
    }
}

/// Transmit-beamformer relaxation at a fixed reflect vector.
pub fn build_transmit_subproblem(q: f64, m: &SubproblemMatrices, s: &Scenario) -> SdpProblem {
    let mut p = SdpProblem::new();
    let n = m.h_eff_nu.len();
    let wu = p.add_variable(TRANSMIT_UNICAST, n);
    let wm = p.add_variable(TRANSMIT_MULTICAST, n);
    let hn = |w: f64| Coefficient::outer(m.h_eff_nu.clone(), w);
    let hf = |w: f64| Coefficient::outer(m.h_eff_fu.clone(), w);
    let gb = m.gamma_bar;

    let mut objective = AffineExpr::new().term(wu, hn(1.0)).constant(-q * s.sigma2_nu);
    if s.zeta > 0.0 {
        objective = objective.term(wm, hn(-q * s.zeta));
    }
    p.set_objective(objective);
    p.add_constraint(
        "power",
        AffineExpr::new().term(wu, Coefficient::identity(1.0)).term(wm, Coefficient::identity(1.0)),
        Relation::LessEq,
        s.p_max,
    );
    p.add_constraint(
        "multicast_nu",
        AffineExpr::new().term(wm, hn(1.0)).term(wu, hn(-gb)),
        Relation::GreaterEq,
        gb * s.sigma2_nu,
    );
    p.add_constraint(
        "multicast_fu",
        AffineExpr::new().term(wm, hf(1.0)).term(wu, hf(-gb)),
        Relation::GreaterEq,
        gb * s.sigma2_fu,
    );
    p.add_constraint(
        "illumination",
        AffineExpr::new().term(wu, hf(1.0)).term(wm, hf(1.0)),
        Relation::GreaterEq,
        s.gamma,
    );
    p
}

/// Lifted reflect relaxation at fixed beamformers, `V` of size K+1 with
/// unit diagonal.
pub fn build_reflect_subproblem(q: f64, m: &SubproblemMatrices, s: &Scenario) -> SdpProblem {
    let mut p = SdpProblem::new();
    let dim = m.r_nu.z.len();
    let v = p.add_variable(REFLECT, dim);
    let gb = m.gamma_bar;

    let mut objective =
        AffineExpr::new().term(v, m.r_nu.coefficient(1.0)).constant(m.a_nu - q * (s.zeta * m.a_nm + s.sigma2_nu));
    if s.zeta > 0.0 {
        objective = objective.term(v, m.r_nm.coefficient(-q * s.zeta));
    }
    p.set_objective(objective);
    p.add_constraint(
        "multicast_nu",
        AffineExpr::new().term(v, m.r_nm.coefficient(1.0)).term(v, m.r_nu.coefficient(-gb)).constant(m.c),
        Relation::GreaterEq,
        0.0,
    );
    p.add_constraint(
        "multicast_fu",
        AffineExpr::new().term(v, m.r_fm.coefficient(1.0)).term(v, m.r_fu.coefficient(-gb)).constant(m.d),
        Relation::GreaterEq,
        0.0,
    );
    p.add_constraint(
        "illumination",
        AffineExpr::new()
            .term(v, Coefficient::outer(m.r_fu.z.clone(), 1.0))
            .term(v, Coefficient::outer(m.r_fm.z.clone(), 1.0)),
        Relation::GreaterEq,
        s.gamma,
    );
    p.pin_diagonal(v, 1.0);
    p
}
