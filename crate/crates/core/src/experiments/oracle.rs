//! Exhaustive grid search for tiny instances.
//!
//! Phases take `phase_levels` values `2 pi (i + 1) / L` per element. Each
//! beamformer is `sqrt(p P)` or `sqrt((1 - p) P)` times a unit direction
//! `cos(a) e1 + sin(a) exp(j b) e2`, where `e1, e2` is an orthonormal basis
//! of the span of both effective channels. Only full-power points are
//! enumerated: scaling both beamformers up raises every SINR and the
//! illumination, so an optimum always spends the whole budget.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::linalg::{CVector, C64};
use crate::model::{self, BeamformingSolution, ChannelSet, ReflectVector, SystemConfig, User};

use super::ExperimentError;

/// Grid size cap.
pub const MAX_GRID_POINTS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSpec {
    pub phase_levels: usize,
    pub polar_levels: usize,
    pub azimuth_levels: usize,
    pub power_levels: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { phase_levels: 16, polar_levels: 10, azimuth_levels: 12, power_levels: 21 }
    }
}

impl OracleSpec {
    /// A grid containing every point of `self`.
    pub fn refined(&self) -> Self {
        Self {
            phase_levels: 2 * self.phase_levels,
            polar_levels: 2 * self.polar_levels - 1,
            azimuth_levels: 2 * self.azimuth_levels,
            power_levels: 2 * self.power_levels - 1,
        }
    }

    fn directions(&self, n: usize) -> usize {
        if n == 1 {
            1
        } else {
            self.polar_levels * self.azimuth_levels
        }
    }

    pub fn grid_points(&self, n: usize, k: usize) -> f64 {
        let d = self.directions(n) as f64;
        (self.phase_levels as f64).powi(k as i32) * d * d * self.power_levels as f64
    }

    pub fn validate(&self, n: usize, k: usize) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidSpec(m));
        if n == 0 || n > 2 || k > 2 {
            return bad(format!("oracle needs N <= 2 and K <= 2, got N = {n}, K = {k}"));
        }
        if self.phase_levels == 0 || self.polar_levels < 2 || self.azimuth_levels == 0 || self.power_levels < 2 {
            return bad("oracle grid levels too small".into());
        }
        let size = self.grid_points(n, k);
        if size > MAX_GRID_POINTS {
            return bad(format!("oracle grid has {size:e} points, limit {MAX_GRID_POINTS:e}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_rate: f64,
    pub solution: BeamformingSolution,
    pub evaluated: u64,
    pub feasible: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub best_rate: f64,
    pub phases: Vec<f64>,
    pub w_u: Vec<[f64; 2]>,
    pub w_m: Vec<[f64; 2]>,
    pub evaluated: u64,
    pub feasible: u64,
}

impl From<&OracleResult> for OracleSummary {
    fn from(r: &OracleResult) -> Self {
        let pairs = |v: &CVector| v.iter().map(|z| [z.re, z.im]).collect();
        Self {
            best_rate: r.best_rate,
            phases: r.solution.reflect.phases().to_vec(),
            w_u: pairs(&r.solution.w_u),
            w_m: pairs(&r.solution.w_m),
            evaluated: r.evaluated,
            feasible: r.feasible,
        }
    }
}

/// Orthonormal basis of `span{a, b}` completed to the whole space (`n <= 2`).
fn span_basis(a: &CVector, b: &CVector) -> Vec<CVector> {
    let n = a.len();
    let mut basis: Vec<CVector> = Vec::new();
    let candidates = [a.clone(), b.clone()].into_iter().chain((0..n).map(|i| crate::linalg::basis(n, i)));
    for mut v in candidates {
        for e in &basis {
            let c = e.dotc(&v);
            v -= e * c;
        }
        let norm = v.norm();
        if norm > 1e-9 * (1.0 + a.norm() + b.norm()) {
            basis.push(v.unscale(norm));
        }
        if basis.len() == n {
            break;
        }
    }
    basis
}

fn direction_grid(spec: &OracleSpec, basis: &[CVector]) -> Vec<CVector> {
    if basis.len() == 1 {
        return vec![basis[0].clone()];
    }
    let mut out = Vec::with_capacity(spec.polar_levels * spec.azimuth_levels);
    for i in 0..spec.polar_levels {
        let a = FRAC_PI_2 * i as f64 / (spec.polar_levels - 1) as f64;
        for j in 0..spec.azimuth_levels {
            let b = TAU * j as f64 / spec.azimuth_levels as f64;
            out.push(&basis[0] * C64::new(a.cos(), 0.0) + &basis[1] * C64::from_polar(a.sin(), b));
        }
    }
    out
}

pub fn brute_force_oracle(
    config: &SystemConfig,
    channels: &ChannelSet,
    spec: &OracleSpec,
) -> Result<OracleResult, ExperimentError> {
    config.validate()?;
    channels.validate_against(config)?;
    let n = channels.n_antennas();
    let k = channels.n_elements();
    spec.validate(n, k)?;

    let gb = config.gamma_bar();
    let powers: Vec<f64> = (0..spec.power_levels).map(|i| i as f64 / (spec.power_levels - 1) as f64).collect();
    let levels: Vec<f64> = (0..spec.phase_levels).map(|i| TAU * (i + 1) as f64 / spec.phase_levels as f64).collect();

    let mut best: Option<(f64, BeamformingSolution)> = None;
    let mut evaluated = 0u64;
    let mut feasible = 0u64;
    let combos = spec.phase_levels.pow(k as u32);
    for combo in 0..combos {
        let mut rest = combo;
        let phases: Vec<f64> = (0..k)
            .map(|_| {
                let t = levels[rest % spec.phase_levels];
                rest /= spec.phase_levels;
                t
            })
            .collect();
        let reflect = ReflectVector::from_phases(phases);
        let h_nu = model::effective_channel(channels, &reflect, User::Near)?;
        let h_fu = model::effective_channel(channels, &reflect, User::Far)?;
        let dirs = direction_grid(spec, &span_basis(&h_nu, &h_fu));
        let gain_nu: Vec<f64> = dirs.iter().map(|d| h_nu.dotc(d).norm_sqr() * config.p_max).collect();
        let gain_fu: Vec<f64> = dirs.iter().map(|d| h_fu.dotc(d).norm_sqr() * config.p_max).collect();

        for iu in 0..dirs.len() {
            for im in 0..dirs.len() {
                for &p in &powers {
                    evaluated += 1;
                    let nu_u = p * gain_nu[iu];
                    let fu_u = p * gain_fu[iu];
                    let nu_m = (1.0 - p) * gain_nu[im];
                    let fu_m = (1.0 - p) * gain_fu[im];
                    if nu_m < gb * (nu_u + config.sigma2_nu)
                        || fu_m < gb * (fu_u + config.sigma2_fu)
                        || fu_u + fu_m < config.gamma
                    {
                        continue;
                    }
                    feasible += 1;
                    let rate = (1.0 + nu_u / (config.zeta * nu_m + config.sigma2_nu)).log2();
                    if best.as_ref().is_none_or(|(b, _)| rate > *b) {
                        let sol = BeamformingSolution {
                            w_u: &dirs[iu] * C64::new((p * config.p_max).sqrt(), 0.0),
                            w_m: &dirs[im] * C64::new(((1.0 - p) * config.p_max).sqrt(), 0.0),
                            reflect: reflect.clone(),
                        };
                        best = Some((rate, sol));
                    }
                }
            }
        }
    }
    match best {
        Some((best_rate, solution)) => Ok(OracleResult { best_rate, solution, evaluated, feasible }),
        None => Err(ExperimentError::OracleInfeasible { evaluated }),
    }
}
