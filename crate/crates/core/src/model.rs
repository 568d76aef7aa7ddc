//! Scenario types and the closed-form physical-layer quantities.
//!
//! All rates are in bits/s/Hz. Powers are in watts unless a name says
//! otherwise. The received amplitude of beamformer `w` at a user is
//! `h^H w` with `h` the user's effective channel (a column vector):
//!
//! ```text
//! h^H = h_I^H diag(v) G + h_B^H,   v_k = exp(j theta_k)
//! ```

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

use crate::linalg::{self, CMatrix, CVector, C64};

/// Unit-modulus tolerance for reflection coefficients.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;
/// Hermitian / PSD tolerance for covariances.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Default feasibility tolerance for residual checks.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    Dimension { what: &'static str, expected: usize, actual: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
}

/// Converts dBm to watts: `P[W] = 10^((dBm - 30)/10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Planar node positions in meters. The near and far users sit on the
/// x-axis through the base station at their configured distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub bs: [f64; 2],
    pub irs: [f64; 2],
}

impl Default for Geometry {
    fn default() -> Self {
        Self { bs: [0.0, 0.0], irs: [50.0, 10.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Base-station antennas `N`.
    pub n_antennas: usize,
    /// IRS elements `K`; zero means no IRS.
    pub n_elements: usize,
    pub p_max: f64,
    pub sigma2_nu: f64,
    pub sigma2_fu: f64,
    /// Residual SIC factor in `[0, 1)`; zero is perfect SIC.
    pub zeta: f64,
    /// Minimum multicast rate `R_m`.
    pub r_m: f64,
    /// Minimum target illumination power `Gamma` in watts.
    pub gamma: f64,
    pub d_nu: f64,
    pub d_fu: f64,
    pub path_loss_ref_db: f64,
    pub rician_k_db: f64,
    pub geometry: Geometry,
    pub seed: u64,
}

impl Default for SystemConfig {
    /// N = 20 antennas, K = 14 elements, 10 dBm budget, -100 dBm noise,
    /// L0 = 40 dB, 100 m / 1000 m users, illumination threshold 1e-2 of the
    /// far-user noise power.
    fn default() -> Self {
        let noise = dbm_to_watts(-100.0);
        Self {
            n_antennas: 20,
            n_elements: 14,
            p_max: dbm_to_watts(10.0),
            sigma2_nu: noise,
            sigma2_fu: noise,
            zeta: 0.05,
            r_m: 1.0,
            gamma: 1e-2 * noise,
            d_nu: 100.0,
            d_fu: 1000.0,
            path_loss_ref_db: 40.0,
            rician_k_db: 10.0,
            geometry: Geometry::default(),
            seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if self.n_antennas == 0 {
            return bad("n_antennas must be >= 1");
        }
        if !(0.0..1.0).contains(&self.zeta) {
            return bad("zeta must lie in [0, 1)");
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return bad("p_max must be positive");
        }
        if !(self.sigma2_nu > 0.0 && self.sigma2_fu > 0.0) {
            return bad("noise powers must be positive");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be >= 0");
        }
        if !(self.r_m >= 0.0 && self.r_m.is_finite()) {
            return bad("r_m must be >= 0");
        }
        if !(self.d_nu > 0.0 && self.d_fu > 0.0) {
            return bad("user distances must be positive");
        }
        Ok(())
    }

    /// SINR threshold `2^{R_m} - 1` equivalent to the multicast rate floor.
    pub fn gamma_bar(&self) -> f64 {
        2f64.powf(self.r_m) - 1.0
    }

    pub fn nu_position(&self) -> [f64; 2] {
        [self.geometry.bs[0] + self.d_nu, self.geometry.bs[1]]
    }

    pub fn fu_position(&self) -> [f64; 2] {
        [self.geometry.bs[0] + self.d_fu, self.geometry.bs[1]]
    }

    /// Same scenario with the IRS removed.
    pub fn without_irs(&self) -> Self {
        Self { n_elements: 0, ..self.clone() }
    }
}

/// The five links: BS-IRS `G` (K x N), BS-NU, BS-FU (length N), IRS-NU and
/// IRS-FU (length K).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub g_bs_irs: CMatrix,
    pub h_bs_nu: CVector,
    pub h_bs_fu: CVector,
    pub h_irs_nu: CVector,
    pub h_irs_fu: CVector,
}

impl ChannelSet {
    pub fn n_antennas(&self) -> usize {
        self.h_bs_nu.len()
    }

    pub fn n_elements(&self) -> usize {
        self.h_irs_nu.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n_antennas();
        let k = self.n_elements();
        check_len("h_bs_fu", n, self.h_bs_fu.len())?;
        check_len("h_irs_fu", k, self.h_irs_fu.len())?;
        check_len("g_bs_irs rows", k, self.g_bs_irs.nrows())?;
        if k > 0 {
            check_len("g_bs_irs cols", n, self.g_bs_irs.ncols())?;
        }
        let fields: [(&'static str, bool); 5] = [
            ("g_bs_irs", linalg::all_finite(self.g_bs_irs.iter().copied())),
            ("h_bs_nu", linalg::all_finite(self.h_bs_nu.iter().copied())),
            ("h_bs_fu", linalg::all_finite(self.h_bs_fu.iter().copied())),
            ("h_irs_nu", linalg::all_finite(self.h_irs_nu.iter().copied())),
            ("h_irs_fu", linalg::all_finite(self.h_irs_fu.iter().copied())),
        ];
        for (name, ok) in fields {
            if !ok {
                return Err(ModelError::NonFinite(name));
            }
        }
        Ok(())
    }

    pub fn validate_against(&self, config: &SystemConfig) -> Result<(), ModelError> {
        check_len("channel antennas", config.n_antennas, self.n_antennas())?;
        check_len("channel elements", config.n_elements, self.n_elements())?;
        self.validate()
    }

    /// Every link multiplied by `factor`, except the IRS-user links, so the
    /// effective channel scales by `factor` as well.
    pub fn scaled(&self, factor: f64) -> Self {
        let f = C64::new(factor, 0.0);
        Self {
            g_bs_irs: &self.g_bs_irs * f,
            h_bs_nu: &self.h_bs_nu * f,
            h_bs_fu: &self.h_bs_fu * f,
            h_irs_nu: self.h_irs_nu.clone(),
            h_irs_fu: self.h_irs_fu.clone(),
        }
    }

    /// The direct links only (the no-IRS view of the same realization).
    pub fn direct_only(&self) -> Self {
        Self {
            g_bs_irs: CMatrix::zeros(0, self.n_antennas()),
            h_bs_nu: self.h_bs_nu.clone(),
            h_bs_fu: self.h_bs_fu.clone(),
            h_irs_nu: CVector::zeros(0),
            h_irs_fu: CVector::zeros(0),
        }
    }
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<(), ModelError> {
    if expected == actual {
        Ok(())
    } else {
        Err(ModelError::Dimension { what, expected, actual })
    }
}

/// IRS phases `theta_k`, kept in `(0, 2*pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectVector {
    phases: Vec<f64>,
}

impl ReflectVector {
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        Self { phases: phases.into_iter().map(wrap_phase).collect() }
    }

    /// Projects each coefficient onto the unit circle. Zero entries map to
    /// phase `2*pi`.
    pub fn from_coefficients(coefficients: &CVector) -> Self {
        Self::from_phases(coefficients.iter().map(|z| if z.norm() > 0.0 { z.arg() } else { 0.0 }))
    }

    /// All phases equal to `2*pi` (identity reflection).
    pub fn identity(k: usize) -> Self {
        Self::from_phases(std::iter::repeat_n(0.0, k))
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `v_k = exp(j theta_k)`.
    pub fn coefficients(&self) -> CVector {
        CVector::from_iterator(self.phases.len(), self.phases.iter().map(|&t| C64::from_polar(1.0, t)))
    }

    /// Lifted vector `[conj(v); 1]` for which `|h^H w|^2 = vbar^H R vbar`.
    pub fn lifted(&self) -> CVector {
        let k = self.len();
        CVector::from_iterator(
            k + 1,
            self.phases.iter().map(|&t| C64::from_polar(1.0, -t)).chain(std::iter::once(linalg::real(1.0))),
        )
    }

    pub fn unit_modulus_deviation(&self) -> f64 {
        self.coefficients().iter().fold(0.0_f64, |m, z| m.max((z.norm() - 1.0).abs()))
    }
}

fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t <= 0.0 {
        TAU
    } else {
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub w_u: CVector,
    pub w_m: CVector,
    pub reflect: ReflectVector,
}

impl BeamformingSolution {
    /// `R = w_u w_u^H + w_m w_m^H`.
    pub fn covariance(&self) -> CMatrix {
        linalg::outer(&self.w_u, &self.w_u) + linalg::outer(&self.w_m, &self.w_m)
    }

    pub fn transmit_power(&self) -> f64 {
        self.w_u.norm_squared() + self.w_m.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    Near,
    Far,
}

/// Column vector `h` with `h^H = h_I^H diag(v) G + h_B^H` for the user.
pub fn effective_channel(channels: &ChannelSet, reflect: &ReflectVector, user: User) -> Result<CVector, ModelError> {
    channels.validate()?;
    check_len("reflect vector", channels.n_elements(), reflect.len())?;
    let (h_irs, h_bs) = match user {
        User::Near => (&channels.h_irs_nu, &channels.h_bs_nu),
        User::Far => (&channels.h_irs_fu, &channels.h_bs_fu),
    };
    if channels.n_elements() == 0 {
        return Ok(h_bs.clone());
    }
    // h = G^H diag(h_I) conj(v) + h_B
    let weights = CVector::from_iterator(
        reflect.len(),
        h_irs.iter().zip(reflect.phases()).map(|(h, &t)| h * C64::from_polar(1.0, -t)),
    );
    Ok(channels.g_bs_irs.adjoint() * weights + h_bs)
}

/// `|h_i^H w_j|^2` for both users and both beamformers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub nu_u: f64,
    pub nu_m: f64,
    pub fu_u: f64,
    pub fu_m: f64,
}

impl LinkGains {
    pub fn from_effective(h_nu: &CVector, h_fu: &CVector, w_u: &CVector, w_m: &CVector) -> Self {
        Self {
            nu_u: h_nu.dotc(w_u).norm_sqr(),
            nu_m: h_nu.dotc(w_m).norm_sqr(),
            fu_u: h_fu.dotc(w_u).norm_sqr(),
            fu_m: h_fu.dotc(w_m).norm_sqr(),
        }
    }

    pub fn unicast_sinr(&self, zeta: f64, sigma2_nu: f64) -> f64 {
        self.nu_u / (zeta * self.nu_m + sigma2_nu)
    }

    pub fn multicast_sinr_nu(&self, sigma2_nu: f64) -> f64 {
        self.nu_m / (self.nu_u + sigma2_nu)
    }

    pub fn multicast_sinr_fu(&self, sigma2_fu: f64) -> f64 {
        self.fu_m / (self.fu_u + sigma2_fu)
    }

    pub fn illumination(&self) -> f64 {
        self.fu_u + self.fu_m
    }
}

pub fn link_gains(
    channels: &ChannelSet,
    reflect: &ReflectVector,
    w_u: &CVector,
    w_m: &CVector,
) -> Result<LinkGains, ModelError> {
    let n = channels.n_antennas();
    check_len("w_u", n, w_u.len())?;
    check_len("w_m", n, w_m.len())?;
    let h_nu = effective_channel(channels, reflect, User::Near)?;
    let h_fu = effective_channel(channels, reflect, User::Far)?;
    Ok(LinkGains::from_effective(&h_nu, &h_fu, w_u, w_m))
}

fn rate(sinr: f64) -> f64 {
    (1.0 + sinr.max(0.0)).log2()
}

/// Unicast rate at the near user after (imperfect) SIC of the multicast
/// stream: `log2(1 + |h_n^H w_u|^2 / (zeta |h_n^H w_m|^2 + sigma_n^2))`.
pub fn unicast_rate(
    channels: &ChannelSet,
    reflect: &ReflectVector,
    w_u: &CVector,
    w_m: &CVector,
    zeta: f64,
    sigma2_nu: f64,
) -> Result<f64, ModelError> {
    Ok(rate(link_gains(channels, reflect, w_u, w_m)?.unicast_sinr(zeta, sigma2_nu)))
}

/// Multicast rate at the near user, unicast treated as interference.
pub fn multicast_rate_nu(
    channels: &ChannelSet,
    reflect: &ReflectVector,
    w_u: &CVector,
    w_m: &CVector,
    sigma2_nu: f64,
) -> Result<f64, ModelError> {
    Ok(rate(link_gains(channels, reflect, w_u, w_m)?.multicast_sinr_nu(sigma2_nu)))
}

pub fn multicast_rate_fu(
    channels: &ChannelSet,
    reflect: &ReflectVector,
    w_u: &CVector,
    w_m: &CVector,
    sigma2_fu: f64,
) -> Result<f64, ModelError> {
    Ok(rate(link_gains(channels, reflect, w_u, w_m)?.multicast_sinr_fu(sigma2_fu)))
}

/// The multicast stream is decodable at the weaker of the two users.
pub fn multicast_rate(r_nu: f64, r_fu: f64) -> f64 {
    r_nu.min(r_fu)
}

/// Target illumination power `h_f^H R h_f`, evaluated through the rank-2
/// expansion `|h_f^H w_u|^2 + |h_f^H w_m|^2`.
pub fn illumination_power(
    channels: &ChannelSet,
    reflect: &ReflectVector,
    w_u: &CVector,
    w_m: &CVector,
) -> Result<f64, ModelError> {
    Ok(link_gains(channels, reflect, w_u, w_m)?.illumination())
}

/// Same quantity through the covariance: `Tr(R h_f h_f^H)`.
pub fn illumination_power_trace(
    channels: &ChannelSet,
    reflect: &ReflectVector,
    w_u: &CVector,
    w_m: &CVector,
) -> Result<f64, ModelError> {
    let h_fu = effective_channel(channels, reflect, User::Far)?;
    check_len("w_u", h_fu.len(), w_u.len())?;
    check_len("w_m", h_fu.len(), w_m.len())?;
    let cov = linalg::outer(w_u, w_u) + linalg::outer(w_m, w_m);
    Ok(linalg::trace_product(&cov, &linalg::outer(&h_fu, &h_fu)).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub r_unicast: f64,
    pub r_multicast_nu: f64,
    pub r_multicast_fu: f64,
    pub r_multicast: f64,
    /// Watts.
    pub illumination: f64,
}

impl RateBreakdown {
    pub fn from_gains(gains: &LinkGains, config: &SystemConfig) -> Self {
        let r_nu = rate(gains.multicast_sinr_nu(config.sigma2_nu));
        let r_fu = rate(gains.multicast_sinr_fu(config.sigma2_fu));
        Self {
            r_unicast: rate(gains.unicast_sinr(config.zeta, config.sigma2_nu)),
            r_multicast_nu: r_nu,
            r_multicast_fu: r_fu,
            r_multicast: multicast_rate(r_nu, r_fu),
            illumination: gains.illumination(),
        }
    }
}

pub fn rate_breakdown(
    config: &SystemConfig,
    channels: &ChannelSet,
    solution: &BeamformingSolution,
) -> Result<RateBreakdown, ModelError> {
    let gains = link_gains(channels, &solution.reflect, &solution.w_u, &solution.w_m)?;
    Ok(RateBreakdown::from_gains(&gains, config))
}

/// Signed constraint residuals; a constraint holds when its residual is
/// non-negative.
///
/// Residuals are dimensionless: the rate residual is in bits/s/Hz, the
/// power residual is relative to `p_max`, the illumination residual is in
/// units of the far-user noise power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `R_n - R_m`.
    pub multicast_rate: f64,
    /// `(P_max - Tr R) / P_max`.
    pub transmit_power: f64,
    /// `(P(theta) - Gamma) / sigma_f^2`.
    pub illumination: f64,
    /// `-max_k ||v_k| - 1|`.
    pub unit_modulus: f64,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn worst(&self) -> f64 {
        self.multicast_rate.min(self.transmit_power).min(self.illumination).min(self.unit_modulus)
    }
}

pub fn check_feasibility(
    config: &SystemConfig,
    channels: &ChannelSet,
    solution: &BeamformingSolution,
    tolerance: f64,
) -> Result<FeasibilityReport, ModelError> {
    let rates = rate_breakdown(config, channels, solution)?;
    let mut report = FeasibilityReport {
        multicast_rate: rates.r_multicast - config.r_m,
        transmit_power: (config.p_max - solution.transmit_power()) / config.p_max,
        illumination: (rates.illumination - config.gamma) / config.sigma2_fu,
        unit_modulus: -solution.reflect.unit_modulus_deviation(),
        feasible: false,
    };
    report.feasible = report.worst() >= -tolerance;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis, cvec};
    use std::f64::consts::PI;

    fn no_irs(h_nu: CVector, h_fu: CVector) -> ChannelSet {
        let n = h_nu.len();
        ChannelSet {
            g_bs_irs: CMatrix::zeros(0, n),
            h_bs_nu: h_nu,
            h_bs_fu: h_fu,
            h_irs_nu: CVector::zeros(0),
            h_irs_fu: CVector::zeros(0),
        }
    }

    #[test]
    fn effective_channel_without_irs_is_direct_link() {
        let h = cvec(&[(1.0, 2.0), (-0.5, 0.25)]);
        let ch = no_irs(h.clone(), h.clone());
        let eff = effective_channel(&ch, &ReflectVector::identity(0), User::Near).unwrap();
        assert_eq!(eff, h);
    }

    #[test]
    fn effective_channel_one_by_one() {
        // h^H = h_I^H e^{j theta} G + h_B^H = e^{j pi/2} = j
        let ch = ChannelSet {
            g_bs_irs: CMatrix::from_element(1, 1, linalg::real(1.0)),
            h_bs_nu: CVector::zeros(1),
            h_bs_fu: CVector::zeros(1),
            h_irs_nu: cvec(&[(1.0, 0.0)]),
            h_irs_fu: cvec(&[(1.0, 0.0)]),
        };
        let v = ReflectVector::from_phases([PI / 2.0]);
        let h = effective_channel(&ch, &v, User::Near).unwrap();
        let response = h.dotc(&cvec(&[(1.0, 0.0)]));
        assert!((response.norm() - 1.0).abs() < 1e-15);
        assert!((response - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((h[0] - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn effective_channel_zero_channels() {
        let ch = ChannelSet {
            g_bs_irs: CMatrix::zeros(3, 2),
            h_bs_nu: CVector::zeros(2),
            h_bs_fu: CVector::zeros(2),
            h_irs_nu: CVector::zeros(3),
            h_irs_fu: CVector::zeros(3),
        };
        let v = ReflectVector::from_phases([0.3, 1.0, 2.0]);
        assert_eq!(effective_channel(&ch, &v, User::Far).unwrap(), CVector::zeros(2));
    }

    #[test]
    fn effective_channel_dimension_mismatch() {
        let ch = no_irs(CVector::zeros(2), CVector::zeros(2));
        let err = effective_channel(&ch, &ReflectVector::identity(1), User::Near).unwrap_err();
        assert!(matches!(err, ModelError::Dimension { .. }));
        let err = unicast_rate(&ch, &ReflectVector::identity(0), &CVector::zeros(3), &CVector::zeros(2), 0.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, ModelError::Dimension { .. }));
    }

    #[test]
    fn unicast_rate_examples() {
        let e1 = basis(2, 0);
        let ch = no_irs(e1.clone(), e1.clone());
        let none = ReflectVector::identity(0);
        let zero = CVector::zeros(2);
        assert_eq!(unicast_rate(&ch, &none, &zero, &e1, 0.3, 1.0).unwrap(), 0.0);

        let p = 7.0_f64;
        let w_u = &e1 * linalg::real(p.sqrt());
        let r = unicast_rate(&ch, &none, &w_u, &zero, 0.0, 1.0).unwrap();
        assert!((r - (1.0 + p).log2()).abs() < 1e-14);

        // h^H w_u = 2, h^H w_m = 2, zeta = 0.5 -> log2(1 + 4/3)
        let w = &e1 * linalg::real(2.0);
        let r = unicast_rate(&ch, &none, &w, &w, 0.5, 1.0).unwrap();
        assert!((r - (1.0 + 4.0 / 3.0_f64).log2()).abs() < 1e-14);
    }

    #[test]
    fn multicast_rate_examples() {
        let e1 = basis(1, 0);
        let ch = no_irs(e1.clone(), e1.clone() * linalg::real(0.5));
        let none = ReflectVector::identity(0);
        let zero = CVector::zeros(1);
        assert_eq!(multicast_rate_nu(&ch, &none, &e1, &zero, 1.0).unwrap(), 0.0);
        assert_eq!(multicast_rate_fu(&ch, &none, &e1, &zero, 1.0).unwrap(), 0.0);
        // |h^H w_m|^2 = sigma^2, w_u = 0 -> 1 bit
        assert!((multicast_rate_nu(&ch, &none, &zero, &e1, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((multicast_rate_fu(&ch, &none, &zero, &e1, 0.25).unwrap() - 1.0).abs() < 1e-15);
        // swapping w_u and w_m swaps numerator and denominator
        let a = e1.clone() * linalg::real(3.0);
        let b = e1.clone() * linalg::real(2.0);
        let r_ab = multicast_rate_nu(&ch, &none, &a, &b, 1.0).unwrap();
        let r_ba = multicast_rate_nu(&ch, &none, &b, &a, 1.0).unwrap();
        assert!((r_ab - (1.0 + 4.0 / 10.0_f64).log2()).abs() < 1e-14);
        assert!((r_ba - (1.0 + 9.0 / 5.0_f64).log2()).abs() < 1e-14);
        let f_ab = multicast_rate_fu(&ch, &none, &a, &b, 1.0).unwrap();
        assert!((f_ab - (1.0 + 1.0 / (2.25 + 1.0_f64)).log2()).abs() < 1e-14);

        assert_eq!(multicast_rate(3.0, 2.0), 2.0);
        assert_eq!(multicast_rate(2.0, 2.0), 2.0);
        assert_eq!(multicast_rate(0.0, 5.0), 0.0);
    }

    #[test]
    fn illumination_examples() {
        let e1 = basis(3, 0);
        let ch = no_irs(e1.clone(), e1.clone());
        let none = ReflectVector::identity(0);
        let zero = CVector::zeros(3);
        assert_eq!(illumination_power(&ch, &none, &zero, &zero).unwrap(), 0.0);
        assert!((illumination_power(&ch, &none, &zero, &e1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn feasibility_examples() {
        let cfg = SystemConfig { n_antennas: 2, n_elements: 0, r_m: 1.0, ..SystemConfig::default() };
        let ch = no_irs(cvec(&[(1e-5, 0.0), (0.0, 1e-5)]), cvec(&[(1e-5, 0.0), (1e-5, 0.0)]));
        let zero =
            BeamformingSolution { w_u: CVector::zeros(2), w_m: CVector::zeros(2), reflect: ReflectVector::identity(0) };
        let rep = check_feasibility(&cfg, &ch, &zero, FEASIBILITY_TOL).unwrap();
        assert!(!rep.feasible);
        assert!(rep.multicast_rate < 0.0);

        let half = linalg::real((cfg.p_max / 2.0).sqrt());
        let full = BeamformingSolution {
            w_u: basis(2, 0) * half,
            w_m: basis(2, 1) * half,
            reflect: ReflectVector::identity(0),
        };
        let rep = check_feasibility(&cfg, &ch, &full, FEASIBILITY_TOL).unwrap();
        assert!(rep.transmit_power.abs() < 1e-15);
    }

    #[test]
    fn default_config_values() {
        let cfg = SystemConfig::default();
        assert_eq!((cfg.n_antennas, cfg.n_elements), (20, 14));
        assert!((cfg.p_max - 0.01).abs() < 1e-15);
        assert!((cfg.sigma2_nu - 1e-13).abs() < 1e-25);
        assert!((cfg.gamma_bar() - 1.0).abs() < 1e-15);
        cfg.validate().unwrap();
        assert!(SystemConfig { zeta: 1.0, ..cfg.clone() }.validate().is_err());
        assert!(SystemConfig { n_antennas: 0, ..cfg }.validate().is_err());
    }

    #[test]
    fn reflect_phases_wrap_into_half_open_interval() {
        let v = ReflectVector::from_phases([0.0, -PI / 2.0, 5.0 * PI]);
        let p = v.phases();
        assert!((p[0] - TAU).abs() < 1e-15);
        assert!((p[1] - 1.5 * PI).abs() < 1e-12);
        assert!((p[2] - PI).abs() < 1e-12);
        assert!(v.unit_modulus_deviation() < UNIT_MODULUS_TOL);
    }
}
