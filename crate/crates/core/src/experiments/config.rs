//! TOML run configuration.
//!
//! ```toml
//! [system]
//! n_antennas = 20
//! n_elements = 14
//! p_max_dbm = 10.0          # or p_max_w
//! noise_dbm = -100.0        # or noise_w; sets both users
//! zeta = 0.05
//! r_m = 1.0
//! gamma_over_noise = 0.01   # or gamma_w
//! seed = 1
//!
//! [channel]
//! irs_exponent = 2.0
//!
//! [solver]
//! epsilon1 = 1e-4
//! [solver.srocr]
//! rank_threshold = 0.99
//!
//! [experiment]
//! axis = "p_max_dbm"
//! values = [0.0, 10.0, 20.0]
//! schemes = ["irs_noma", "no_irs_noma"]
//! trials = 10
//!
//! [trace]
//! r_m_values = [0.5, 1.0, 2.0]
//! seeds = [1]
//!
//! [oracle]
//! phase_levels = 16
//! ```
//!
//! Every section and key is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::DEFAULT_IRS_EXPONENT;
use crate::model::{dbm_to_watts, Geometry, SystemConfig};
use crate::optimizer::DinkelbachConfig;

use super::{ExperimentError, ExperimentSpec, OracleSpec, TraceSpec};

/// Default illumination threshold relative to the far-user noise power.
pub const DEFAULT_GAMMA_OVER_NOISE: f64 = 1e-2;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub n_antennas: Option<usize>,
    pub n_elements: Option<usize>,
    pub p_max_dbm: Option<f64>,
    pub p_max_w: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub noise_w: Option<f64>,
    pub zeta: Option<f64>,
    pub r_m: Option<f64>,
    pub gamma_w: Option<f64>,
    pub gamma_over_noise: Option<f64>,
    pub d_nu: Option<f64>,
    pub d_fu: Option<f64>,
    pub path_loss_ref_db: Option<f64>,
    pub rician_k_db: Option<f64>,
    pub bs_position: Option<[f64; 2]>,
    pub irs_position: Option<[f64; 2]>,
    pub seed: Option<u64>,
}

fn exclusive<T>(a: Option<T>, b: Option<T>, what: &str) -> Result<Option<T>, ExperimentError> {
    match (a, b) {
        (Some(_), Some(_)) => Err(ExperimentError::Parse(format!("give at most one of {what}"))),
        (a, b) => Ok(a.or(b)),
    }
}

impl SystemSection {
    pub fn to_config(&self) -> Result<SystemConfig, ExperimentError> {
        let d = SystemConfig::default();
        let p_max =
            exclusive(self.p_max_dbm.map(dbm_to_watts), self.p_max_w, "p_max_dbm / p_max_w")?.unwrap_or(d.p_max);
        let noise =
            exclusive(self.noise_dbm.map(dbm_to_watts), self.noise_w, "noise_dbm / noise_w")?.unwrap_or(d.sigma2_nu);
        let gamma = exclusive(self.gamma_w, self.gamma_over_noise.map(|g| g * noise), "gamma_w / gamma_over_noise")?
            .unwrap_or(DEFAULT_GAMMA_OVER_NOISE * noise);
        let config = SystemConfig {
            n_antennas: self.n_antennas.unwrap_or(d.n_antennas),
            n_elements: self.n_elements.unwrap_or(d.n_elements),
            p_max,
            sigma2_nu: noise,
            sigma2_fu: noise,
            zeta: self.zeta.unwrap_or(d.zeta),
            r_m: self.r_m.unwrap_or(d.r_m),
            gamma,
            d_nu: self.d_nu.unwrap_or(d.d_nu),
            d_fu: self.d_fu.unwrap_or(d.d_fu),
            path_loss_ref_db: self.path_loss_ref_db.unwrap_or(d.path_loss_ref_db),
            rician_k_db: self.rician_k_db.unwrap_or(d.rician_k_db),
            geometry: Geometry {
                bs: self.bs_position.unwrap_or(d.geometry.bs),
                irs: self.irs_position.unwrap_or(d.geometry.irs),
            },
            seed: self.seed.unwrap_or(d.seed),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    /// Path-loss exponent of the three IRS links.
    pub irs_exponent: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { irs_exponent: DEFAULT_IRS_EXPONENT }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub channel: ChannelSection,
    pub solver: DinkelbachConfig,
    pub experiment: ExperimentSpec,
    pub trace: TraceSpec,
    pub oracle: OracleSpec,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        cfg.system_config()?;
        cfg.solver.validate()?;
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn system_config(&self) -> Result<SystemConfig, ExperimentError> {
        self.system.to_config()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SweepAxis;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg.system_config().unwrap(), SystemConfig::default());
        assert_eq!(cfg.solver, DinkelbachConfig::default());
    }

    #[test]
    fn units_and_sections() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [system]
            p_max_w = 0.5
            noise_dbm = -90.0
            gamma_over_noise = 3.0
            zeta = 0.1
            [solver]
            max_outer = 7
            [solver.srocr]
            rank_threshold = 0.95
            [experiment]
            axis = "zeta"
            values = [0.0, 0.1]
            trials = 2
            "#,
        )
        .unwrap();
        let sys = cfg.system_config().unwrap();
        assert_eq!(sys.p_max, 0.5);
        assert!((sys.sigma2_fu - 1e-12).abs() < 1e-24);
        assert!((sys.gamma - 3e-12).abs() < 1e-24);
        assert_eq!(cfg.solver.max_outer, 7);
        assert_eq!(cfg.solver.srocr.rank_threshold, 0.95);
        assert_eq!(cfg.experiment.axis, SweepAxis::Zeta);
    }

    #[test]
    fn conflicting_units_rejected() {
        assert!(RunConfig::from_toml_str("[system]\np_max_dbm = 10.0\np_max_w = 0.01\n").is_err());
        assert!(RunConfig::from_toml_str("[system]\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml_str("[system]\nzeta = 1.5\n").is_err());
    }
}
