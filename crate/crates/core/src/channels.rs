//! Seeded channel generation and channel files.
//!
//! Every link is `sqrt(beta) * H` with log-distance gain
//! `beta = 10^(-(L0 + 10 alpha log10 d)/10)` and small-scale part `H`:
//!
//! - Rayleigh: i.i.d. `CN(0, 1)` entries.
//! - Rician with factor `Kf`: `sqrt(Kf/(Kf+1)) * LoS + sqrt(1/(Kf+1)) * CN(0, 1)`.
//! - LoS: the steering term alone.
//!
//! Arrays are uniform linear arrays with half-wavelength spacing laid out
//! along the y-axis; departure and arrival angles come from node positions.
//!
//! Random numbers come from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded
//! with the run seed. Each link draws from its own stream (`set_stream` with
//! a fixed link id), so a link's realization does not depend on which other
//! links exist. In particular the direct links of a `K = 0` scenario are
//! identical to those of the same seed with an IRS.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use thiserror::Error;

use crate::linalg::{CMatrix, CVector, C64};
use crate::model::{ChannelSet, ModelError, SystemConfig};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid channel model: {0}")]
    InvalidSpec(String),
    #[error("channel file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("channel file format: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkKind {
    Rayleigh,
    /// Linear K-factor.
    Rician {
        k_factor: f64,
    },
    Los,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub kind: LinkKind,
    /// Path-loss exponent `alpha`.
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModelSpec {
    pub bs_irs: LinkModel,
    pub bs_nu: LinkModel,
    pub bs_fu: LinkModel,
    pub irs_nu: LinkModel,
    pub irs_fu: LinkModel,
}

pub const DEFAULT_IRS_EXPONENT: f64 = 2.0;

impl ChannelModelSpec {
    /// Rayleigh BS-NU with exponent 3, Rician everywhere else, exponent 2 on
    /// BS-FU and `irs_exponent` on the IRS links. The K-factor comes from
    /// `config.rician_k_db`.
    pub fn from_config(config: &SystemConfig, irs_exponent: f64) -> Self {
        let rician = LinkKind::Rician { k_factor: 10f64.powf(config.rician_k_db / 10.0) };
        let irs = LinkModel { kind: rician, exponent: irs_exponent };
        Self {
            bs_irs: irs,
            bs_nu: LinkModel { kind: LinkKind::Rayleigh, exponent: 3.0 },
            bs_fu: LinkModel { kind: rician, exponent: 2.0 },
            irs_nu: irs,
            irs_fu: irs,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        for link in [self.bs_irs, self.bs_nu, self.bs_fu, self.irs_nu, self.irs_fu] {
            if !(link.exponent > 0.0 && link.exponent.is_finite()) {
                return Err(ChannelError::InvalidSpec("path-loss exponents must be positive".into()));
            }
            if let LinkKind::Rician { k_factor } = link.kind {
                if !(k_factor >= 0.0) {
                    return Err(ChannelError::InvalidSpec("Rician K-factor must be >= 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// Link ids used as ChaCha stream numbers.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum LinkId {
    BsIrs = 1,
    BsNu = 2,
    BsFu = 3,
    IrsNu = 4,
    IrsFu = 5,
}

/// ULA steering vector, entry `i` equal to `exp(j pi i sin(angle))`.
pub fn los_steering(n: usize, angle: f64) -> CVector {
    let phase = PI * angle.sin();
    CVector::from_iterator(n, (0..n).map(|i| C64::from_polar(1.0, phase * i as f64)))
}

pub fn path_loss_db(reference_db: f64, exponent: f64, distance: f64) -> f64 {
    reference_db + 10.0 * exponent * distance.log10()
}

/// Linear power gain `10^(-L/10)`.
pub fn path_gain(reference_db: f64, exponent: f64, distance: f64) -> f64 {
    10f64.powf(-path_loss_db(reference_db, exponent, distance) / 10.0)
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Angle of `to` seen from `from`, measured from the array broadside (x-axis).
fn angle(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

fn link_rng(seed: u64, link: LinkId) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(link as u64);
    rng
}

fn cn01(rng: &mut ChaCha20Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draws a `rows x cols` link. `los` is the deterministic steering matrix
/// (unit-modulus entries); entries are drawn in row-major order.
fn draw_link(model: &LinkModel, los: &CMatrix, gain: f64, rng: &mut ChaCha20Rng) -> CMatrix {
    let (rows, cols) = los.shape();
    let (w_los, w_nlos) = match model.kind {
        LinkKind::Rayleigh => (0.0, 1.0),
        LinkKind::Los => (1.0, 0.0),
        LinkKind::Rician { k_factor } => ((k_factor / (k_factor + 1.0)).sqrt(), (1.0 / (k_factor + 1.0)).sqrt()),
    };
    let amp = gain.sqrt();
    let mut out = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let scatter = if w_nlos > 0.0 { cn01(rng) } else { C64::new(0.0, 0.0) };
            out[(r, c)] = (los[(r, c)] * w_los + scatter * w_nlos) * amp;
        }
    }
    out
}

fn column(v: CVector) -> CMatrix {
    let n = v.len();
    CMatrix::from_iterator(n, 1, v.iter().copied())
}

fn to_vector(m: CMatrix) -> CVector {
    CVector::from_iterator(m.nrows(), m.column(0).iter().copied())
}

/// Deterministic for fixed `(config, spec, seed)`.
pub fn generate_channels(
    config: &SystemConfig,
    spec: &ChannelModelSpec,
    seed: u64,
) -> Result<ChannelSet, ChannelError> {
    config.validate()?;
    spec.validate()?;
    let n = config.n_antennas;
    let k = config.n_elements;
    let l0 = config.path_loss_ref_db;
    let bs = config.geometry.bs;
    let irs = config.geometry.irs;
    let nu = config.nu_position();
    let fu = config.fu_position();

    let direct = |model: &LinkModel, id: LinkId, user: [f64; 2]| {
        let los = column(los_steering(n, angle(bs, user)));
        let gain = path_gain(l0, model.exponent, distance(bs, user));
        to_vector(draw_link(model, &los, gain, &mut link_rng(seed, id)))
    };
    let h_bs_nu = direct(&spec.bs_nu, LinkId::BsNu, nu);
    let h_bs_fu = direct(&spec.bs_fu, LinkId::BsFu, fu);

    let (g_bs_irs, h_irs_nu, h_irs_fu) = if k == 0 {
        (CMatrix::zeros(0, n), CVector::zeros(0), CVector::zeros(0))
    } else {
        let arrival = los_steering(k, angle(irs, bs));
        let departure = los_steering(n, angle(bs, irs));
        let los_g = &arrival * departure.adjoint();
        let gain_g = path_gain(l0, spec.bs_irs.exponent, distance(bs, irs));
        let g = draw_link(&spec.bs_irs, &los_g, gain_g, &mut link_rng(seed, LinkId::BsIrs));
        let reflected = |model: &LinkModel, id: LinkId, user: [f64; 2]| {
            let los = column(los_steering(k, angle(irs, user)));
            let gain = path_gain(l0, model.exponent, distance(irs, user));
            to_vector(draw_link(model, &los, gain, &mut link_rng(seed, id)))
        };
        (g, reflected(&spec.irs_nu, LinkId::IrsNu, nu), reflected(&spec.irs_fu, LinkId::IrsFu, fu))
    };

    let set = ChannelSet { g_bs_irs, h_bs_nu, h_bs_fu, h_irs_nu, h_irs_fu };
    set.validate_against(config)?;
    Ok(set)
}

/// On-disk channel realization. Complex entries are `[re, im]` pairs;
/// `g_bs_irs` is a list of K rows of N entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub n_antennas: usize,
    pub n_elements: usize,
    pub g_bs_irs: Vec<Vec<[f64; 2]>>,
    pub h_bs_nu: Vec<[f64; 2]>,
    pub h_bs_fu: Vec<[f64; 2]>,
    pub h_irs_nu: Vec<[f64; 2]>,
    pub h_irs_fu: Vec<[f64; 2]>,
}

fn pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(p: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(p.len(), p.iter().map(|&[re, im]| C64::new(re, im)))
}

impl From<&ChannelSet> for ChannelFile {
    fn from(set: &ChannelSet) -> Self {
        Self {
            n_antennas: set.n_antennas(),
            n_elements: set.n_elements(),
            g_bs_irs: set.g_bs_irs.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
            h_bs_nu: pairs(&set.h_bs_nu),
            h_bs_fu: pairs(&set.h_bs_fu),
            h_irs_nu: pairs(&set.h_irs_nu),
            h_irs_fu: pairs(&set.h_irs_fu),
        }
    }
}

impl TryFrom<ChannelFile> for ChannelSet {
    type Error = ChannelError;

    fn try_from(file: ChannelFile) -> Result<Self, ChannelError> {
        let (n, k) = (file.n_antennas, file.n_elements);
        if file.g_bs_irs.len() != k || file.g_bs_irs.iter().any(|r| r.len() != n) {
            return Err(ChannelError::Format(format!("g_bs_irs must be {k} rows of {n} entries")));
        }
        let mut g = CMatrix::zeros(k, n);
        for (r, row) in file.g_bs_irs.iter().enumerate() {
            for (c, &[re, im]) in row.iter().enumerate() {
                g[(r, c)] = C64::new(re, im);
            }
        }
        let set = ChannelSet {
            g_bs_irs: g,
            h_bs_nu: from_pairs(&file.h_bs_nu),
            h_bs_fu: from_pairs(&file.h_bs_fu),
            h_irs_nu: from_pairs(&file.h_irs_nu),
            h_irs_fu: from_pairs(&file.h_irs_fu),
        };
        if set.n_antennas() != n || set.n_elements() != k {
            return Err(ChannelError::Format("vector lengths disagree with declared dimensions".into()));
        }
        set.validate()?;
        Ok(set)
    }
}

pub fn channels_to_json(set: &ChannelSet) -> String {
    serde_json::to_string_pretty(&ChannelFile::from(set)).expect("channel file serializes")
}

pub fn channels_from_json(text: &str) -> Result<ChannelSet, ChannelError> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| ChannelError::Format(e.to_string()))?;
    file.try_into()
}

pub fn write_channels(path: impl AsRef<Path>, set: &ChannelSet) -> Result<(), ChannelError> {
    std::fs::write(path, channels_to_json(set))?;
    Ok(())
}

pub fn read_channels(path: impl AsRef<Path>) -> Result<ChannelSet, ChannelError> {
    channels_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_spec(cfg: &SystemConfig) -> ChannelModelSpec {
        ChannelModelSpec::from_config(cfg, DEFAULT_IRS_EXPONENT)
    }

    #[test]
    fn steering_examples() {
        let ones = los_steering(4, 0.0);
        assert!(ones.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        let v = los_steering(2, PI / 2.0);
        assert!((v[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - C64::from_polar(1.0, PI)).norm() < 1e-15);
        for angle in [-1.2, 0.3, 2.9] {
            assert!(los_steering(9, angle).iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = SystemConfig::default();
        let spec = default_spec(&cfg);
        let a = generate_channels(&cfg, &spec, 42).unwrap();
        let b = generate_channels(&cfg, &spec, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_channels(&cfg, &spec, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn direct_links_do_not_depend_on_irs() {
        let cfg = SystemConfig::default();
        let with = generate_channels(&cfg, &default_spec(&cfg), 5).unwrap();
        let without = generate_channels(&cfg.without_irs(), &default_spec(&cfg), 5).unwrap();
        assert_eq!(with.h_bs_nu, without.h_bs_nu);
        assert_eq!(with.h_bs_fu, without.h_bs_fu);
        assert_eq!(with.direct_only(), without);
    }

    #[test]
    fn near_user_path_gain_matches_reference() {
        // 40 dB + 30 log10(100) = 100 dB
        let cfg = SystemConfig::default();
        let g = path_gain(cfg.path_loss_ref_db, 3.0, cfg.d_nu);
        assert!((g / 1e-10 - 1.0).abs() < 1e-12);
        let g_fu = path_gain(cfg.path_loss_ref_db, 2.0, cfg.d_fu);
        assert!((g_fu / 1e-10 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_distance_costs_ten_alpha_log2_db() {
        for alpha in [2.0, 2.2, 3.0] {
            let near = path_loss_db(40.0, alpha, 37.0);
            let far = path_loss_db(40.0, alpha, 74.0);
            assert!((far - near - 10.0 * alpha * 2f64.log10()).abs() < 1e-12);
        }
    }

    #[test]
    fn rayleigh_entry_variance_matches_path_gain() {
        let cfg = SystemConfig { n_antennas: 1000, n_elements: 0, ..SystemConfig::default() };
        let spec = default_spec(&cfg);
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..100 {
            let ch = generate_channels(&cfg, &spec, seed).unwrap();
            sum += ch.h_bs_nu.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += ch.h_bs_nu.len();
        }
        assert_eq!(count, 100_000);
        let expected = path_gain(cfg.path_loss_ref_db, 3.0, cfg.d_nu);
        let ratio = sum / count as f64 / expected;
        assert!((ratio - 1.0).abs() < 0.05, "variance ratio {ratio}");
    }

    #[test]
    fn huge_k_factor_recovers_steering() {
        // Scatter per entry has rms 1/sqrt(Kf); the mean absolute deviation
        // per unit-modulus steering entry concentrates near 0.886/sqrt(Kf).
        let mut cfg = SystemConfig { n_antennas: 32, n_elements: 64, ..SystemConfig::default() };
        cfg.rician_k_db = 60.0;
        let spec = default_spec(&cfg);
        let ch = generate_channels(&cfg, &spec, 9).unwrap();
        let gain = path_gain(cfg.path_loss_ref_db, spec.bs_irs.exponent, distance(cfg.geometry.bs, cfg.geometry.irs));
        let arrival = los_steering(64, angle(cfg.geometry.irs, cfg.geometry.bs));
        let departure = los_steering(32, angle(cfg.geometry.bs, cfg.geometry.irs));
        let los = &arrival * departure.adjoint() * C64::new(gain.sqrt(), 0.0);
        let mean_rel = (&ch.g_bs_irs - &los).iter().map(|z| z.norm()).sum::<f64>() / (64.0 * 32.0 * gain.sqrt());
        assert!(mean_rel < 1e-3, "mean relative deviation {mean_rel}");
    }

    #[test]
    fn json_round_trip() {
        let cfg = SystemConfig { n_antennas: 3, n_elements: 2, ..SystemConfig::default() };
        let ch = generate_channels(&cfg, &default_spec(&cfg), 11).unwrap();
        let back = channels_from_json(&channels_to_json(&ch)).unwrap();
        assert_eq!(ch, back);
        assert!(channels_from_json("{\"n_antennas\": 2}").is_err());
    }

    #[test]
    fn rejects_bad_spec() {
        let cfg = SystemConfig::default();
        let mut spec = default_spec(&cfg);
        spec.bs_nu.exponent = 0.0;
        assert!(generate_channels(&cfg, &spec, 1).is_err());
    }
}
