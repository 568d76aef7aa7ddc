//! Rank-one recovery from relaxed solutions and the power-split repair.

use serde::Serialize;

use crate::linalg::{self, CMatrix, CVector, C64};
use crate::srocr;

use super::subproblem::Scenario;

/// Smallest admissible magnitude of the lifted vector's last entry.
pub const LIFT_PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryKind {
    Beamformer,
    Reflect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovered {
    /// A beamformer, or the reflection coefficients `v` (length K).
    pub vector: CVector,
    /// `lambda_max / Tr` of the input; 1 for a zero matrix.
    pub rank_ratio: f64,
    /// The reflect pivot was too small and the largest entry was used.
    pub fallback: bool,
}

pub fn recover_rank_one(x: &CMatrix, kind: RecoveryKind) -> Recovered {
    let (lam, u) = srocr::principal_eigpair(x);
    let rank_ratio = srocr::rank_ratio(x).unwrap_or(1.0);
    match kind {
        RecoveryKind::Beamformer => {
            Recovered { vector: u * C64::new(lam.max(0.0).sqrt(), 0.0), rank_ratio, fallback: false }
        }
        RecoveryKind::Reflect => {
            let k = u.len() - 1;
            let pivot = u[k];
            let (reference, fallback) = if pivot.norm() >= LIFT_PIVOT_TOL {
                (pivot, false)
            } else {
                let big = u.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::new(1.0, 0.0));
                (big, true)
            };
            // Lifted entries are conj(v_k) up to a common factor.
            let vector = CVector::from_iterator(
                k,
                u.rows(0, k).iter().map(|z| {
                    let ratio = (z / reference).conj();
                    if ratio.norm() > 0.0 {
                        ratio / ratio.norm()
                    } else {
                        C64::new(1.0, 0.0)
                    }
                }),
            );
            Recovered { vector, rank_ratio, fallback }
        }
    }
}

/// Gains of unit-norm beamforming directions at both users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionGains {
    pub nu_u: f64,
    pub nu_m: f64,
    pub fu_u: f64,
    pub fu_m: f64,
}

impl DirectionGains {
    pub fn new(h_nu: &CVector, h_fu: &CVector, d_u: &CVector, d_m: &CVector) -> Self {
        Self {
            nu_u: h_nu.dotc(d_u).norm_sqr(),
            nu_m: h_nu.dotc(d_m).norm_sqr(),
            fu_u: h_fu.dotc(d_u).norm_sqr(),
            fu_m: h_fu.dotc(d_m).norm_sqr(),
        }
    }
}

/// Best powers `(p_u, p_m)` along fixed directions for the parametric
/// objective `p_u g_nu_u - q zeta p_m g_nu_m`, subject to the budget, both
/// multicast SINR floors and the illumination floor. Solved exactly by
/// enumerating vertices of the feasible polygon. `None` if it is empty.
pub fn best_power_split(g: &DirectionGains, q: f64, s: &Scenario) -> Option<(f64, f64)> {
    let gb = s.gamma_bar;
    // Half-planes a0 p_u + a1 p_m <= c.
    let rows = [
        ([1.0, 1.0], s.p_max),
        ([gb * g.nu_u, -g.nu_m], -gb * s.sigma2_nu),
        ([gb * g.fu_u, -g.fu_m], -gb * s.sigma2_fu),
        ([-g.fu_u, -g.fu_m], -s.gamma),
        ([-1.0, 0.0], 0.0),
        ([0.0, -1.0], 0.0),
    ];
    let scale: Vec<f64> = rows.iter().map(|(a, c)| a[0].abs().max(a[1].abs()).max(c.abs()).max(1e-300)).collect();
    let feasible =
        |p: [f64; 2]| rows.iter().zip(&scale).all(|((a, c), sc)| a[0] * p[0] + a[1] * p[1] - c <= 1e-12 * sc);
    let value = |p: [f64; 2]| p[0] * g.nu_u - q * s.zeta * p[1] * g.nu_m;

    let mut best: Option<([f64; 2], f64)> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, c) = rows[i];
            let (b, d) = rows[j];
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() <= 1e-14 * (a[0].abs() + a[1].abs()) * (b[0].abs() + b[1].abs()) {
                continue;
            }
            let p = [(c * b[1] - a[1] * d) / det, (a[0] * d - c * b[0]) / det];
            if !p.iter().all(|x| x.is_finite()) || !feasible(p) {
                continue;
            }
            let p = [p[0].max(0.0), p[1].max(0.0)];
            let v = value(p);
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((p, v));
            }
        }
    }
    best.map(|(p, _)| (p[0], p[1]))
}

/// Unit direction of `w`, or of `fallback` when `w` vanishes.
pub fn direction(w: &CVector, fallback: &CVector) -> CVector {
    let n = w.norm();
    if n > 1e-150 {
        w.unscale(n)
    } else {
        let f = fallback.norm();
        if f > 0.0 {
            fallback.unscale(f)
        } else {
            linalg::basis(w.len(), 0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cvec;
    use crate::model::ReflectVector;

    #[test]
    fn beamformer_from_scaled_outer_product() {
        let u = cvec(&[(0.6, 0.0), (0.0, 0.8)]);
        let rec = recover_rank_one(&(linalg::outer(&u, &u) * C64::new(4.0, 0.0)), RecoveryKind::Beamformer);
        let mut expected = u * C64::new(2.0, 0.0);
        linalg::fix_phase(&mut expected);
        assert!((rec.vector - expected).norm() < 1e-12);
        assert!((rec.rank_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflect_from_exact_lift() {
        let v = ReflectVector::from_phases([0.3, 2.0, 5.5]);
        let lifted = v.lifted() * C64::from_polar(1.0, 1.1);
        let rec = recover_rank_one(&linalg::outer(&lifted, &lifted), RecoveryKind::Reflect);
        assert!(!rec.fallback);
        assert!((rec.vector - v.coefficients()).norm() < 1e-12);
    }

    #[test]
    fn tiny_pivot_falls_back() {
        let x =
            linalg::outer(&cvec(&[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)]), &cvec(&[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)]));
        let rec = recover_rank_one(&x, RecoveryKind::Reflect);
        assert!(rec.fallback);
        assert!(rec.vector.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn power_split_matches_scalar_closed_form() {
        // Single direction for both streams, no floors: the unicast stream
        // takes everything when zeta q is positive.
        let g = DirectionGains { nu_u: 2.0, nu_m: 2.0, fu_u: 1.0, fu_m: 1.0 };
        let s = Scenario { p_max: 1.0, sigma2_nu: 1.0, sigma2_fu: 1.0, zeta: 0.1, gamma: 0.0, gamma_bar: 0.0 };
        assert_eq!(best_power_split(&g, 1.0, &s), Some((1.0, 0.0)));
        // With a multicast floor at the near user: p_m g >= gb (p_u g + 1).
        // The far user's multicast gain is large, so the near floor binds:
        // p_m = p_u + 1/2 on the budget line.
        let s = Scenario { gamma_bar: 1.0, ..s };
        let g = DirectionGains { fu_m: 10.0, ..g };
        let (pu, pm) = best_power_split(&g, 1.0, &s).unwrap();
        assert!((pu - 0.25).abs() < 1e-12 && (pm - 0.75).abs() < 1e-12);
    }

    #[test]
    fn empty_polygon_is_reported() {
        let g = DirectionGains { nu_u: 1.0, nu_m: 1.0, fu_u: 1.0, fu_m: 1.0 };
        let s = Scenario { p_max: 1.0, sigma2_nu: 1.0, sigma2_fu: 1.0, zeta: 0.0, gamma: 5.0, gamma_bar: 0.0 };
        assert_eq!(best_power_split(&g, 0.0, &s), None);
    }
}
