//! Primal-dual interior-point method for real block SDPs.
//!
//! Infeasible-start path following with the HKM search direction and a
//! Mehrotra predictor-corrector. The Schur complement is assembled from the
//! low-rank form of the constraint matrices, which is what keeps the
//! beamforming subproblems cheap.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::embed::{RealSdp, RealSym};
use super::{BackendStatus, ConicBackend, RealSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    /// Target for relative gap and scaled primal/dual infeasibility.
    pub tol: f64,
    /// Looser target accepted when progress stalls.
    pub stall_tol: f64,
    pub max_iters: usize,
    /// Certificate threshold for infeasibility detection.
    pub infeasibility_tol: f64,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self { tol: 1e-8, stall_tol: 1e-6, max_iters: 100, infeasibility_tol: 1e-8 }
    }
}

impl ConicBackend for InteriorPoint {
    fn solve(&self, problem: &RealSdp) -> RealSolution {
        Solver::new(problem, *self).run()
    }
}

/// Primal and dual iterate.
#[derive(Clone)]
struct Point {
    x: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
    zl: DVector<f64>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
    dzl: DVector<f64>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rdl: DVector<f64>,
    pinf: f64,
    dinf: f64,
    pobj: f64,
    dobj: f64,
    gap: f64,
    mu: f64,
}

struct Solver<'a> {
    p: &'a RealSdp,
    opts: InteriorPoint,
    c: Vec<DMatrix<f64>>,
    /// Row `i` holds the LP coefficients of constraint `i`.
    a_lp: DMatrix<f64>,
    b_norm: f64,
    c_norm: f64,
    nu: f64,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn dense_norm(s: &Option<RealSym>, n: usize) -> f64 {
    s.as_ref().map_or(0.0, |s| s.to_dense(n).norm())
}

impl<'a> Solver<'a> {
    fn new(p: &'a RealSdp, opts: InteriorPoint) -> Self {
        let c: Vec<DMatrix<f64>> = p
            .c_blocks
            .iter()
            .zip(&p.psd_dims)
            .map(|(s, &n)| s.as_ref().map_or_else(|| DMatrix::zeros(n, n), |s| s.to_dense(n)))
            .collect();
        let m = p.rows.len();
        let mut a_lp = DMatrix::zeros(m, p.lp_dim);
        for (i, row) in p.rows.iter().enumerate() {
            for &(k, a) in &row.lp {
                a_lp[(i, k)] += a;
            }
        }
        let c_norm = (c.iter().map(|m| m.norm_squared()).sum::<f64>() + p.c_lp.norm_squared()).sqrt();
        let nu = (p.psd_dims.iter().sum::<usize>() + p.lp_dim) as f64;
        Self { p, opts, c, a_lp, b_norm: p.b.norm(), c_norm, nu }
    }

    fn apply_a(&self, x: &[DMatrix<f64>], xl: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.a_lp * xl;
        for (i, row) in self.p.rows.iter().enumerate() {
            for (blk, xb) in row.blocks.iter().zip(x) {
                if let Some(s) = blk {
                    out[i] += s.inner(xb);
                }
            }
        }
        out
    }

    fn apply_at(&self, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let mut blocks: Vec<DMatrix<f64>> = self.p.psd_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (i, row) in self.p.rows.iter().enumerate() {
            for (blk, out) in row.blocks.iter().zip(blocks.iter_mut()) {
                if let Some(s) = blk {
                    s.add_scaled_to(out, y[i]);
                }
            }
        }
        (blocks, self.a_lp.tr_mul(y))
    }

    fn start(&self) -> Point {
        let m = self.p.rows.len();
        let block = |n: usize, b: usize| -> (f64, f64) {
            let nf = n as f64;
            let mut xi = 10.0_f64.max(nf.sqrt());
            let mut eta = 10.0_f64.max(nf.sqrt());
            for (i, row) in self.p.rows.iter().enumerate() {
                let norm =
                    if b < self.p.psd_dims.len() { dense_norm(&row.blocks[b], n) } else { self.a_lp.row(i).norm() };
                xi = xi.max(nf * (1.0 + self.p.b[i].abs()) / (1.0 + norm));
                eta = eta.max(norm);
            }
            let c_norm = if b < self.p.psd_dims.len() { self.c[b].norm() } else { self.p.c_lp.norm() };
            (xi, eta.max(c_norm))
        };
        let mut x = Vec::new();
        let mut z = Vec::new();
        for (b, &n) in self.p.psd_dims.iter().enumerate() {
            let (xi, eta) = block(n, b);
            x.push(DMatrix::identity(n, n) * xi);
            z.push(DMatrix::identity(n, n) * eta);
        }
        let (xi, eta) = block(self.p.lp_dim, self.p.psd_dims.len());
        Point {
            x,
            xl: DVector::from_element(self.p.lp_dim, xi),
            y: DVector::zeros(m),
            z,
            zl: DVector::from_element(self.p.lp_dim, eta),
        }
    }

    fn residuals(&self, pt: &Point) -> Residuals {
        let rp = &self.p.b - self.apply_a(&pt.x, &pt.xl);
        let (aty, atyl) = self.apply_at(&pt.y);
        let rd: Vec<DMatrix<f64>> = self.c.iter().zip(&aty).zip(&pt.z).map(|((c, a), z)| c - a - z).collect();
        let rdl = &self.p.c_lp - atyl - &pt.zl;
        let pobj = self.c.iter().zip(&pt.x).map(|(c, x)| c.dot(x)).sum::<f64>() + self.p.c_lp.dot(&pt.xl);
        let dobj = self.p.b.dot(&pt.y);
        let xz = pt.x.iter().zip(&pt.z).map(|(x, z)| x.dot(z)).sum::<f64>() + pt.xl.dot(&pt.zl);
        let rd_norm = (rd.iter().map(|m| m.norm_squared()).sum::<f64>() + rdl.norm_squared()).sqrt();
        Residuals {
            pinf: rp.norm() / (1.0 + self.b_norm),
            dinf: rd_norm / (1.0 + self.c_norm),
            gap: xz / (1.0 + pobj.abs() + dobj.abs()),
            mu: xz / self.nu,
            rp,
            rd,
            rdl,
            pobj,
            dobj,
        }
    }

    /// Primal infeasibility certificate: `b^T y > 0` with `A^T y + Z` small
    /// relative to it. Dual infeasibility: `<C, X> < 0` with `A(X)` small.
    fn infeasibility(&self, pt: &Point, r: &Residuals) -> Option<BackendStatus> {
        let tol = self.opts.infeasibility_tol;
        if r.dobj > 0.0 {
            let (aty, atyl) = self.apply_at(&pt.y);
            let norm2: f64 = aty.iter().zip(&pt.z).map(|(a, z)| (a + z).norm_squared()).sum::<f64>()
                + (atyl + &pt.zl).norm_squared();
            if norm2.sqrt() / r.dobj < tol {
                return Some(BackendStatus::PrimalInfeasible);
            }
        }
        if r.pobj < 0.0 {
            let ax = self.apply_a(&pt.x, &pt.xl);
            if ax.norm() / -r.pobj < tol {
                return Some(BackendStatus::DualInfeasible);
            }
        }
        None
    }

    fn direction(
        &self,
        pt: &Point,
        r: &Residuals,
        zinv: &[DMatrix<f64>],
        schur: &Cholesky<f64, nalgebra::Dyn>,
        sigma_mu: f64,
        corr: Option<&Direction>,
    ) -> Direction {
        let nb = pt.x.len();
        let mut g = Vec::with_capacity(nb);
        for b in 0..nb {
            let n = pt.x[b].nrows();
            let mut target = DMatrix::identity(n, n) * sigma_mu;
            if let Some(d) = corr {
                target -= &d.dx[b] * &d.dz[b];
            }
            let gb = target * &zinv[b] - &pt.x[b] - &pt.x[b] * &r.rd[b] * &zinv[b];
            g.push(gb);
        }
        let mut gl = DVector::zeros(pt.xl.len());
        for k in 0..pt.xl.len() {
            let mut target = sigma_mu;
            if let Some(d) = corr {
                target -= d.dxl[k] * d.dzl[k];
            }
            gl[k] = target / pt.zl[k] - pt.xl[k] - pt.xl[k] * r.rdl[k] / pt.zl[k];
        }
        let rhs = &r.rp - self.apply_a(&g, &gl);
        let dy = schur.solve(&rhs);
        let (atdy, atdyl) = self.apply_at(&dy);
        let dz: Vec<DMatrix<f64>> = r.rd.iter().zip(&atdy).map(|(rd, a)| rd - a).collect();
        let dzl = &r.rdl - &atdyl;
        let dx: Vec<DMatrix<f64>> = (0..nb).map(|b| sym(&(&g[b] + &pt.x[b] * &atdy[b] * &zinv[b]))).collect();
        let dxl = DVector::from_fn(pt.xl.len(), |k, _| gl[k] + pt.xl[k] * atdyl[k] / pt.zl[k]);
        Direction { dx, dxl, dy, dz, dzl }
    }

    fn schur(&self, pt: &Point, zinv: &[DMatrix<f64>], xzinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.p.rows.len();
        let mut mat = DMatrix::zeros(m, m);
        for b in 0..pt.x.len() {
            for j in 0..m {
                let Some(aj) = &self.p.rows[j].blocks[b] else { continue };
                let s = aj.sandwich(&pt.x[b], &zinv[b], &xzinv[b]);
                for i in 0..=j {
                    if let Some(ai) = &self.p.rows[i].blocks[b] {
                        let v = ai.inner(&s);
                        mat[(i, j)] += v;
                        if i != j {
                            mat[(j, i)] += v;
                        }
                    }
                }
            }
        }
        if self.p.lp_dim > 0 {
            let ratio = pt.xl.component_div(&pt.zl);
            let scaled = DMatrix::from_fn(m, self.p.lp_dim, |i, k| self.a_lp[(i, k)] * ratio[k]);
            mat += scaled * self.a_lp.transpose();
        }
        sym(&mat)
    }

    fn run(&self) -> RealSolution {
        let mut pt = self.start();
        let m = self.p.rows.len();
        let mut iterations = 0;
        let mut status = BackendStatus::Failed;
        let mut last = self.residuals(&pt);

        for iter in 0..=self.opts.max_iters {
            iterations = iter;
            let r = self.residuals(&pt);
            let ok = r.pinf < self.opts.tol && r.dinf < self.opts.tol && r.gap < self.opts.tol;
            last = r;
            if ok {
                status = BackendStatus::Optimal;
                break;
            }
            if let Some(s) = self.infeasibility(&pt, &last) {
                status = s;
                break;
            }
            if iter == self.opts.max_iters {
                break;
            }
            let r = &last;

            let Some(zinv) =
                pt.z.iter().map(|z| Cholesky::new(z.clone()).map(|c| c.inverse())).collect::<Option<Vec<_>>>()
            else {
                break;
            };
            let xzinv: Vec<DMatrix<f64>> = pt.x.iter().zip(&zinv).map(|(x, zi)| x * zi).collect();
            let mut mat = self.schur(&pt, &zinv, &xzinv);
            let schur = match Cholesky::new(mat.clone()) {
                Some(c) => c,
                None => {
                    let bump = 1e-14 * (1.0 + mat.diagonal().amax());
                    for i in 0..m {
                        mat[(i, i)] += bump;
                    }
                    match Cholesky::new(mat) {
                        Some(c) => c,
                        None => break,
                    }
                }
            };

            let pred = self.direction(&pt, r, &zinv, &schur, 0.0, None);
            let (Some(ap), Some(ad)) = (self.primal_step(&pt, &pred), self.dual_step(&pt, &pred)) else {
                break;
            };
            let ap_aff = ap.min(1.0);
            let ad_aff = ad.min(1.0);
            let mu_aff = self.complementarity(&pt, &pred, ap_aff, ad_aff) / self.nu;
            let sigma = (mu_aff / r.mu).clamp(0.0, 1.0).powi(3);

            let dir = self.direction(&pt, r, &zinv, &schur, sigma * r.mu, Some(&pred));
            let (Some(ap), Some(ad)) = (self.primal_step(&pt, &dir), self.dual_step(&pt, &dir)) else {
                break;
            };
            let gamma = 0.9 + 0.09 * ap_aff.min(ad_aff);
            let ap = (gamma * ap).min(1.0);
            let ad = (gamma * ad).min(1.0);
            if ap < 1e-10 && ad < 1e-10 {
                break;
            }
            for b in 0..pt.x.len() {
                pt.x[b] += &dir.dx[b] * ap;
                pt.z[b] += &dir.dz[b] * ad;
            }
            pt.xl += &dir.dxl * ap;
            pt.zl += &dir.dzl * ad;
            pt.y += &dir.dy * ad;
        }

        if status == BackendStatus::Failed {
            let r = self.residuals(&pt);
            let tol = self.opts.stall_tol;
            if r.pinf < tol && r.dinf < tol && r.gap < tol {
                status = BackendStatus::Optimal;
            }
            last = r;
        }

        RealSolution {
            status,
            blocks: pt.x,
            lp: pt.xl,
            y: pt.y,
            primal_objective: last.pobj,
            dual_objective: last.dobj,
            iterations,
            primal_infeasibility: last.pinf,
            dual_infeasibility: last.dinf,
            relative_gap: last.gap,
        }
    }

    fn complementarity(&self, pt: &Point, d: &Direction, ap: f64, ad: f64) -> f64 {
        let mut acc = 0.0;
        for b in 0..pt.x.len() {
            let x = &pt.x[b] + &d.dx[b] * ap;
            let z = &pt.z[b] + &d.dz[b] * ad;
            acc += x.dot(&z);
        }
        let xl = &pt.xl + &d.dxl * ap;
        let zl = &pt.zl + &d.dzl * ad;
        acc + xl.dot(&zl)
    }

    fn primal_step(&self, pt: &Point, d: &Direction) -> Option<f64> {
        let mut alpha = max_step_lp(&pt.xl, &d.dxl);
        for (x, dx) in pt.x.iter().zip(&d.dx) {
            alpha = alpha.min(max_step_psd(x, dx)?);
        }
        Some(alpha)
    }

    fn dual_step(&self, pt: &Point, d: &Direction) -> Option<f64> {
        let mut alpha = max_step_lp(&pt.zl, &d.dzl);
        for (z, dz) in pt.z.iter().zip(&d.dz) {
            alpha = alpha.min(max_step_psd(z, dz)?);
        }
        Some(alpha)
    }
}

/// Largest `a` with `x + a dx >= 0`, infinite if unbounded.
fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter().zip(dx.iter()).filter(|(_, d)| **d < 0.0).map(|(x, d)| -x / d).fold(f64::INFINITY, f64::min)
}

/// Largest `a` with `X + a dX` PSD. `None` if `X` itself is not PD.
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let n = x.nrows();
    if n == 0 {
        return Some(f64::INFINITY);
    }
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let left = l.solve_lower_triangular(dx)?;
    let both = l.solve_lower_triangular(&left.transpose())?;
    let lam = sym(&both).symmetric_eigenvalues().min();
    Some(if lam < 0.0 { -1.0 / lam } else { f64::INFINITY })
}
