//! Complex-to-real embedding.
//!
//! A Hermitian `X = Xr + j Xi` of size `n` maps to the real symmetric
//!
//! ```text
//! [[Xr, -Xi],
//!  [Xi,  Xr]]
//! ```
//!
//! of size `2n`. For Hermitian `A`, `Tr(embed(A) embed(X)) = 2 Tr(A X)`, so
//! coefficients enter the real problem as `embed(A) / 2`. The PSD cone maps
//! into the PSD cone and eigenvalues are preserved with doubled multiplicity.
//!
//! The real problem does not force the block structure on its variable. Any
//! real PSD `Y = [[P, Q^T], [Q, S]]` maps back to the Hermitian PSD
//! `((P + S) + j (Q - Q^T)) / 2` with the same embedded traces, so nothing
//! is lost by leaving `Y` free.

use nalgebra::{DMatrix, DVector};

use super::{Coefficient, Relation, SdpError, SdpProblem};
use crate::linalg::{self, CMatrix, C64};

pub fn embed_hermitian(x: &CMatrix) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = x[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

pub fn extract_hermitian(y: &DMatrix<f64>, n: usize) -> CMatrix {
    assert_eq!(y.nrows(), 2 * n);
    CMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
        let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
        C64::new(re, im)
    })
}

/// Real symmetric matrix `dense + shift * I + sum_k w_k v_k v_k^T`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealSym {
    pub dense: Option<DMatrix<f64>>,
    pub shift: f64,
    pub terms: Vec<(f64, DVector<f64>)>,
}

impl RealSym {
    pub fn from_coefficient(coeff: &Coefficient, factor: f64) -> Self {
        match coeff {
            Coefficient::Dense(m) => Self { dense: Some(embed_hermitian(m) * factor), ..Self::default() },
            Coefficient::LowRank { shift, terms } => {
                let mut out = Self { shift: shift * factor, ..Self::default() };
                for (w, v) in terms {
                    let (re, im) = linalg::to_real_parts(v);
                    let mut a = DVector::zeros(2 * v.len());
                    let mut b = DVector::zeros(2 * v.len());
                    a.rows_mut(0, v.len()).copy_from(&re);
                    a.rows_mut(v.len(), v.len()).copy_from(&im);
                    b.rows_mut(0, v.len()).copy_from(&(-&im));
                    b.rows_mut(v.len(), v.len()).copy_from(&re);
                    out.terms.push((w * factor, a));
                    out.terms.push((w * factor, b));
                }
                out
            }
        }
    }

    pub fn merge(&mut self, other: RealSym) {
        self.shift += other.shift;
        self.terms.extend(other.terms);
        self.dense = match (self.dense.take(), other.dense) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
    }

    pub fn scale(&mut self, factor: f64) {
        self.shift *= factor;
        self.terms.iter_mut().for_each(|(w, _)| *w *= factor);
        if let Some(d) = self.dense.as_mut() {
            *d *= factor;
        }
    }

    /// `Tr(A G)` for any square `G`.
    pub fn inner(&self, g: &DMatrix<f64>) -> f64 {
        let mut acc = self.shift * g.trace();
        for (w, v) in &self.terms {
            acc += w * v.dot(&(g * v));
        }
        if let Some(d) = &self.dense {
            acc += d.dot(g);
        }
        acc
    }

    pub fn add_scaled_to(&self, out: &mut DMatrix<f64>, s: f64) {
        if s == 0.0 {
            return;
        }
        if self.shift != 0.0 {
            for i in 0..out.nrows() {
                out[(i, i)] += s * self.shift;
            }
        }
        for (w, v) in &self.terms {
            out.ger(s * w, v, v, 1.0);
        }
        if let Some(d) = &self.dense {
            *out += d * s;
        }
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n, n);
        self.add_scaled_to(&mut out, 1.0);
        out
    }

    /// `X A Z^{-1}`, given `X Z^{-1}`.
    pub fn sandwich(&self, x: &DMatrix<f64>, zinv: &DMatrix<f64>, xzinv: &DMatrix<f64>) -> DMatrix<f64> {
        let n = x.nrows();
        let mut out = if self.shift != 0.0 { xzinv * self.shift } else { DMatrix::zeros(n, n) };
        for (w, v) in &self.terms {
            let xv = x * v;
            let zv = zinv * v;
            out.ger(*w, &xv, &zv, 1.0);
        }
        if let Some(d) = &self.dense {
            out += x * d * zinv;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.shift == 0.0 && self.terms.is_empty() && self.dense.is_none()
    }
}

/// One equality row `sum_b <A_b, X_b> + <a, x_lp> = b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealRow {
    pub label: String,
    pub blocks: Vec<Option<RealSym>>,
    pub lp: Vec<(usize, f64)>,
}

/// Real block SDP in standard primal form:
/// `min <C, X>  s.t.  <A_i, X> = b_i`, `X = diag(X_1, .., X_p, x_lp)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSdp {
    pub psd_dims: Vec<usize>,
    pub lp_dim: usize,
    pub c_blocks: Vec<Option<RealSym>>,
    pub c_lp: DVector<f64>,
    pub rows: Vec<RealRow>,
    pub b: DVector<f64>,
    /// The Hermitian objective equals `objective_sign * <C, X> / objective_scale`
    /// plus the problem's constant.
    pub objective_sign: f64,
    pub objective_scale: f64,
}

impl RealSdp {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Builds the real standard-form problem. Each inequality receives a slack
/// in the LP block. With `equilibrate` every row is scaled to unit norm and
/// the cost to unit norm.
pub fn embed_real(problem: &SdpProblem, equilibrate: bool) -> Result<RealSdp, SdpError> {
    problem.validate()?;
    let psd_dims: Vec<usize> = problem.variables.iter().map(|v| 2 * v.dim).collect();
    let nb = psd_dims.len();

    let collect = |terms: &[super::LinearTerm], factor: f64| {
        let mut blocks: Vec<Option<RealSym>> = vec![None; nb];
        for t in terms {
            let sym = RealSym::from_coefficient(&t.coeff, factor);
            match blocks[t.var].as_mut() {
                Some(acc) => acc.merge(sym),
                None => blocks[t.var] = Some(sym),
            }
        }
        blocks
    };

    let mut c_blocks = collect(&problem.objective.terms, -0.5);
    let mut lp_dim = 0;
    let mut rows = Vec::with_capacity(problem.constraints.len());
    let mut b = Vec::with_capacity(problem.constraints.len());
    for con in &problem.constraints {
        let mut row = RealRow { label: con.label.clone(), blocks: collect(&con.lhs.terms, 0.5), lp: Vec::new() };
        match con.relation {
            Relation::GreaterEq => {
                row.lp.push((lp_dim, -1.0));
                lp_dim += 1;
            }
            Relation::LessEq => {
                row.lp.push((lp_dim, 1.0));
                lp_dim += 1;
            }
            Relation::Equal => {}
        }
        rows.push(row);
        b.push(con.rhs - con.lhs.constant);
    }
    let mut b = DVector::from_vec(b);

    let mut objective_scale = 1.0;
    if equilibrate {
        for (i, row) in rows.iter_mut().enumerate() {
            let mut norm2: f64 = row.lp.iter().map(|(_, a)| a * a).sum();
            for (blk, dim) in row.blocks.iter().zip(&psd_dims) {
                if let Some(s) = blk {
                    norm2 += s.to_dense(*dim).norm_squared();
                }
            }
            let norm = norm2.sqrt();
            if norm > 0.0 {
                let f = 1.0 / norm;
                row.blocks.iter_mut().flatten().for_each(|s| s.scale(f));
                row.lp.iter_mut().for_each(|(_, a)| *a *= f);
                b[i] *= f;
            }
        }
        let c_norm: f64 = c_blocks
            .iter()
            .zip(&psd_dims)
            .filter_map(|(blk, dim)| blk.as_ref().map(|s| s.to_dense(*dim).norm_squared()))
            .sum::<f64>()
            .sqrt();
        if c_norm > 0.0 {
            objective_scale = 1.0 / c_norm;
            c_blocks.iter_mut().flatten().for_each(|s| s.scale(objective_scale));
        }
    }

    Ok(RealSdp {
        psd_dims,
        lp_dim,
        c_blocks,
        c_lp: DVector::zeros(lp_dim),
        rows,
        b,
        objective_sign: -1.0,
        objective_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cvec;
    use crate::sdp::{AffineExpr, Coefficient};

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        linalg::hermitian_part(&m)
    }

    #[test]
    fn identity_embeds_to_identity() {
        let e = embed_hermitian(&CMatrix::identity(3, 3));
        assert_eq!(e, DMatrix::identity(6, 6));
    }

    #[test]
    fn traces_double_under_embedding() {
        for seed in 0..5 {
            let a = random_hermitian(4, seed);
            let x = random_hermitian(4, seed + 100);
            let direct = linalg::trace_product(&a, &x).re;
            let embedded = (embed_hermitian(&a) * embed_hermitian(&x)).trace();
            assert!((embedded - 2.0 * direct).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_double_in_multiplicity() {
        let x = random_hermitian(4, 7);
        let mut herm = linalg::hermitian_eigenvalues(&x);
        let mut real: Vec<f64> = embed_hermitian(&x).symmetric_eigenvalues().iter().copied().collect();
        real.sort_by(f64::total_cmp);
        herm.sort_by(f64::total_cmp);
        for (i, lam) in herm.iter().enumerate() {
            assert!((real[2 * i] - lam).abs() < 1e-12);
            assert!((real[2 * i + 1] - lam).abs() < 1e-12);
        }
    }

    #[test]
    fn extraction_inverts_embedding() {
        let x = random_hermitian(5, 3);
        let back = extract_hermitian(&embed_hermitian(&x), 5);
        assert!((back - x).norm() < 1e-15);
    }

    #[test]
    fn low_rank_embedding_matches_dense() {
        let v = cvec(&[(1.0, 2.0), (-0.5, 0.3), (0.0, -1.0)]);
        let coeff = Coefficient::LowRank { shift: 0.7, terms: vec![(2.0, v)] };
        let dense = embed_hermitian(&coeff.to_dense(3));
        let low = RealSym::from_coefficient(&coeff, 1.0).to_dense(6);
        assert!((dense - low).norm() < 1e-13);
    }

    #[test]
    fn sandwich_matches_explicit_product() {
        let a = RealSym {
            dense: Some(DMatrix::from_fn(3, 3, |i, j| (i + j) as f64)),
            shift: 0.5,
            terms: vec![(1.5, DVector::from_vec(vec![1.0, -1.0, 2.0]))],
        };
        let x = DMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 } else { 0.1 });
        let zinv = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.2 });
        let expected = &x * a.to_dense(3) * &zinv;
        assert!((a.sandwich(&x, &zinv, &(&x * &zinv)) - expected).norm() < 1e-12);
    }

    #[test]
    fn embedded_rows_reproduce_hermitian_traces() {
        let mut p = SdpProblem::new();
        let x = p.add_variable("X", 3);
        let a = random_hermitian(3, 11);
        p.set_objective(AffineExpr::new().term(x, Coefficient::Dense(a.clone())));
        p.add_constraint("c", AffineExpr::new().term(x, Coefficient::Dense(a.clone())), Relation::GreaterEq, 1.0);
        let real = embed_real(&p, false).unwrap();
        let xm = random_hermitian(3, 12);
        let y = embed_hermitian(&xm);
        let direct = linalg::trace_product(&a, &xm).re;
        let row = real.rows[0].blocks[0].as_ref().unwrap().inner(&y);
        assert!((row - direct).abs() < 1e-12);
        let cost = real.c_blocks[0].as_ref().unwrap().inner(&y);
        assert!((real.objective_sign * cost - direct).abs() < 1e-12);
        assert_eq!(real.lp_dim, 1);
        assert_eq!(real.rows[0].lp, vec![(0, -1.0)]);
    }
}
