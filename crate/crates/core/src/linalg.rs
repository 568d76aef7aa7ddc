//! Small complex linear-algebra helpers shared by the modules.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// `a b^H`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// `x^H A x`, real part. Exact for Hermitian `A`.
pub fn quad_form(x: &CVector, a: &CMatrix) -> f64 {
    x.dotc(&(a * x)).re
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().copied().sum()
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Largest absolute entry of `A - A^H`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max-abs entry norm.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// Rotates `u` so that its largest-magnitude entry is real and positive.
pub fn fix_phase(u: &mut CVector) {
    let Some((idx, _)) = u.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) else {
        return;
    };
    let pivot = u[idx];
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        u.iter_mut().for_each(|z| *z *= rot);
        u[idx] = C64::new(u[idx].norm(), 0.0);
    }
}

pub fn all_finite(values: impl IntoIterator<Item = C64>) -> bool {
    values.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn cvec(values: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&(re, im)| C64::new(re, im)))
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Standard basis vector `e_k` of length `n`.
pub fn basis(n: usize, k: usize) -> CVector {
    let mut e = CVector::zeros(n);
    e[k] = real(1.0);
    e
}

pub fn to_real_parts(v: &CVector) -> (DVector<f64>, DVector<f64>) {
    (v.map(|z| z.re), v.map(|z| z.im))
}
