//! Small dense linear-algebra helpers over complex matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Returns `(M + M^dag) / 2`.
pub fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

// Hermitized copy with entries below 1e-60 of the largest set to zero.
// The eigensolver multiplies several entries together; near 1e-100 those
// products underflow and it returns non-finite eigenvalues. Dropping the
// entries moves eigenvalues by at most n 1e-60 relative.
fn conditioned(m: &DMatrix<C64>) -> DMatrix<C64> {
    let mut h = hermitize(m);
    let scale = h.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let floor = 1e-60 * scale;
    for z in h.iter_mut() {
        if z.norm() < floor {
            *z = C64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
///
/// Columns of the returned matrix are the matching eigenvectors.
pub fn eigh_descending(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(conditioned(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues only, descending.
pub fn eigvals_descending(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(conditioned(m)).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Max |V^dag V - I| over the columns of `v`.
pub fn orthonormality_deviation(v: &DMatrix<C64>) -> f64 {
    let g = v.adjoint() * v;
    let mut worst = 0.0_f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Symmetric (Löwdin) orthonormalization `V (V^dag V)^{-1/2}` of the columns of `v`.
pub fn lowdin(v: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let gram = v.adjoint() * v;
    let k = gram.nrows();
    let eig = SymmetricEigen::new(conditioned(&gram));
    let floor = 1e-14 * eig.eigenvalues.iter().fold(0.0_f64, |m, &x| m.max(x.abs())).max(1e-300);
    if eig.eigenvalues.iter().any(|&l| l <= floor) {
        return Err(Error::InvalidArgument("Löwdin orthonormalization of linearly dependent vectors".into()));
    }
    let mut inv_sqrt = DMatrix::<C64>::zeros(k, k);
    for i in 0..k {
        inv_sqrt[(i, i)] = C64::new(eig.eigenvalues[i].powf(-0.5), 0.0);
    }
    let u = &eig.eigenvectors;
    Ok(v * (u * inv_sqrt * u.adjoint()))
}

/// Singular values (descending) and right singular vectors as columns.
///
/// Goes through faer: nalgebra's SVD loses accuracy on clustered singular
/// values.
pub fn svd_right<T>(m: &DMatrix<T>) -> Result<(Vec<f64>, DMatrix<T>)>
where
    T: nalgebra::ComplexField<RealField = f64> + Copy + faer::traits::ComplexField,
{
    let a = faer::Mat::<T>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = a.thin_svd().map_err(|e| Error::InvalidArgument(format!("svd did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let values: Vec<f64> = (0..s.nrows()).map(|k| nalgebra::ComplexField::real(s[k])).collect();
    Ok((values, DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)])))
}

/// Frobenius norm of the off-diagonal part of a square matrix.
pub fn offdiagonal_frobenius(m: &DMatrix<C64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}
