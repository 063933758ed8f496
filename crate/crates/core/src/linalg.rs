//! Thin helpers over faer for the Hermitian eigenproblems used everywhere.

use std::borrow::Cow;

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if a.nrows() == 1 {
        return Ok((vec![a[(0, 0)].re], Mat::from_fn(1, 1, |_, _| Complex64::new(1.0, 0.0))));
    }
    let evd = flush_tiny(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigen)?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &Mat<Complex64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    flush_tiny(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigen)
}

/// Zeroes entries more than 200 orders of magnitude below the largest, and
/// anything below `1e-280`. Heavily damped states carry such entries (down to
/// subnormals), which contribute nothing but can stall the eigensolver.
fn flush_tiny(a: &Mat<Complex64>) -> Cow<'_, Mat<Complex64>> {
    let mut top = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            top = top.max(a[(i, j)].norm());
        }
    }
    let floor = (top * 1e-200).max(1e-280);
    let tiny = |z: Complex64| z != Complex64::new(0.0, 0.0) && z.norm() < floor;
    if !(0..a.ncols()).any(|j| (0..a.nrows()).any(|i| tiny(a[(i, j)]))) {
        return Cow::Borrowed(a);
    }
    Cow::Owned(Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        if tiny(z) {
            Complex64::new(0.0, 0.0)
        } else {
            z
        }
    }))
}

/// Largest `|a_ij − conj(a_ji)|`.
pub fn hermiticity_deviation(a: &Mat<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..=j.min(a.nrows().saturating_sub(1)) {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `V diag(w) V†` for real weights `w`.
pub fn reconstruct(vectors: &Mat<Complex64>, weights: &[f64]) -> Mat<Complex64> {
    let scaled = Mat::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * weights[j]);
    let mut out = &scaled * vectors.adjoint();
    symmetrize(&mut out);
    out
}

/// Replaces `a` by `(a + a†)/2`.
pub fn symmetrize(a: &mut Mat<Complex64>) {
    let n = a.nrows();
    for j in 0..n {
        a[(j, j)] = Complex64::new(a[(j, j)].re, 0.0);
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
}

/// Principal submatrix on `idx`.
pub fn submatrix(a: &Mat<Complex64>, idx: &[usize]) -> Mat<Complex64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_pauli_y() {
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, -1.0),
            (1, 0) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(0.0, 0.0),
        });
        let (w, v) = hermitian_eigen(&a).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
        let back = reconstruct(&v, &w);
        for i in 0..2 {
            for j in 0..2 {
                assert!((back[(i, j)] - a[(i, j)]).norm() < 1e-14);
            }
        }
    }
}
