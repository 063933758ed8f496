use std::borrow::Cow;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, PureState, SectorLayout};
use crate::linalg;

/// Uhlmann fidelity `F = Tr √(√ρ σ √ρ)`, clamped to `[0, 1]`.
///
/// Pure arguments short-circuit to `|⟨ψ|φ⟩|` or `√⟨ψ|σ|ψ⟩`. Otherwise both
/// operators are brought onto a common sector layout and each sector is
/// handled on the range of `ρ`: with `ρ = V Λ V†` restricted to positive
/// eigenvalues, `√ρ σ √ρ` has the same nonzero spectrum as the small matrix
/// `Λ^{1/2} V† σ V Λ^{1/2}`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.space().ensure_same(&sigma.space())?;
    let f = match (rho.ket(), sigma.ket()) {
        (Some(a), Some(b)) => a.inner_product(b)?.norm(),
        (Some(a), None) => expectation(sigma, a).max(0.0).sqrt(),
        (None, Some(b)) => expectation(rho, b).max(0.0).sqrt(),
        (None, None) => {
            let (rho, sigma) = align(rho, sigma);
            let spectra = rho.spectra()?;
            let mut total = 0.0;
            for (spectrum, block) in spectra.iter().zip(sigma.blocks()) {
                total += sector_fidelity(
                    &spectrum.values,
                    &spectrum.vectors,
                    &linalg::submatrix(block, &spectrum.active),
                )?;
            }
            total
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `√(1 − F)`.
pub fn bures_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(distance_from_fidelity(fidelity(rho, sigma)?))
}

pub fn distance_from_fidelity(f: f64) -> f64 {
    (1.0 - f.clamp(0.0, 1.0)).sqrt()
}

/// Bures distance of two pure states, `√(1 − |⟨ψ|φ⟩|)` after normalizing
/// both.
pub fn bures_distance_pure(a: &PureState, b: &PureState) -> Result<f64> {
    let f = a.normalized()?.inner_product(&b.normalized()?)?.norm();
    Ok(distance_from_fidelity(f))
}

/// Fidelity of two dense Hermitian positive matrices of equal size.
pub fn fidelity_matrices(rho: &Mat<Complex64>, sigma: &Mat<Complex64>) -> Result<f64> {
    if rho.nrows() != sigma.nrows() || rho.ncols() != sigma.ncols() {
        return Err(Error::IncompatibleSpaces {
            left: format!("{}×{}", rho.nrows(), rho.ncols()),
            right: format!("{}×{}", sigma.nrows(), sigma.ncols()),
        });
    }
    let (values, vectors) = linalg::hermitian_eigen(rho)?;
    Ok(sector_fidelity(&values, &vectors, sigma)?.clamp(0.0, 1.0))
}

/// Independent route: `F = Σ √λ_i` over the eigenvalues of the (non-Hermitian)
/// product `ρσ`, from a general dense eigensolver.
pub fn fidelity_product_spectrum(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    rho.space().ensure_same(&sigma.space())?;
    let product = rho.to_dense() * sigma.to_dense();
    let eig = product.eigenvalues().map_err(|_| Error::Eigen)?;
    let top = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = eig.len() as f64 * f64::EPSILON * top;
    let f: f64 = eig.iter().filter(|z| z.re > floor).map(|z| z.re.sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

fn sector_fidelity(values: &[f64], vectors: &Mat<Complex64>, sigma: &Mat<Complex64>) -> Result<f64> {
    // numerical rank: eigenvalues at rounding level carry no information but
    // would each add O(√ε) through the square root
    let top = values.iter().copied().fold(0.0, f64::max);
    let floor = values.len() as f64 * f64::EPSILON * top;
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > floor).collect();
    if keep.is_empty() {
        return Ok(0.0);
    }
    let w = Mat::from_fn(vectors.nrows(), keep.len(), |i, j| {
        vectors[(i, keep[j])] * values[keep[j]].sqrt()
    });
    let mut m = w.adjoint() * sigma * &w;
    linalg::symmetrize(&mut m);
    let mu = linalg::hermitian_eigenvalues(&m)?;
    let top = mu.iter().copied().fold(0.0, f64::max);
    let floor = mu.len() as f64 * f64::EPSILON * top;
    Ok(mu.into_iter().filter(|&v| v > floor).map(f64::sqrt).sum())
}

fn expectation(rho: &DensityOperator, psi: &PureState) -> f64 {
    let amps = psi.amplitudes();
    let mut total = Complex64::new(0.0, 0.0);
    for (idx, b) in rho.layout().sectors().iter().zip(rho.blocks()) {
        for j in 0..idx.len() {
            let aj = amps[idx[j]];
            if aj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..idx.len() {
                total += amps[idx[i]].conj() * b[(i, j)] * aj;
            }
        }
    }
    total.re
}

fn align<'a>(
    rho: &'a DensityOperator,
    sigma: &'a DensityOperator,
) -> (Cow<'a, DensityOperator>, Cow<'a, DensityOperator>) {
    let (lr, ls) = (rho.layout().lattice(), sigma.layout().lattice());
    if lr == ls {
        return (Cow::Borrowed(rho), Cow::Borrowed(sigma));
    }
    let joint = lr.join(ls);
    let layout = Arc::new(SectorLayout::new(&rho.space(), joint));
    let rho = if joint == lr {
        Cow::Borrowed(rho)
    } else {
        Cow::Owned(rho.regroup_into(layout.clone()))
    };
    let sigma = if joint == ls {
        Cow::Borrowed(sigma)
    } else {
        Cow::Owned(sigma.regroup_into(layout))
    };
    (rho, sigma)
}
