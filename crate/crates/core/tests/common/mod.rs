#![allow(dead_code)]

use mqslab::{BasisLabel, DensityOperator, PureState, TwoModeSpace};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random normalized state supported on total photon number `≤ max_total`.
pub fn random_pure(space: TwoModeSpace, max_total: usize, rng: &mut impl Rng) -> PureState {
    let amps = (0..space.dimension())
        .map(|i| {
            let (n, m) = space.occupation(i);
            if n + m <= max_total {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    PureState::from_amplitudes(space, amps).unwrap().normalized().unwrap()
}

pub fn random_mixed(space: TwoModeSpace, max_total: usize, members: usize, rng: &mut impl Rng) -> DensityOperator {
    let mut weights: Vec<f64> = (0..members).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let ensemble: Vec<(f64, PureState)> = weights
        .into_iter()
        .map(|w| (w, random_pure(space, max_total, rng)))
        .collect();
    DensityOperator::from_ensemble(&ensemble).unwrap()
}

pub fn hv(cutoff: usize) -> TwoModeSpace {
    TwoModeSpace::new(cutoff, BasisLabel::hv())
}

pub fn max_abs(a: &faer::Mat<Complex64>, b: &faer::Mat<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Wishart-distributed full-rank density matrix.
pub fn random_density_matrix(d: usize, rng: &mut impl Rng) -> faer::Mat<Complex64> {
    let v = faer::Mat::<Complex64>::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &v * v.adjoint();
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    m * faer::Scale(Complex64::new(1.0 / tr, 0.0))
}
