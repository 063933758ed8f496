//! Beam-splitter photon loss acting identically on both polarization modes,
//! with the reflected beam traced out.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityOperator;

/// Eigenvalues in `[−REPAIR_FLOOR, 0)` after propagation are treated as
/// rounding noise and clipped.
pub const REPAIR_FLOOR: f64 = 1e-9;

/// Reflectivity `R` (fraction lost); transmittivity `T = 1 − R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    r: f64,
}

impl LossParams {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("reflectivity {r} outside [0, 1]")));
        }
        Ok(Self { r })
    }

    pub fn none() -> Self {
        Self { r: 0.0 }
    }

    pub fn reflectivity(&self) -> f64 {
        self.r
    }

    pub fn transmittivity(&self) -> f64 {
        1.0 - self.r
    }

    /// Two successive beam splitters multiply their transmittivities.
    pub fn then(self, other: LossParams) -> LossParams {
        let t = self.transmittivity() * other.transmittivity();
        LossParams {
            r: (1.0 - t).clamp(0.0, 1.0),
        }
    }
}

/// `√(C(n,k) T^{n−k} R^k)` for `0 ≤ k ≤ n ≤ cutoff`, row `n`, column `k`.
///
/// Rows come from the Pascal-type recurrence `b(n,k) = T b(n−1,k) + R b(n−1,k−1)`
/// on the probabilities, which never forms a large binomial coefficient.
pub fn loss_amplitudes(cutoff: usize, loss: LossParams) -> Vec<Vec<f64>> {
    let (t, r) = (loss.transmittivity(), loss.reflectivity());
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(cutoff + 1);
    let mut prev = vec![1.0];
    for n in 0..=cutoff {
        if n > 0 {
            let mut next = vec![0.0; n + 1];
            for k in 0..=n {
                let stay = if k < n { t * prev[k] } else { 0.0 };
                let lose = if k > 0 { r * prev[k - 1] } else { 0.0 };
                next[k] = stay + lose;
            }
            prev = next;
        }
        rows.push(prev.iter().map(|p| p.sqrt()).collect());
    }
    rows
}

/// Single-mode Kraus operators `K_k|n⟩ = √(C(n,k) T^{n−k} R^k) |n−k⟩`,
/// `k = 0..=cutoff`.
pub fn loss_kraus(cutoff: usize, loss: LossParams) -> Vec<Mat<Complex64>> {
    let amps = loss_amplitudes(cutoff, loss);
    (0..=cutoff)
        .map(|k| {
            let mut kk = Mat::<Complex64>::zeros(cutoff + 1, cutoff + 1);
            for n in k..=cutoff {
                kk[(n - k, n)] = Complex64::new(amps[n][k], 0.0);
            }
            kk
        })
        .collect()
}

/// Loss on a single-mode density matrix of size `cutoff + 1`.
pub fn apply_loss_single_mode(rho: &Mat<Complex64>, loss: LossParams) -> Mat<Complex64> {
    let d = rho.nrows();
    if loss.reflectivity() == 0.0 || d == 0 {
        return rho.clone();
    }
    let amps = loss_amplitudes(d - 1, loss);
    let mut out = Mat::<Complex64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let v = rho[(i, j)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..=i.min(j) {
                out[(i - k, j - k)] += v * (amps[i][k] * amps[j][k]);
            }
        }
    }
    out
}

fn is_zero(b: &Mat<Complex64>) -> bool {
    (0..b.ncols()).all(|j| (0..b.nrows()).all(|i| b[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// `ρ_T = Σ_{k,l} (K_k ⊗ K_l) ρ (K_k ⊗ K_l)†`.
///
/// The two modes are damped one after the other, sector by sector; an
/// entry `⟨n,m|ρ|n',m'⟩` moves to `⟨n−k,m|·|n'−k,m'⟩`, which keeps its offset
/// and therefore stays inside the operator's sector structure.
#[allow(clippy::needless_range_loop)]
pub fn apply_loss(rho: &DensityOperator, loss: LossParams) -> Result<DensityOperator> {
    if loss.reflectivity() == 0.0 {
        return Ok(rho.clone());
    }
    let space = rho.space();
    let amps = loss_amplitudes(space.cutoff(), loss);
    let layout = rho.layout_arc().clone();
    let mut blocks = rho.blocks().to_vec();
    for mode in 0..2 {
        let mut out: Vec<Mat<Complex64>> = layout
            .sectors()
            .iter()
            .map(|idx| Mat::zeros(idx.len(), idx.len()))
            .collect();
        for (idx, b) in layout.sectors().iter().zip(&blocks) {
            if is_zero(b) {
                continue;
            }
            let counts: Vec<usize> = idx
                .iter()
                .map(|&i| {
                    let (n, m) = space.occupation(i);
                    if mode == 0 {
                        n
                    } else {
                        m
                    }
                })
                .collect();
            let top = counts.iter().copied().max().unwrap_or(0);
            for k in 0..=top {
                // elements that can lose k photons from `mode`, with their new location
                let movable: Vec<(usize, usize, f64)> = (0..idx.len())
                    .filter(|&p| counts[p] >= k)
                    .map(|p| {
                        let (n, m) = space.occupation(idx[p]);
                        let i = if mode == 0 {
                            space.index(n - k, m)
                        } else {
                            space.index(n, m - k)
                        };
                        let (_, pos) = layout.locate(i);
                        (p, pos, amps[counts[p]][k])
                    })
                    .collect();
                let Some(&(p0, _, _)) = movable.first() else {
                    break;
                };
                let (n, m) = space.occupation(idx[p0]);
                let target = if mode == 0 {
                    space.index(n - k, m)
                } else {
                    space.index(n, m - k)
                };
                let dst = &mut out[layout.locate(target).0];
                for &(j, tj, wj) in &movable {
                    if wj == 0.0 {
                        continue;
                    }
                    for &(i, ti, wi) in &movable {
                        dst[(ti, tj)] += b[(i, j)] * (wi * wj);
                    }
                }
            }
        }
        blocks = out;
    }
    for b in &mut blocks {
        crate::linalg::symmetrize(b);
    }
    DensityOperator::from_parts(space, layout, blocks).ensure_positive_within(REPAIR_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{BasisLabel, PureState, TwoModeSpace};
    use crate::states;

    fn loss(r: f64) -> LossParams {
        LossParams::new(r).unwrap()
    }

    #[test]
    fn reflectivity_range() {
        assert!(LossParams::new(-0.1).is_err());
        assert!(LossParams::new(1.1).is_err());
        assert!(LossParams::new(f64::NAN).is_err());
        assert_eq!(loss(0.25).transmittivity(), 0.75);
    }

    #[test]
    fn lossless_kraus_is_identity() {
        let ks = loss_kraus(4, loss(0.0));
        for (k, op) in ks.iter().enumerate() {
            for j in 0..5 {
                for i in 0..5 {
                    let want = if k == 0 && i == j { 1.0 } else { 0.0 };
                    assert_eq!(op[(i, j)], Complex64::new(want, 0.0));
                }
            }
        }
    }

    #[test]
    fn total_loss_empties_every_mode() {
        let ks = loss_kraus(5, loss(1.0));
        for n in 0..=5 {
            assert_eq!(ks[n][(0, n)], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn single_photon_kraus() {
        let ks = loss_kraus(1, loss(0.3));
        assert!((ks[1][(0, 1)].re - 0.3f64.sqrt()).abs() < 1e-15);
        assert!((ks[0][(1, 1)].re - 0.7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kraus_completeness() {
        for r in [0.0, 0.13, 0.5, 0.87, 1.0] {
            let ks = loss_kraus(12, loss(r));
            let mut sum = Mat::<Complex64>::zeros(13, 13);
            for k in &ks {
                sum += k.adjoint() * k;
            }
            for j in 0..13 {
                for i in 0..13 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((sum[(i, j)] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn binomial_rows_match_direct_evaluation() {
        let amps = loss_amplitudes(20, loss(0.35));
        let binom = |n: u64, k: u64| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        for n in 0..=20u64 {
            for k in 0..=n {
                let want = (binom(n, k) * 0.65f64.powi((n - k) as i32) * 0.35f64.powi(k as i32)).sqrt();
                assert!((amps[n as usize][k as usize] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn single_photon_channel() {
        let s = TwoModeSpace::new(2, BasisLabel::hv());
        let rho = DensityOperator::from_pure(&PureState::number_state(s, 1, 0).unwrap()).unwrap();
        let out = apply_loss(&rho, loss(0.4)).unwrap();
        let d = out.to_dense();
        for j in 0..9 {
            for i in 0..9 {
                let want = match (s.occupation(i), s.occupation(j)) {
                    ((1, 0), (1, 0)) => 0.6,
                    ((0, 0), (0, 0)) => 0.4,
                    _ => 0.0,
                };
                assert!((d[(i, j)].re - want).abs() < 1e-15 && d[(i, j)].im == 0.0);
            }
        }
    }

    #[test]
    fn coherent_amplitude_is_damped() {
        let alpha = Complex64::new(1.1, -0.6);
        let s = TwoModeSpace::new(30, BasisLabel::hv());
        let rho = DensityOperator::from_pure(&states::coherent_state(alpha, &s, 1e-12).unwrap()).unwrap();
        let out = apply_loss(&rho, loss(0.3)).unwrap();
        let target = states::coherent_state(alpha * 0.7f64.sqrt(), &s, 1e-12).unwrap();
        // ⟨β|ρ|β⟩ = 1 for the damped coherent state
        let a = target.amplitudes();
        let d = out.to_dense();
        let mut overlap = Complex64::new(0.0, 0.0);
        for j in 0..s.dimension() {
            for i in 0..s.dimension() {
                overlap += a[i].conj() * d[(i, j)] * a[j];
            }
        }
        assert!((overlap.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mean_photons_scale_with_transmittivity() {
        let g = states::GainParams::new(0.5).unwrap();
        let c = states::pole_cutoff(g, 1e-12).unwrap();
        let s = TwoModeSpace::new(c, BasisLabel::hv());
        let rho =
            DensityOperator::from_pure(&states::amplified_pole_state(g, states::Pole::H, &s, 1e-12).unwrap()).unwrap();
        let n0 = rho.mean_photon_number();
        for r in [0.1, 0.5, 0.9] {
            let out = apply_loss(&rho, loss(r)).unwrap();
            assert!((out.mean_photon_number() - (1.0 - r) * n0).abs() < 1e-10);
            assert!((out.trace() - 1.0).abs() < 1e-12);
            out.validate().unwrap();
        }
    }

    #[test]
    fn single_mode_matches_kraus_sum() {
        let d = 7;
        let psi: Vec<Complex64> = (0..d)
            .map(|n| Complex64::new(1.0 / (n + 1) as f64, 0.1 * n as f64))
            .collect();
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let rho = Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        let l = loss(0.37);
        let fast = apply_loss_single_mode(&rho, l);
        let mut slow = Mat::<Complex64>::zeros(d, d);
        for k in loss_kraus(d - 1, l) {
            slow += &k * &rho * k.adjoint();
        }
        for j in 0..d {
            for i in 0..d {
                assert!((fast[(i, j)] - slow[(i, j)]).norm() < 1e-14);
            }
        }
    }
}
