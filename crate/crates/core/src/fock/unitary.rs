use std::ops::Mul;

use faer::Mat;
use num_complex::Complex64;

use super::pure::PureState;
use super::space::{BasisLabel, TwoModeSpace};
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-12;
const MONOMIAL_TOL: f64 = 1e-14;

/// A 2×2 unitary acting on the two polarization modes:
/// `a_i† ↦ Σ_j u[j][i] a_j†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeUnitary {
    u: [[Complex64; 2]; 2],
}

impl ModeUnitary {
    pub fn new(u: [[Complex64; 2]; 2]) -> Result<Self> {
        let deviation = unitarity_deviation(&u);
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { u })
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self { u: [[o, z], [z, o]] }
    }

    pub fn swap() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self { u: [[z, o], [o, z]] }
    }

    /// `(1/√2)[[1, 1], [1, −1]]`
    pub fn hadamard() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { u: [[s, s], [s, -s]] }
    }

    /// SU(2) element from Euler-type angles.
    pub fn from_angles(theta: f64, alpha: f64, beta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        let a = Complex64::from_polar(c, alpha);
        let b = Complex64::from_polar(s, beta);
        Self {
            u: [[a, -b.conj()], [b, a.conj()]],
        }
    }

    /// Re-expresses states written in basis `from` in basis `to`.
    pub fn change_of_basis(from: BasisLabel, to: BasisLabel) -> Self {
        let a = from.jones();
        let b = to.jones();
        let mut u = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (j, row) in u.iter_mut().enumerate() {
            for (i, x) in row.iter_mut().enumerate() {
                // (B† A)_{ji}
                *x = (0..2).map(|k| b[k][j].conj() * a[k][i]).sum();
            }
        }
        Self { u }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.u
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.u[row][col]
    }

    /// `(target mode, phase)` for each source mode if the map only permutes
    /// modes and attaches phases.
    pub fn as_monomial(&self) -> Option<[(usize, Complex64); 2]> {
        let mut out = [(0usize, Complex64::new(0.0, 0.0)); 2];
        for (i, slot) in out.iter_mut().enumerate() {
            let (a, b) = (self.u[0][i], self.u[1][i]);
            *slot = if b.norm() < MONOMIAL_TOL && (a.norm() - 1.0).abs() < MONOMIAL_TOL {
                (0, a / a.norm())
            } else if a.norm() < MONOMIAL_TOL && (b.norm() - 1.0).abs() < MONOMIAL_TOL {
                (1, b / b.norm())
            } else {
                return None;
            };
        }
        (out[0].0 != out[1].0).then_some(out)
    }
}

impl Mul for ModeUnitary {
    type Output = ModeUnitary;

    fn mul(self, rhs: ModeUnitary) -> ModeUnitary {
        let mut u = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in u.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = self.u[r][0] * rhs.u[0][c] + self.u[r][1] * rhs.u[1][c];
            }
        }
        ModeUnitary { u }
    }
}

fn unitarity_deviation(u: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..2 {
        for c in 0..2 {
            let ip: Complex64 = (0..2).map(|r| u[r][a].conj() * u[r][c]).sum();
            let want = if a == c { 1.0 } else { 0.0 };
            let d = (ip - want).norm();
            // f64::max would swallow a NaN
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
        }
    }
    worst
}

/// Passive two-mode transformation lifted to Fock space.
///
/// Stored per total-photon-number block: block `N` is the `(N+1)×(N+1)`
/// symmetric tensor power of the mode unitary in the basis
/// `|p, N−p⟩, p = 0..=N`, with `block[N][(p_out, n_in)]`.
///
/// Blocks with `N` above the per-mode cutoff are not contained in the square
/// `(cutoff+1)²` truncation, so lifted states are written into a space large
/// enough to hold every block they touch.
#[derive(Debug, Clone)]
pub struct LiftedUnitary {
    mode: ModeUnitary,
    blocks: Vec<Mat<Complex64>>,
}

impl LiftedUnitary {
    /// Builds blocks `0..=max_total` by the creation-operator recursion
    /// `|n,m⟩ = a_0†|n−1,m⟩/√n`, which never forms large binomial sums.
    pub fn new(mode: ModeUnitary, max_total: usize) -> Self {
        let u = mode.u;
        let mut blocks: Vec<Mat<Complex64>> = Vec::with_capacity(max_total + 1);
        blocks.push(Mat::from_fn(1, 1, |_, _| Complex64::new(1.0, 0.0)));
        let sq: Vec<f64> = (0..=max_total + 1).map(|k| (k as f64).sqrt()).collect();
        for total in 1..=max_total {
            let prev = &blocks[total - 1];
            let mut cur = Mat::<Complex64>::zeros(total + 1, total + 1);
            for n in 0..=total {
                let m = total - n;
                // raise either mode 0 (from |n−1,m⟩) or mode 1 (from |0,m−1⟩)
                let (src, c0, c1, norm) = if n > 0 {
                    (n - 1, u[0][0], u[1][0], sq[n])
                } else {
                    (0, u[0][1], u[1][1], sq[m])
                };
                for p in 0..=total {
                    let mut acc = Complex64::new(0.0, 0.0);
                    if p > 0 {
                        acc += c0 * sq[p] * prev[(p - 1, src)];
                    }
                    if p < total {
                        acc += c1 * sq[total - p] * prev[(p, src)];
                    }
                    cur[(p, n)] = acc / norm;
                }
            }
            blocks.push(cur);
        }
        Self { mode, blocks }
    }

    pub fn mode(&self) -> ModeUnitary {
        self.mode
    }

    pub fn max_total(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, total: usize) -> &Mat<Complex64> {
        &self.blocks[total]
    }

    /// Largest `‖B_N† B_N − I‖_max` over all stored blocks.
    pub fn unitarity_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let g = b.adjoint() * b;
                let mut worst = 0.0f64;
                for j in 0..g.ncols() {
                    for i in 0..g.nrows() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((g[(i, j)] - want).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Dense matrix on `space`, restricted to the square truncation.
    ///
    /// Exactly unitary on every block with `N ≤ cutoff`; blocks above that
    /// are only partially represented.
    pub fn to_matrix(&self, space: &TwoModeSpace) -> Mat<Complex64> {
        let d = space.dimension();
        let c = space.cutoff();
        let mut out = Mat::<Complex64>::zeros(d, d);
        for col in 0..d {
            let (n, m) = space.occupation(col);
            let total = n + m;
            if total > self.max_total() {
                continue;
            }
            let b = &self.blocks[total];
            for p in total.saturating_sub(c)..=total.min(c) {
                out[(space.index(p, total - p), col)] = b[(p, n)];
            }
        }
        out
    }

    /// Applies the lift to `psi`, writing the result into a space with
    /// per-mode cutoff `out_cutoff` and the basis `out_basis`.
    ///
    /// Fails if any amplitude would land outside the output truncation.
    pub fn apply(&self, psi: &PureState, out_cutoff: usize, out_basis: BasisLabel) -> Result<PureState> {
        let space = psi.space();
        let out_space = TwoModeSpace::new(out_cutoff, out_basis);
        let mut out = vec![Complex64::new(0.0, 0.0); out_space.dimension()];
        for (i, &a) in psi.amplitudes().iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (n, m) = space.occupation(i);
            let total = n + m;
            if total > self.max_total() {
                return Err(Error::InvalidParameter(format!(
                    "lift covers total photon number ≤ {}, state reaches {total}",
                    self.max_total()
                )));
            }
            let b = &self.blocks[total];
            for p in 0..=total {
                let v = b[(p, n)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let q = total - p;
                if p > out_cutoff || q > out_cutoff {
                    return Err(Error::CutoffViolation {
                        n: p,
                        m: q,
                        cutoff: out_cutoff,
                    });
                }
                out[out_space.index(p, q)] += v * a;
            }
        }
        PureState::from_amplitudes(out_space, out)
    }
}

/// Lift of `u` covering every block reachable from `space`.
pub fn lift_mode_unitary(space: &TwoModeSpace, u: ModeUnitary) -> LiftedUnitary {
    LiftedUnitary::new(u, 2 * space.cutoff())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_unitary() {
        let bad = [[c(1.0, 0.0), c(0.1, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(ModeUnitary::new(bad), Err(Error::NotUnitary { .. })));
        let nan = [[c(f64::NAN, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(ModeUnitary::new(nan).is_err());
    }

    #[test]
    fn identity_lifts_to_identity() {
        let space = TwoModeSpace::new(4, BasisLabel::hv());
        let m = lift_mode_unitary(&space, ModeUnitary::identity()).to_matrix(&space);
        for j in 0..space.dimension() {
            for i in 0..space.dimension() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m[(i, j)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn swap_relabels_modes() {
        let space = TwoModeSpace::new(3, BasisLabel::hv());
        let m = lift_mode_unitary(&space, ModeUnitary::swap()).to_matrix(&space);
        for n in 0..=3 {
            for k in 0..=3 {
                let col = space.index(n, k);
                assert!((m[(space.index(k, n), col)] - 1.0).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hadamard_on_single_photon() {
        let space = TwoModeSpace::new(2, BasisLabel::hv());
        let psi = PureState::number_state(space, 1, 0).unwrap();
        let out = lift_mode_unitary(&space, ModeUnitary::hadamard())
            .apply(&psi, 2, BasisLabel::hv())
            .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(1, 0) - s).norm() < 1e-15);
        assert!((out.amplitude(0, 1) - s).norm() < 1e-15);
        // single-photon block equals u itself
        let l = lift_mode_unitary(&space, ModeUnitary::hadamard());
        let u = ModeUnitary::hadamard().matrix();
        for n_in in 0..2 {
            for p in 0..2 {
                // block basis |p, 1−p⟩: p = 1 is mode 0
                let (row, col) = (1 - p, 1 - n_in);
                assert!((l.block(1)[(p, n_in)] - u[row][col]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_photon_hadamard_is_hong_ou_mandel() {
        let space = TwoModeSpace::new(2, BasisLabel::hv());
        let psi = PureState::number_state(space, 1, 1).unwrap();
        let out = lift_mode_unitary(&space, ModeUnitary::hadamard())
            .apply(&psi, 2, BasisLabel::hv())
            .unwrap();
        assert!(out.amplitude(1, 1).norm() < 1e-15);
        assert!((out.amplitude(2, 0).norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn monomial_detection() {
        assert!(ModeUnitary::swap().as_monomial().is_some());
        assert!(ModeUnitary::hadamard().as_monomial().is_none());
        let u = ModeUnitary::change_of_basis(BasisLabel::equatorial(std::f64::consts::PI), BasisLabel::plus_minus());
        let mono = u.as_monomial().unwrap();
        assert_eq!(mono[0].0, 1);
        assert_eq!(mono[1].0, 0);
    }

    fn su2() -> impl Strategy<Value = ModeUnitary> {
        (0.0..std::f64::consts::PI, -3.2..3.2f64, -3.2..3.2f64).prop_map(|(t, a, b)| ModeUnitary::from_angles(t, a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn lift_is_blockwise_unitary(u in su2()) {
            let l = LiftedUnitary::new(u, 40);
            prop_assert!(l.unitarity_deviation() < 1e-10);
        }

        #[test]
        fn lift_composes(u1 in su2(), u2 in su2()) {
            let space = TwoModeSpace::new(6, BasisLabel::hv());
            let a = lift_mode_unitary(&space, u1 * u2);
            let b = lift_mode_unitary(&space, u1);
            let c2 = lift_mode_unitary(&space, u2);
            for total in 0..=a.max_total() {
                let prod = b.block(total) * c2.block(total);
                for j in 0..=total {
                    for i in 0..=total {
                        prop_assert!((prod[(i, j)] - a.block(total)[(i, j)]).norm() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn lift_preserves_norm_and_photons(u in su2(), seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let space = TwoModeSpace::new(5, BasisLabel::hv());
            let amps: Vec<Complex64> = (0..space.dimension())
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let psi = PureState::from_amplitudes(space, amps).unwrap().normalized().unwrap();
            let out = lift_mode_unitary(&space, u).apply(&psi, 10, BasisLabel::hv()).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
            prop_assert!((out.mean_photon_number() - psi.mean_photon_number()).abs() < 1e-10);
        }
    }
}
