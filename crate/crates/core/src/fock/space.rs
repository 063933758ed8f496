use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phases closer than this (on the circle) label the same basis.
const PHASE_EPS: f64 = 1e-12;

/// Which polarization pair the two modes of a [`TwoModeSpace`] carry.
///
/// Mode vectors are Jones vectors in `{H, V}` coordinates:
///
/// * `HorizontalVertical`: mode 0 = `H`, mode 1 = `V`.
/// * `Equatorial { phase }`: mode 0 = `(H + e^{iφ} V)/√2`,
///   mode 1 = `(e^{-iφ} H − V)/√2`.
///
/// The equatorial mode-1 phase is the one under which the squeezing
/// Hamiltonian reads `e^{-iφ}(a_φ†² − e^{2iφ} a_⊥†²)/2`, so the amplified
/// equatorial expansion applies verbatim in that basis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisLabel {
    HorizontalVertical,
    Equatorial { phase: f64 },
}

impl BasisLabel {
    pub fn hv() -> Self {
        BasisLabel::HorizontalVertical
    }

    pub fn equatorial(phase: f64) -> Self {
        BasisLabel::Equatorial {
            phase: normalize_phase(phase),
        }
    }

    /// `{+, −}`: the equatorial basis at φ = 0.
    pub fn plus_minus() -> Self {
        Self::equatorial(0.0)
    }

    /// `{R, L}` with `R = (H − iV)/√2`, i.e. the equatorial basis at φ = 3π/2.
    ///
    /// With this handedness the superposition `(Φ⁺ + iΦ⁻)` is the amplified
    /// `R` state.
    pub fn right_left() -> Self {
        Self::equatorial(1.5 * PI)
    }

    /// The equatorial phase, if any.
    pub fn phase(&self) -> Option<f64> {
        match *self {
            BasisLabel::HorizontalVertical => None,
            BasisLabel::Equatorial { phase } => Some(phase),
        }
    }

    /// Jones vectors of the two modes, as columns of a 2×2 unitary.
    pub fn jones(&self) -> [[Complex64; 2]; 2] {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match *self {
            BasisLabel::HorizontalVertical => [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            BasisLabel::Equatorial { phase } => {
                let e = Complex64::from_polar(1.0, phase);
                // rows are H/V components, columns are modes
                [[s, s * e.conj()], [s * e, -s]]
            }
        }
    }
}

impl PartialEq for BasisLabel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (BasisLabel::HorizontalVertical, BasisLabel::HorizontalVertical) => true,
            (BasisLabel::Equatorial { phase: a }, BasisLabel::Equatorial { phase: b }) => {
                phase_distance(*a, *b) < PHASE_EPS
            }
            _ => false,
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::HorizontalVertical => write!(f, "{{H,V}}"),
            BasisLabel::Equatorial { phase } => write!(f, "{{φ,φ⊥}}(φ={phase:.6})"),
        }
    }
}

pub(crate) fn normalize_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if TAU - p < PHASE_EPS {
        0.0
    } else {
        p
    }
}

pub(crate) fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Truncated two-mode bosonic Fock space.
///
/// Basis states `|n, m⟩` with `0 ≤ n, m ≤ cutoff`, indexed row-major with
/// `n` outer: `index = n·(cutoff+1) + m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeSpace {
    cutoff: usize,
    basis: BasisLabel,
}

impl TwoModeSpace {
    pub fn new(cutoff: usize, basis: BasisLabel) -> Self {
        Self { cutoff, basis }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn basis(&self) -> BasisLabel {
        self.basis
    }

    pub fn dimension(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 1)
    }

    #[inline]
    pub fn index(&self, n: usize, m: usize) -> usize {
        debug_assert!(n <= self.cutoff && m <= self.cutoff);
        n * (self.cutoff + 1) + m
    }

    pub fn checked_index(&self, n: usize, m: usize) -> Result<usize> {
        if n > self.cutoff || m > self.cutoff {
            return Err(Error::CutoffViolation {
                n,
                m,
                cutoff: self.cutoff,
            });
        }
        Ok(self.index(n, m))
    }

    /// Photon numbers `(n, m)` of basis index `i`.
    #[inline]
    pub fn occupation(&self, i: usize) -> (usize, usize) {
        (i / (self.cutoff + 1), i % (self.cutoff + 1))
    }

    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        Self {
            cutoff,
            basis: self.basis,
        }
    }

    pub fn with_basis(&self, basis: BasisLabel) -> Self {
        Self {
            cutoff: self.cutoff,
            basis,
        }
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::IncompatibleSpaces {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for TwoModeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cutoff {} in {}", self.cutoff, self.basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_is_row_major() {
        let s = TwoModeSpace::new(2, BasisLabel::hv());
        assert_eq!(s.dimension(), 9);
        assert_eq!(s.index(0, 0), 0);
        assert_eq!(s.index(0, 2), 2);
        assert_eq!(s.index(1, 0), 3);
        assert_eq!(s.occupation(7), (2, 1));
        assert!(matches!(
            s.checked_index(3, 0),
            Err(Error::CutoffViolation { n: 3, .. })
        ));
    }

    #[test]
    fn phase_labels_wrap() {
        assert_eq!(BasisLabel::equatorial(TAU), BasisLabel::plus_minus());
        assert_eq!(BasisLabel::equatorial(-PI / 2.0), BasisLabel::right_left());
        assert_ne!(BasisLabel::plus_minus(), BasisLabel::hv());
        assert_ne!(BasisLabel::plus_minus(), BasisLabel::right_left());
    }

    #[test]
    fn jones_columns_are_orthonormal() {
        for b in [BasisLabel::hv(), BasisLabel::plus_minus(), BasisLabel::equatorial(0.7)] {
            let j = b.jones();
            for a in 0..2 {
                for c in 0..2 {
                    let ip: Complex64 = (0..2).map(|r| j[r][a].conj() * j[r][c]).sum();
                    let want = if a == c { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-15);
                }
            }
        }
    }
}
