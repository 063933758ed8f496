use num_complex::Complex64;

use super::sector::SectorLattice;
use super::space::{BasisLabel, TwoModeSpace};
use super::unitary::{LiftedUnitary, ModeUnitary};
use crate::error::{Error, Result};

/// Complex amplitude vector over the two-mode number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: TwoModeSpace,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn from_amplitudes(space: TwoModeSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dimension() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.dimension()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        Ok(Self { space, amplitudes })
    }

    pub fn number_state(space: TwoModeSpace, n: usize, m: usize) -> Result<Self> {
        let i = space.checked_index(n, m)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dimension()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    pub fn vacuum(space: TwoModeSpace) -> Self {
        Self::number_state(space, 0, 0).expect("vacuum fits any cutoff")
    }

    pub fn space(&self) -> TwoModeSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Amplitude on `|n, m⟩`; zero outside the truncation.
    pub fn amplitude(&self, n: usize, m: usize) -> Complex64 {
        match self.space.checked_index(n, m) {
            Ok(i) => self.amplitudes[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Normalization { norm });
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            space: self.space,
            amplitudes: self.amplitudes.iter().map(|&a| a * factor).collect(),
        }
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner_product(&self, other: &PureState) -> Result<Complex64> {
        self.space.ensure_same(&other.space)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `a·self + b·other` on a shared space.
    pub fn combine(&self, a: Complex64, other: &PureState, b: Complex64) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        Ok(Self {
            space: self.space,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        })
    }

    /// `⟨n̂₁ + n̂₂⟩ / ⟨ψ|ψ⟩`.
    pub fn mean_photon_number(&self) -> f64 {
        let mut weighted = 0.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let (n, m) = self.space.occupation(i);
            weighted += a.norm_sqr() * (n + m) as f64;
        }
        weighted / self.norm_sqr()
    }

    /// `(n, m)` pairs carrying a nonzero amplitude.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(i, _)| self.space.occupation(i))
    }

    pub fn lattice(&self) -> SectorLattice {
        SectorLattice::from_support(self.support())
    }

    /// Zero-pads (or truncates) to another cutoff; returns the discarded
    /// probability alongside.
    pub fn with_cutoff(&self, cutoff: usize) -> (Self, f64) {
        let target = self.space.with_cutoff(cutoff);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); target.dimension()];
        let mut dropped = 0.0;
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let (n, m) = self.space.occupation(i);
            if n <= cutoff && m <= cutoff {
                amplitudes[target.index(n, m)] = a;
            } else {
                dropped += a.norm_sqr();
            }
        }
        (
            Self {
                space: target,
                amplitudes,
            },
            dropped,
        )
    }

    /// `|n,m⟩ ↦ |m,n⟩`, keeping the basis label.
    pub fn mode_swapped(&self) -> Self {
        let s = self.space;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); s.dimension()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let (n, m) = s.occupation(i);
            amplitudes[s.index(m, n)] = a;
        }
        Self { space: s, amplitudes }
    }

    /// The same physical state written in another polarization basis.
    ///
    /// Mode permutations with phases keep the cutoff; a genuine rotation
    /// mixes photons between modes and the result is written at cutoff
    /// equal to the largest total photon number in the support.
    pub fn express_in(&self, basis: BasisLabel) -> Result<Self> {
        if basis == self.space.basis() {
            return Ok(self.clone());
        }
        let u = ModeUnitary::change_of_basis(self.space.basis(), basis);
        if let Some(map) = u.as_monomial() {
            let out_space = self.space.with_basis(basis);
            let mut amplitudes = vec![Complex64::new(0.0, 0.0); out_space.dimension()];
            for (i, &a) in self.amplitudes.iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (n, m) = self.space.occupation(i);
                let mut counts = [0usize; 2];
                counts[map[0].0] += n;
                counts[map[1].0] += m;
                let phase = map[0].1.powu(n as u32) * map[1].1.powu(m as u32);
                amplitudes[out_space.index(counts[0], counts[1])] = a * phase;
            }
            return Ok(Self {
                space: out_space,
                amplitudes,
            });
        }
        let max_total = self.support().map(|(n, m)| n + m).max().unwrap_or(0);
        LiftedUnitary::new(u, max_total).apply(self, max_total, basis)
    }
}
