use std::sync::{Arc, OnceLock};

use faer::Mat;
use num_complex::Complex64;

use super::pure::PureState;
use super::sector::{SectorLattice, SectorLayout};
use super::space::TwoModeSpace;
use crate::error::{Error, Result};
use crate::linalg;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const PURE_NORM_TOL: f64 = 1e-8;

/// Spectral data of one sector, restricted to the basis states whose
/// diagonal entry is nonzero (for a positive operator every other row
/// and column vanishes identically).
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub active: Vec<usize>,
    pub values: Vec<f64>,
    pub vectors: Mat<Complex64>,
}

impl SectorSpectrum {
    pub fn min_value(&self, sector_len: usize) -> f64 {
        let m = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        if self.active.len() < sector_len {
            m.min(0.0)
        } else {
            m
        }
    }
}

/// Hermitian, positive, unit-trace operator on a [`TwoModeSpace`].
///
/// Stored block diagonally over the cosets of a [`SectorLattice`]; entries
/// between different cosets are zero by construction.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    space: TwoModeSpace,
    layout: Arc<SectorLayout>,
    blocks: Vec<Mat<Complex64>>,
    ket: Option<Arc<PureState>>,
    spectra: OnceLock<Arc<Vec<SectorSpectrum>>>,
}

impl DensityOperator {
    /// `|ψ⟩⟨ψ|` for a state normalized to within `1e-8`; the ket is
    /// renormalized so the trace is exactly one.
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        let norm = psi.norm();
        if !((norm - 1.0).abs() <= PURE_NORM_TOL) {
            return Err(Error::Normalization { norm });
        }
        let psi = psi.normalized()?;
        let space = psi.space();
        let layout = Arc::new(SectorLayout::new(&space, psi.lattice()));
        let amps = psi.amplitudes();
        let blocks = layout
            .sectors()
            .iter()
            .map(|idx| Mat::from_fn(idx.len(), idx.len(), |i, j| amps[idx[i]] * amps[idx[j]].conj()))
            .collect();
        Ok(Self {
            space,
            layout,
            blocks,
            ket: Some(Arc::new(psi)),
            spectra: OnceLock::new(),
        })
    }

    /// `Σ_k w_k |ψ_k⟩⟨ψ_k|` with weights summing to one.
    pub fn from_ensemble(members: &[(f64, PureState)]) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidParameter("empty ensemble".into()));
        };
        let space = first.space();
        let total: f64 = members.iter().map(|(w, _)| *w).sum();
        if members.iter().any(|(w, _)| !(*w >= 0.0)) || !((total - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::InvalidParameter(format!("ensemble weights sum to {total}")));
        }
        let mut lattice = SectorLattice::trivial();
        let mut kets = Vec::with_capacity(members.len());
        for (w, psi) in members {
            space.ensure_same(&psi.space())?;
            let psi = psi.normalized()?;
            let first = psi.support().next();
            if let Some(f) = first {
                for (n, m) in psi.support() {
                    lattice = lattice.with((n as i64 - f.0 as i64, m as i64 - f.1 as i64));
                }
            }
            kets.push((*w, psi));
        }
        // mixing different supports does not create coherences between them
        let layout = Arc::new(SectorLayout::new(&space, lattice));
        let mut blocks: Vec<Mat<Complex64>> = layout
            .sectors()
            .iter()
            .map(|idx| Mat::zeros(idx.len(), idx.len()))
            .collect();
        for (w, psi) in &kets {
            let amps = psi.amplitudes();
            for (s, idx) in layout.sectors().iter().enumerate() {
                let b = &mut blocks[s];
                for j in 0..idx.len() {
                    let aj = amps[idx[j]].conj() * *w;
                    if aj == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for i in 0..idx.len() {
                        b[(i, j)] += amps[idx[i]] * aj;
                    }
                }
            }
        }
        let ket = match kets.as_slice() {
            [(_, psi)] => Some(Arc::new(psi.clone())),
            _ => None,
        };
        let mut rho = Self::from_parts(space, layout, blocks);
        rho.ket = ket;
        Ok(rho)
    }

    /// Validates a dense matrix against the density-operator invariants.
    pub fn from_matrix(space: TwoModeSpace, matrix: &Mat<Complex64>) -> Result<Self> {
        let d = space.dimension();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidDensity(format!(
                "{}×{} matrix for dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut lattice = SectorLattice::trivial();
        for j in 0..d {
            let (nj, mj) = space.occupation(j);
            for i in 0..d {
                if matrix[(i, j)] != Complex64::new(0.0, 0.0) {
                    let (ni, mi) = space.occupation(i);
                    lattice = lattice.with((ni as i64 - nj as i64, mi as i64 - mj as i64));
                }
            }
        }
        let layout = Arc::new(SectorLayout::new(&space, lattice));
        let blocks = layout
            .sectors()
            .iter()
            .map(|idx| linalg::submatrix(matrix, idx))
            .collect();
        let rho = Self::from_parts(space, layout, blocks);
        if linalg::hermiticity_deviation(matrix) > HERMITIAN_TOL {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts(space: TwoModeSpace, layout: Arc<SectorLayout>, blocks: Vec<Mat<Complex64>>) -> Self {
        debug_assert_eq!(layout.len(), blocks.len());
        Self {
            space,
            layout,
            blocks,
            ket: None,
            spectra: OnceLock::new(),
        }
    }

    pub fn space(&self) -> TwoModeSpace {
        self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn layout(&self) -> &SectorLayout {
        &self.layout
    }

    pub(crate) fn layout_arc(&self) -> &Arc<SectorLayout> {
        &self.layout
    }

    pub fn blocks(&self) -> &[Mat<Complex64>] {
        &self.blocks
    }

    /// The normalized ket when the operator is known to be `|ψ⟩⟨ψ|`.
    pub fn ket(&self) -> Option<&PureState> {
        self.ket.as_deref()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (si, pi) = self.layout.locate(i);
        let (sj, pj) = self.layout.locate(j);
        if si != sj {
            return Complex64::new(0.0, 0.0);
        }
        self.blocks[si][(pi, pj)]
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let d = self.dimension();
        let mut out = Mat::<Complex64>::zeros(d, d);
        for (idx, b) in self.layout.sectors().iter().zip(&self.blocks) {
            for j in 0..idx.len() {
                for i in 0..idx.len() {
                    out[(idx[i], idx[j])] = b[(i, j)];
                }
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        for (idx, b) in self.layout.sectors().iter().zip(&self.blocks) {
            for (p, &i) in idx.iter().enumerate() {
                out[i] = b[(p, p)].re;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let mut s = 0.0;
                for j in 0..b.ncols() {
                    for i in 0..b.nrows() {
                        s += b[(i, j)].norm_sqr();
                    }
                }
                s
            })
            .sum()
    }

    /// `Tr(ρ (n̂₁ + n̂₂))`.
    pub fn mean_photon_number(&self) -> f64 {
        self.diagonal()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (n, m) = self.space.occupation(i);
                p * (n + m) as f64
            })
            .sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::hermiticity_deviation)
            .fold(0.0, f64::max)
    }

    /// Eigen-decomposition of every sector, computed once and cached.
    pub fn spectra(&self) -> Result<&[SectorSpectrum]> {
        if let Some(s) = self.spectra.get() {
            return Ok(s.as_slice());
        }
        let computed = self.blocks.iter().map(sector_spectrum).collect::<Result<Vec<_>>>()?;
        Ok(self.spectra.get_or_init(|| Arc::new(computed)).as_slice())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        if self.ket.is_some() {
            // spectrum {1, 0, 0, ...}
            return Ok(if self.dimension() == 1 { 1.0 } else { 0.0 });
        }
        let spectra = self.spectra()?;
        Ok(spectra
            .iter()
            .zip(self.layout.sectors())
            .map(|(s, idx)| s.min_value(idx.len()))
            .fold(f64::INFINITY, f64::min))
    }

    /// Hermitian within `1e-12`, unit trace within `1e-10`, smallest
    /// eigenvalue at least `−1e-10`.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("hermiticity deviation {herm:.3e}")));
        }
        let tr = self.trace();
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -POSITIVITY_TOL {
            return Err(Error::NegativeEigenvalue {
                value: min,
                floor: -POSITIVITY_TOL,
            });
        }
        Ok(())
    }

    /// Accepts eigenvalues down to `−floor` and rejects anything lower.
    pub(crate) fn ensure_positive_within(self, floor: f64) -> Result<Self> {
        let mut min = f64::INFINITY;
        for b in &self.blocks {
            if let Some(m) = active_eigenvalues(b)?.into_iter().reduce(f64::min) {
                min = min.min(m);
            }
        }
        if min < -floor {
            return Err(Error::NegativeEigenvalue {
                value: min,
                floor: -floor,
            });
        }
        Ok(self)
    }

    /// Clips rounding-level negative eigenvalues to zero and renormalizes.
    pub fn clip_negative(self) -> Result<Self> {
        if self.spectra()?.iter().all(|s| s.values.iter().all(|&v| v >= 0.0)) {
            return Ok(self);
        }
        let spectra = self.spectra()?.to_vec();
        let total: f64 = spectra.iter().flat_map(|s| s.values.iter()).map(|v| v.max(0.0)).sum();
        let mut blocks = self.blocks;
        let mut clipped = Vec::with_capacity(spectra.len());
        for (b, s) in blocks.iter_mut().zip(spectra) {
            let w: Vec<f64> = s.values.iter().map(|v| v.max(0.0) / total).collect();
            if s.values.iter().any(|&v| v < 0.0) {
                let sub = linalg::reconstruct(&s.vectors, &w);
                let mut full = Mat::<Complex64>::zeros(b.nrows(), b.ncols());
                for (jj, &j) in s.active.iter().enumerate() {
                    for (ii, &i) in s.active.iter().enumerate() {
                        full[(i, j)] = sub[(ii, jj)];
                    }
                }
                *b = full;
            } else {
                *b = &*b * faer::Scale(Complex64::new(1.0 / total, 0.0));
            }
            clipped.push(SectorSpectrum {
                active: s.active,
                values: w,
                vectors: s.vectors,
            });
        }
        let out = Self {
            space: self.space,
            layout: self.layout,
            blocks,
            ket: None,
            spectra: OnceLock::new(),
        };
        let _ = out.spectra.set(Arc::new(clipped));
        Ok(out)
    }

    /// The same operator over a coarser (containing) lattice.
    pub fn regroup(&self, lattice: SectorLattice) -> Self {
        if lattice == self.layout.lattice() {
            return self.clone();
        }
        let layout = Arc::new(SectorLayout::new(&self.space, lattice));
        self.regroup_into(layout)
    }

    pub(crate) fn regroup_into(&self, layout: Arc<SectorLayout>) -> Self {
        if *layout == *self.layout {
            let mut out = self.clone();
            out.layout = layout;
            return out;
        }
        let mut blocks: Vec<Mat<Complex64>> = layout
            .sectors()
            .iter()
            .map(|idx| Mat::zeros(idx.len(), idx.len()))
            .collect();
        for (idx, b) in self.layout.sectors().iter().zip(&self.blocks) {
            for j in 0..idx.len() {
                let (s, pj) = layout.locate(idx[j]);
                for i in 0..idx.len() {
                    let (s2, pi) = layout.locate(idx[i]);
                    debug_assert_eq!(s, s2, "regroup target must be coarser");
                    blocks[s][(pi, pj)] = b[(i, j)];
                }
            }
        }
        Self {
            space: self.space,
            layout,
            blocks,
            ket: self.ket.clone(),
            spectra: OnceLock::new(),
        }
    }

    /// Largest elementwise difference.
    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        let (a, b) = (self.to_dense(), other.to_dense());
        let mut worst = 0.0f64;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        Ok(worst)
    }
}

fn active_rows(block: &Mat<Complex64>) -> Vec<usize> {
    (0..block.nrows())
        .filter(|&p| block[(p, p)] != Complex64::new(0.0, 0.0))
        .collect()
}

fn active_eigenvalues(block: &Mat<Complex64>) -> Result<Vec<f64>> {
    let active = active_rows(block);
    if active.len() == block.nrows() {
        linalg::hermitian_eigenvalues(block)
    } else {
        linalg::hermitian_eigenvalues(&linalg::submatrix(block, &active))
    }
}

fn sector_spectrum(block: &Mat<Complex64>) -> Result<SectorSpectrum> {
    let active = active_rows(block);
    let sub = if active.len() == block.nrows() {
        block.clone()
    } else {
        linalg::submatrix(block, &active)
    };
    let (values, vectors) = linalg::hermitian_eigen(&sub)?;
    Ok(SectorSpectrum {
        active,
        values,
        vectors,
    })
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> Result<DensityOperator> {
    DensityOperator::from_pure(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::BasisLabel;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn space(c: usize) -> TwoModeSpace {
        TwoModeSpace::new(c, BasisLabel::hv())
    }

    #[test]
    fn vacuum_projector() {
        let rho = DensityOperator::from_pure(&PureState::vacuum(space(2))).unwrap();
        assert_eq!(rho.get(0, 0), Complex64::new(1.0, 0.0));
        for i in 1..9 {
            assert_eq!(rho.get(i, i), Complex64::new(0.0, 0.0));
        }
        assert_eq!(rho.trace(), 1.0);
        rho.validate().unwrap();
    }

    #[test]
    fn two_level_superposition_block() {
        let s = space(2);
        let amps: Vec<Complex64> = (0..9)
            .map(|i| match i {
                0 | 3 => Complex64::new(FRAC_1_SQRT_2, 0.0),
                _ => Complex64::new(0.0, 0.0),
            })
            .collect();
        let rho = DensityOperator::from_pure(&PureState::from_amplitudes(s, amps).unwrap()).unwrap();
        let i10 = s.index(1, 0);
        for (i, j) in [(0, 0), (0, i10), (i10, 0), (i10, i10)] {
            assert!((rho.get(i, j).re - 0.5).abs() < 1e-15);
        }
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        // idempotent: ρ² = ρ
        let d = rho.to_dense();
        let sq = &d * &d;
        for j in 0..9 {
            for i in 0..9 {
                assert!((sq[(i, j)] - d[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn unnormalized_ket_rejected() {
        let s = space(1);
        let psi = PureState::vacuum(s).scaled(Complex64::new(1.0 + 1e-6, 0.0));
        assert!(matches!(
            DensityOperator::from_pure(&psi),
            Err(Error::Normalization { .. })
        ));
        let close = PureState::vacuum(s).scaled(Complex64::new(1.0 + 1e-9, 0.0));
        let rho = DensityOperator::from_pure(&close).unwrap();
        assert_eq!(rho.trace(), 1.0);
    }

    #[test]
    fn from_matrix_checks_invariants() {
        let s = space(1);
        let mut m = Mat::<Complex64>::zeros(4, 4);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        let rho = DensityOperator::from_matrix(s, &m).unwrap();
        assert!((rho.purity() - 0.5).abs() < 1e-15);
        m[(1, 1)] = Complex64::new(0.6, 0.0);
        assert!(DensityOperator::from_matrix(s, &m).is_err());
        m[(1, 1)] = Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityOperator::from_matrix(s, &m).is_err());
        m[(1, 0)] = Complex64::new(0.0, -0.1);
        DensityOperator::from_matrix(s, &m).unwrap();
        // negative eigenvalue
        let mut n = Mat::<Complex64>::zeros(4, 4);
        n[(0, 0)] = Complex64::new(1.2, 0.0);
        n[(1, 1)] = Complex64::new(-0.2, 0.0);
        assert!(matches!(
            DensityOperator::from_matrix(s, &n),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn regroup_preserves_entries() {
        let s = space(3);
        let psi = PureState::number_state(s, 1, 0)
            .unwrap()
            .combine(
                Complex64::new(0.6, 0.0),
                &PureState::number_state(s, 3, 2).unwrap(),
                Complex64::new(0.0, 0.8),
            )
            .unwrap();
        let rho = DensityOperator::from_pure(&psi).unwrap();
        let coarse = rho.regroup(SectorLattice::full());
        assert_eq!(coarse.layout().len(), 1);
        assert_eq!(rho.max_abs_diff(&coarse).unwrap(), 0.0);
    }
}
