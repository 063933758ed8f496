//! Truncated two-mode Fock space: bases, kets, density operators and
//! passive mode transformations.

mod density;
mod pure;
mod sector;
mod space;
mod unitary;

pub use density::{
    density_from_pure, DensityOperator, SectorSpectrum, HERMITIAN_TOL, POSITIVITY_TOL, PURE_NORM_TOL, TRACE_TOL,
};
pub use pure::PureState;
pub use sector::{SectorLattice, SectorLayout};
pub use space::{BasisLabel, TwoModeSpace};
pub use unitary::{lift_mode_unitary, LiftedUnitary, ModeUnitary};

use crate::error::Result;
use num_complex::Complex64;

/// `⟨a|b⟩`.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<Complex64> {
    a.inner_product(b)
}

/// `|n, m⟩`.
pub fn number_state(space: TwoModeSpace, n: usize, m: usize) -> Result<PureState> {
    PureState::number_state(space, n, m)
}
