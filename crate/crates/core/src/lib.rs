//! Numerical laboratory for the decoherence of amplified macro-qubits.
//!
//! The crate builds the multiphoton states produced by a quantum-injected
//! optical parametric amplifier, along with coherent-state cats for
//! comparison, in a truncated two-mode Fock space. It then propagates them
//! through a beam-splitter loss channel and measures how distinguishable
//! they remain with the Bures distance `D = √(1 − F)`, either directly or
//! after a photon-number-difference threshold filter.
//!
//! ```
//! use mqslab::{metrics, states, BasisLabel, GainParams, TwoModeSpace};
//!
//! let gain = GainParams::new(0.8).unwrap();
//! let cutoff = states::equatorial_cutoff(gain, 1e-8).unwrap();
//! let space = TwoModeSpace::new(cutoff, BasisLabel::plus_minus());
//! let (plus, minus) = states::equatorial_pair(gain, &space, 1e-8).unwrap();
//! let d = metrics::bures_distance_pure(&plus, &minus).unwrap();
//! assert!((d - 1.0).abs() < 1e-12);
//! ```

// `!(a <= b)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod metrics;
pub mod ofilter;
pub mod states;

pub use channels::{apply_loss, loss_kraus, LossParams};
pub use error::{Error, Result};
pub use fock::{
    density_from_pure, inner_product, lift_mode_unitary, number_state, BasisLabel, DensityOperator, LiftedUnitary,
    ModeUnitary, PureState, TwoModeSpace,
};
pub use metrics::{bures_distance, fidelity, Family, Sample, SweepCurve};
pub use ofilter::{apply_filter, of_projector, OfThreshold};
pub use states::{EquatorialPhase, GainParams, Pole};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
