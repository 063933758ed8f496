//! Distinguishability measures and loss sweeps.

mod closed_form;
mod fidelity;
mod sweep;

pub use closed_form::{coherent_mqs_distance_closed, coherent_pointer_distance_closed};
pub use fidelity::{
    bures_distance, bures_distance_pure, distance_from_fidelity, fidelity, fidelity_matrices, fidelity_product_spectrum,
};
pub use sweep::{
    covariance_chain, default_x_grid, filtered_sweep, filtered_sweeps, inflexion_points, is_nonincreasing,
    CovarianceChain, DistanceModel, Family, Sample, SweepCurve, SweepOptions, REFERENCE_TAIL_TOL,
};
