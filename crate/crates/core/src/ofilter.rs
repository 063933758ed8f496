//! Orthogonality filter: a threshold measurement on the photon-number
//! difference of the two polarization modes.
//!
//! Outcome `+1` when `n − m > k`, `−1` when `m − n > k`, inconclusive
//! otherwise. Keeping only the conclusive events projects onto
//! `|n − m| > k`. The scheme mirrors threshold detection by the human eye,
//! which likewise discards weak signals near the balance point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, TwoModeSpace};

pub use crate::metrics::{filtered_sweep, filtered_sweeps};

/// Below this success probability the filtered state is undefined.
pub const MIN_SUCCESS_PROB: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OfThreshold(pub u32);

impl OfThreshold {
    pub fn k(&self) -> u32 {
        self.0
    }

    pub fn selects(&self, n: usize, m: usize) -> bool {
        n.abs_diff(m) > self.0 as usize
    }
}

/// Diagonal projector `Π_k` stored as a mask over basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct OfProjector {
    space: TwoModeSpace,
    threshold: OfThreshold,
    mask: Vec<bool>,
}

impl OfProjector {
    pub fn space(&self) -> TwoModeSpace {
        self.space
    }

    pub fn threshold(&self) -> OfThreshold {
        self.threshold
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_selected(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn rank(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// `self ≤ other` as projectors.
    pub fn is_contained_in(&self, other: &OfProjector) -> bool {
        self.space == other.space && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn to_matrix(&self) -> faer::Mat<Complex64> {
        let d = self.mask.len();
        faer::Mat::from_fn(d, d, |i, j| {
            if i == j && self.mask[i] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

pub fn of_projector(space: &TwoModeSpace, k: OfThreshold) -> OfProjector {
    let mask = (0..space.dimension())
        .map(|i| {
            let (n, m) = space.occupation(i);
            k.selects(n, m)
        })
        .collect();
    OfProjector {
        space: *space,
        threshold: k,
        mask,
    }
}

/// Filtered state with its acceptance statistics.
#[derive(Debug, Clone)]
pub struct Filtered {
    pub state: DensityOperator,
    /// `Tr(Π_k ρ)`.
    pub success_prob: f64,
    /// Probability of outcome `+1` (`n − m > k`).
    pub plus_prob: f64,
    /// Probability of outcome `−1` (`m − n > k`).
    pub minus_prob: f64,
}

/// `Π_k ρ Π_k / Tr(Π_k ρ)`.
pub fn apply_filter(rho: &DensityOperator, k: OfThreshold) -> Result<Filtered> {
    let space = rho.space();
    let layout = rho.layout();
    let (mut plus, mut minus) = (0.0, 0.0);
    for (i, p) in rho.diagonal().into_iter().enumerate() {
        let (n, m) = space.occupation(i);
        if k.selects(n, m) {
            if n > m {
                plus += p;
            } else {
                minus += p;
            }
        }
    }
    let total = plus + minus;
    if !(total >= MIN_SUCCESS_PROB) {
        return Err(Error::EmptySelection { probability: total });
    }
    let scale = 1.0 / total;
    let blocks = layout
        .sectors()
        .iter()
        .zip(rho.blocks())
        .map(|(idx, b)| {
            let keep: Vec<bool> = idx
                .iter()
                .map(|&i| {
                    let (n, m) = space.occupation(i);
                    k.selects(n, m)
                })
                .collect();
            faer::Mat::from_fn(idx.len(), idx.len(), |i, j| {
                if keep[i] && keep[j] {
                    b[(i, j)] * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    Ok(Filtered {
        state: DensityOperator::from_parts(space, rho.layout_arc().clone(), blocks),
        success_prob: total,
        plus_prob: plus,
        minus_prob: minus,
    })
}
