use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fidelity::{bures_distance, distance_from_fidelity, fidelity, fidelity_matrices};
use crate::channels::{apply_loss, apply_loss_single_mode, LossParams};
use crate::error::{Error, Result};
use crate::fock::{BasisLabel, DensityOperator, PureState, TwoModeSpace};
use crate::ofilter::{apply_filter, OfThreshold};
use crate::states::{self, CatParity, EquatorialPhase, GainParams, Pole, RelativePhase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `|Φ^+⟩` vs `|Φ^−⟩`, equivalently the pair of macro-superpositions.
    EquatorialMqs,
    /// `|Φ^H⟩` vs `|Φ^V⟩`.
    PolePair,
    /// `|α⟩` vs `|−α⟩`.
    CoherentPointer,
    /// Even vs odd cat.
    CoherentMqs,
    /// Equatorial pair behind the orthogonality filter.
    Filtered,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::EquatorialMqs,
        Family::PolePair,
        Family::CoherentPointer,
        Family::CoherentMqs,
        Family::Filtered,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::EquatorialMqs => "equatorial-mqs",
            Family::PolePair => "pole-pair",
            Family::CoherentPointer => "coherent-pointer",
            Family::CoherentMqs => "coherent-mqs",
            Family::Filtered => "filtered",
        }
    }

    /// Whether the family parameter is a gain (otherwise `|α|²`).
    pub fn uses_gain(&self) -> bool {
        matches!(self, Family::EquatorialMqs | Family::PolePair | Family::Filtered)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Mean number of lost photons, `R⟨n⟩₀`.
    pub x: f64,
    pub r: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partner_success_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub family: Family,
    /// Gain `g`, or `|α|²` for the coherent families.
    pub parameter: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u32>,
    pub cutoff: usize,
    pub tail_tol: f64,
    /// Zero-loss two-mode mean photon number `⟨n⟩₀` setting `x = R⟨n⟩₀`:
    /// `4 sinh²g + 1` for the amplified families, `|α|²` for the coherent ones.
    pub mean_photons: f64,
    pub samples: Vec<Sample>,
}

impl SweepCurve {
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }
}

/// Upper bound on the tail tolerance of the coherent reference families.
pub const REFERENCE_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub tail_tol: f64,
    /// Fixed per-mode cutoff; `None` picks the smallest admissible one.
    pub cutoff: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tail_tol: states::DEFAULT_TAIL_TOL,
            cutoff: None,
        }
    }
}

enum Pair {
    // both states are products across the two modes; so is the loss channel
    Product {
        rho: [Mat<Complex64>; 2],
        sigma: [Mat<Complex64>; 2],
    },
    Dense {
        rho: DensityOperator,
        sigma: DensityOperator,
    },
}

/// The two states of a family, prepared once and reused for every loss level.
pub struct DistanceModel {
    family: Family,
    parameter: f64,
    threshold: Option<OfThreshold>,
    cutoff: usize,
    tail_tol: f64,
    mean_photons: f64,
    pair: Pair,
}

impl DistanceModel {
    pub fn new(family: Family, parameter: f64, opts: &SweepOptions) -> Result<Self> {
        let tol = opts.tail_tol;
        match family {
            Family::EquatorialMqs => {
                let gain = GainParams::new(parameter)?;
                let cutoff = match opts.cutoff {
                    Some(c) => c,
                    None => states::equatorial_cutoff(gain, tol)?,
                };
                let tail = states::equatorial_tail(gain, cutoff);
                if !(tail < tol) {
                    return Err(Error::Truncation {
                        tail,
                        tolerance: tol,
                        cutoff,
                    });
                }
                let base = EquatorialPhase::new(0.0);
                let a = states::equatorial_factors(gain, base, base, cutoff)?;
                let b = states::equatorial_factors(gain, base.orthogonal(), base, cutoff)?;
                Ok(Self {
                    family,
                    parameter,
                    threshold: None,
                    cutoff,
                    tail_tol: tol,
                    mean_photons: gain.mean_photons(),
                    pair: Pair::Product {
                        rho: a.map(|f| projector(&f)),
                        sigma: b.map(|f| projector(&f)),
                    },
                })
            }
            Family::PolePair => {
                let gain = GainParams::new(parameter)?;
                let cutoff = match opts.cutoff {
                    Some(c) => c,
                    None => states::pole_cutoff(gain, tol)?,
                };
                let space = TwoModeSpace::new(cutoff, BasisLabel::hv());
                let h = states::amplified_pole_state(gain, Pole::H, &space, tol)?.normalized()?;
                let v = states::amplified_pole_state(gain, Pole::V, &space, tol)?.normalized()?;
                Self::dense(family, parameter, tol, gain.mean_photons(), &h, &v)
            }
            Family::CoherentPointer => {
                let tol = tol.min(REFERENCE_TAIL_TOL);
                let alpha = alpha_from(parameter)?;
                let cutoff = match opts.cutoff {
                    Some(c) => c,
                    None => states::coherent_cutoff(alpha, tol)?,
                };
                let space = TwoModeSpace::new(cutoff, BasisLabel::hv());
                let a = states::coherent_state(alpha, &space, tol)?.normalized()?;
                let b = states::coherent_state(-alpha, &space, tol)?.normalized()?;
                Self::dense(family, parameter, tol, parameter, &a, &b)
            }
            Family::CoherentMqs => {
                let tol = tol.min(REFERENCE_TAIL_TOL);
                let alpha = alpha_from(parameter)?;
                let cutoff = match opts.cutoff {
                    Some(c) => c,
                    None => states::cat_cutoff(alpha, CatParity::Even, tol)?.max(states::cat_cutoff(
                        alpha,
                        CatParity::Odd,
                        tol,
                    )?),
                };
                let space = TwoModeSpace::new(cutoff, BasisLabel::hv());
                let even = states::coherent_mqs(alpha, CatParity::Even, &space, tol)?;
                let odd = states::coherent_mqs(alpha, CatParity::Odd, &space, tol)?;
                Self::dense(family, parameter, tol, parameter, &even, &odd)
            }
            Family::Filtered => Err(Error::InvalidParameter(
                "the filtered family needs a threshold; use DistanceModel::filtered".into(),
            )),
        }
    }

    /// Equatorial pair at gain `g`, filtered with threshold `k` after loss.
    pub fn filtered(g: f64, k: OfThreshold, opts: &SweepOptions) -> Result<Self> {
        let gain = GainParams::new(g)?;
        let tol = opts.tail_tol;
        let cutoff = match opts.cutoff {
            Some(c) => c,
            None => states::equatorial_cutoff(gain, tol)?,
        };
        let space = TwoModeSpace::new(cutoff, BasisLabel::plus_minus());
        let (plus, minus) = states::equatorial_pair(gain, &space, tol)?;
        let (plus, minus) = (plus.normalized()?, minus.normalized()?);
        let mut model = Self::dense(Family::Filtered, g, tol, gain.mean_photons(), &plus, &minus)?;
        model.threshold = Some(k);
        Ok(model)
    }

    fn dense(
        family: Family,
        parameter: f64,
        tol: f64,
        mean_photons: f64,
        a: &PureState,
        b: &PureState,
    ) -> Result<Self> {
        Ok(Self {
            family,
            parameter,
            threshold: None,
            cutoff: a.space().cutoff(),
            tail_tol: tol,
            mean_photons,
            pair: Pair::Dense {
                rho: DensityOperator::from_pure(a)?,
                sigma: DensityOperator::from_pure(b)?,
            },
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn threshold(&self) -> Option<OfThreshold> {
        self.threshold
    }

    /// Distance after loss with reflectivity `r`.
    pub fn at_reflectivity(&self, r: f64) -> Result<Sample> {
        let loss = LossParams::new(r)?;
        let x = r * self.mean_photons;
        match &self.pair {
            Pair::Product { rho, sigma } => {
                let mut f = 1.0;
                for mode in 0..2 {
                    let a = apply_loss_single_mode(&rho[mode], loss);
                    let b = apply_loss_single_mode(&sigma[mode], loss);
                    f *= fidelity_matrices(&a, &b)?;
                }
                Ok(Sample {
                    x,
                    r,
                    value: distance_from_fidelity(f),
                    success_prob: None,
                    partner_success_prob: None,
                })
            }
            Pair::Dense { rho, sigma } => {
                let a = apply_loss(rho, loss)?;
                let b = apply_loss(sigma, loss)?;
                match self.threshold {
                    None => Ok(Sample {
                        x,
                        r,
                        value: bures_distance(&a, &b)?,
                        success_prob: None,
                        partner_success_prob: None,
                    }),
                    Some(k) => {
                        let fa = apply_filter(&a, k)?;
                        let fb = apply_filter(&b, k)?;
                        Ok(Sample {
                            x,
                            r,
                            value: distance_from_fidelity(fidelity(&fa.state, &fb.state)?),
                            success_prob: Some(fa.success_prob),
                            partner_success_prob: Some(fb.success_prob),
                        })
                    }
                }
            }
        }
    }

    /// Distance after losing `x` photons on average.
    pub fn at(&self, x: f64) -> Result<Sample> {
        let n0 = self.mean_photons;
        if !(x >= 0.0) || x > n0 * (1.0 + 1e-12) {
            return Err(Error::GridOutOfRange { x, max: n0 });
        }
        let r = if n0 > 0.0 { (x / n0).min(1.0) } else { 0.0 };
        let mut s = self.at_reflectivity(r)?;
        s.x = x;
        Ok(s)
    }

    /// Evaluates every grid point (in parallel) and returns them by increasing `x`.
    pub fn sweep(&self, grid: &[f64]) -> Result<SweepCurve> {
        let mut xs = grid.to_vec();
        xs.sort_by(f64::total_cmp);
        let samples = xs.par_iter().map(|&x| self.at(x)).collect::<Result<Vec<_>>>()?;
        Ok(SweepCurve {
            family: self.family,
            parameter: self.parameter,
            threshold: self.threshold.map(|k| k.0),
            cutoff: self.cutoff,
            tail_tol: self.tail_tol,
            mean_photons: self.mean_photons,
            samples,
        })
    }
}

/// Filtered equatorial sweep at gain `g` for a single threshold.
pub fn filtered_sweep(g: f64, k: OfThreshold, grid: &[f64], opts: &SweepOptions) -> Result<SweepCurve> {
    let mut curves = filtered_sweeps(g, &[k], grid, opts)?;
    Ok(curves.remove(0))
}

/// One filtered curve per threshold; the lossy pair is built once per grid
/// point and shared by every `k`.
pub fn filtered_sweeps(g: f64, ks: &[OfThreshold], grid: &[f64], opts: &SweepOptions) -> Result<Vec<SweepCurve>> {
    let Some(&first) = ks.first() else {
        return Ok(Vec::new());
    };
    let model = DistanceModel::filtered(g, first, opts)?;
    let Pair::Dense { rho, sigma } = &model.pair else {
        unreachable!("filtered models are dense")
    };
    let n0 = model.mean_photons;
    let mut xs = grid.to_vec();
    xs.sort_by(f64::total_cmp);
    if let Some(&x) = xs.iter().find(|&&x| !(x >= 0.0) || x > n0 * (1.0 + 1e-12)) {
        return Err(Error::GridOutOfRange { x, max: n0 });
    }
    let rows = xs
        .par_iter()
        .map(|&x| {
            let r = if n0 > 0.0 { (x / n0).min(1.0) } else { 0.0 };
            let loss = LossParams::new(r)?;
            let a = apply_loss(rho, loss)?;
            let b = apply_loss(sigma, loss)?;
            ks.par_iter()
                .map(|&k| {
                    let fa = apply_filter(&a, k)?;
                    let fb = apply_filter(&b, k)?;
                    Ok(Sample {
                        x,
                        r,
                        value: distance_from_fidelity(fidelity(&fa.state, &fb.state)?),
                        success_prob: Some(fa.success_prob),
                        partner_success_prob: Some(fb.success_prob),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ks
        .iter()
        .enumerate()
        .map(|(j, k)| SweepCurve {
            family: Family::Filtered,
            parameter: g,
            threshold: Some(k.0),
            cutoff: model.cutoff,
            tail_tol: model.tail_tol,
            mean_photons: n0,
            samples: rows.iter().map(|row| row[j]).collect(),
        })
        .collect())
}

fn alpha_from(alpha_sq: f64) -> Result<Complex64> {
    if !(alpha_sq >= 0.0) || !alpha_sq.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "|α|² must be finite and ≥ 0, got {alpha_sq}"
        )));
    }
    Ok(Complex64::new(alpha_sq.sqrt(), 0.0))
}

fn projector(f: &[Complex64]) -> Mat<Complex64> {
    let norm: f64 = f.iter().map(|a| a.norm_sqr()).sum();
    Mat::from_fn(f.len(), f.len(), |i, j| f[i] * f[j].conj() / norm)
}

/// `count` uniform points on `[0, min(x_max, ⟨n⟩₀)]` (with `x_max`
/// defaulting to 4), plus 20 points approaching `⟨n⟩₀` geometrically,
/// at `R = 1 − 10^{−1}` … `1 − 10^{−4}`.
pub fn default_x_grid(mean_photons: f64, count: usize, x_max: Option<f64>) -> Vec<f64> {
    let top = x_max.unwrap_or(4.0).min(mean_photons).max(0.0);
    let mut xs: Vec<f64> = match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| top * i as f64 / (count - 1) as f64).collect(),
    };
    for j in 0..20 {
        let eps = 10f64.powf(-1.0 - 3.0 * j as f64 / 19.0);
        xs.push(mean_photons * (1.0 - eps));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * mean_photons.max(1.0));
    xs
}

/// Points where the discrete second derivative changes sign, as
/// `(x, value)` interpolated at the crossing. Second differences smaller
/// than `tol` in magnitude count as zero and are skipped.
pub fn inflexion_points(samples: &[Sample], tol: f64) -> Vec<(f64, f64)> {
    let mut curv: Vec<(f64, f64, f64)> = Vec::new();
    for w in samples.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        if c.x - a.x <= 0.0 || b.x - a.x <= 0.0 || c.x - b.x <= 0.0 {
            continue;
        }
        let d2 = 2.0 * ((c.value - b.value) / (c.x - b.x) - (b.value - a.value) / (b.x - a.x)) / (c.x - a.x);
        if d2.abs() > tol {
            curv.push((b.x, b.value, d2));
        }
    }
    curv.windows(2)
        .filter(|w| w[0].2.signum() != w[1].2.signum())
        .map(|w| {
            let (x0, y0, c0) = w[0];
            let (x1, y1, c1) = w[1];
            let t = c0 / (c0 - c1);
            (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
        })
        .collect()
}

pub fn is_nonincreasing(values: &[f64], tol: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Distances between the three equivalent pairs at one loss level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceChain {
    pub r: f64,
    /// `D(Ψ^+, Ψ^−)` in the `{+,−}` basis, full two-mode route.
    pub superposition: f64,
    /// `D(Φ^R, Φ^L)` in the `{R,L}` basis, full two-mode route.
    pub circular: f64,
    /// `D(Φ^+, Φ^−)` by the product route.
    pub equatorial: f64,
}

pub fn covariance_chain(gain: GainParams, r: f64, tail_tol: f64) -> Result<CovarianceChain> {
    let loss = LossParams::new(r)?;
    let cutoff = states::equatorial_cutoff(gain, tail_tol)?;
    let dist = |a: &PureState, b: &PureState| -> Result<f64> {
        let a = apply_loss(&DensityOperator::from_pure(&a.normalized()?)?, loss)?;
        let b = apply_loss(&DensityOperator::from_pure(&b.normalized()?)?, loss)?;
        bures_distance(&a, &b)
    };

    let pm = TwoModeSpace::new(cutoff, BasisLabel::plus_minus());
    let (plus, minus) = states::equatorial_pair(gain, &pm, tail_tol)?;
    let psi_p = states::mqs_superposition(&plus.normalized()?, &minus.normalized()?, RelativePhase::PlusI)?;
    let psi_m = states::mqs_superposition(&plus.normalized()?, &minus.normalized()?, RelativePhase::MinusI)?;
    let superposition = dist(&psi_p.state, &psi_m.state)?;

    let rl = TwoModeSpace::new(cutoff, BasisLabel::right_left());
    let (right, left) = states::equatorial_pair(gain, &rl, tail_tol)?;
    let circular = dist(&right, &left)?;

    let opts = SweepOptions {
        tail_tol,
        cutoff: Some(cutoff),
    };
    let equatorial = DistanceModel::new(Family::EquatorialMqs, gain.g(), &opts)?
        .at_reflectivity(r)?
        .value;
    Ok(CovarianceChain {
        r,
        superposition,
        circular,
        equatorial,
    })
}
