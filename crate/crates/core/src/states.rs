//! Constructors for every state family: amplified pole and equatorial
//! macro-qubits, their superpositions, and coherent-state cats.
//!
//! All constructors write the analytic expansion coefficients into the
//! truncated space and refuse to proceed when the discarded tail
//! probability `1 − Σ|c|²` reaches the requested tolerance. Amplitudes are
//! *not* renormalized after truncation; superpositions are normalized
//! numerically.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{BasisLabel, ModeUnitary, PureState, TwoModeSpace};

pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
pub const MAX_CUTOFF: usize = 1000;

/// Parametric gain `g` with `C = cosh g` and `Γ = tanh g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    g: f64,
}

impl GainParams {
    pub fn new(g: f64) -> Result<Self> {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::InvalidParameter(format!("gain must be finite and ≥ 0, got {g}")));
        }
        Ok(Self { g })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn cosh(&self) -> f64 {
        self.g.cosh()
    }

    pub fn tanh(&self) -> f64 {
        self.g.tanh()
    }

    /// `4 sinh²g + 1`: two-mode mean photon number of any amplified qubit,
    /// pole or equatorial, before truncation.
    pub fn mean_photons(&self) -> f64 {
        4.0 * self.g.sinh().powi(2) + 1.0
    }
}

/// Injection phase of an equatorial qubit, kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquatorialPhase(f64);

impl EquatorialPhase {
    pub fn new(phi: f64) -> Self {
        Self(crate::fock::BasisLabel::equatorial(phi).phase().unwrap_or(0.0))
    }

    pub fn radians(&self) -> f64 {
        self.0
    }

    /// `φ + π`, the orthogonal equatorial qubit.
    pub fn orthogonal(&self) -> Self {
        Self::new(self.0 + PI)
    }

    pub fn basis(&self) -> BasisLabel {
        BasisLabel::equatorial(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatParity {
    /// `|α⟩ + |−α⟩`
    Even,
    /// `|α⟩ − |−α⟩`
    Odd,
}

/// Relative phase `±i` of the second component in an MQS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelativePhase {
    PlusI,
    MinusI,
}

/// Smallest cutoff whose tail `1 − cumulative(c)` falls below `tol`.
fn search_cutoff(cumulative: impl Fn(usize) -> f64, tol: f64) -> Result<usize> {
    check_tol(tol)?;
    (0..=MAX_CUTOFF)
        .find(|&c| 1.0 - cumulative(c) < tol)
        .ok_or(Error::CutoffSearchExhausted {
            tolerance: tol,
            max_cutoff: MAX_CUTOFF,
        })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tail tolerance {tol} outside (0, 1)")));
    }
    Ok(())
}

fn check_tail(tail: f64, tol: f64, cutoff: usize) -> Result<()> {
    check_tol(tol)?;
    if tail < tol {
        Ok(())
    } else {
        Err(Error::Truncation {
            tail,
            tolerance: tol,
            cutoff,
        })
    }
}

fn cumulative_probs(amps: &[Complex64]) -> Vec<f64> {
    amps.iter()
        .scan(0.0, |acc, a| {
            *acc += a.norm_sqr();
            Some(*acc)
        })
        .collect()
}

// ---------------------------------------------------------------- pole states

/// `C^{-2} Γ^i √(i+1)` for `i = 0..len`, the weight of `|(i+1)π, iπ⊥⟩`.
pub fn pole_coefficients(gain: GainParams, len: usize) -> Vec<f64> {
    let c2 = gain.cosh().powi(-2);
    let t = gain.tanh();
    let mut out = Vec::with_capacity(len);
    let mut pow = 1.0;
    for i in 0..len {
        out.push(c2 * pow * ((i + 1) as f64).sqrt());
        pow *= t;
    }
    out
}

/// Tail probability of the pole state at a per-mode cutoff.
pub fn pole_tail(gain: GainParams, cutoff: usize) -> f64 {
    1.0 - pole_coefficients(gain, cutoff).iter().map(|c| c * c).sum::<f64>()
}

pub fn pole_cutoff(gain: GainParams, tol: f64) -> Result<usize> {
    let coeffs: Vec<Complex64> = pole_coefficients(gain, MAX_CUTOFF)
        .into_iter()
        .map(|c| Complex64::new(c, 0.0))
        .collect();
    let cum = cumulative_probs(&coeffs);
    // cutoff c keeps terms i = 0..c−1
    search_cutoff(|c| if c == 0 { 0.0 } else { cum[c - 1] }, tol)
}

/// Amplified pole qubit `|Φ^H⟩` or `|Φ^V⟩` in the `{H, V}` basis.
pub fn amplified_pole_state(gain: GainParams, pole: Pole, space: &TwoModeSpace, tail_tol: f64) -> Result<PureState> {
    if space.basis() != BasisLabel::hv() {
        return Err(Error::BasisMismatch(format!(
            "pole states live in {{H,V}}, not {}",
            space.basis()
        )));
    }
    let cutoff = space.cutoff();
    check_tail(pole_tail(gain, cutoff), tail_tol, cutoff)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dimension()];
    for (i, c) in pole_coefficients(gain, cutoff).into_iter().enumerate() {
        let (n, m) = match pole {
            Pole::H => (i + 1, i),
            Pole::V => (i, i + 1),
        };
        amps[space.index(n, m)] = Complex64::new(c, 0.0);
    }
    PureState::from_amplitudes(*space, amps)
}

// ---------------------------------------------------------- equatorial states

/// Single-mode factor carrying the injected photon: amplitudes on odd
/// number states `|2i+1⟩`, unit norm before truncation.
///
/// `C^{-3/2} (e^{-iφ}Γ/2)^i √((2i+1)!) / i!`, built by recurrence.
pub fn squeezed_photon_factor(gain: GainParams, phase: EquatorialPhase, cutoff: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    if cutoff == 0 {
        return out;
    }
    let ratio = Complex64::from_polar(0.5 * gain.tanh(), -phase.radians());
    let mut a = Complex64::new(gain.cosh().powf(-1.5), 0.0);
    let mut i = 0usize;
    while 2 * i < cutoff {
        out[2 * i + 1] = a;
        let k = (i + 1) as f64;
        a *= ratio * (((2 * i + 2) * (2 * i + 3)) as f64).sqrt() / k;
        i += 1;
    }
    out
}

/// Single-mode squeezed-vacuum factor on even number states `|2j⟩`:
/// `C^{-1/2} (−e^{iφ}Γ/2)^j √((2j)!) / j!`.
pub fn squeezed_vacuum_factor(gain: GainParams, phase: EquatorialPhase, cutoff: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    let ratio = -Complex64::from_polar(0.5 * gain.tanh(), phase.radians());
    let mut a = Complex64::new(gain.cosh().powf(-0.5), 0.0);
    let mut j = 0usize;
    while 2 * j <= cutoff {
        out[2 * j] = a;
        let k = (j + 1) as f64;
        a *= ratio * (((2 * j + 1) * (2 * j + 2)) as f64).sqrt() / k;
        j += 1;
    }
    out
}

/// Tail probability of the equatorial macro-qubit at a per-mode cutoff.
pub fn equatorial_tail(gain: GainParams, cutoff: usize) -> f64 {
    let p = EquatorialPhase::new(0.0);
    let a: f64 = squeezed_photon_factor(gain, p, cutoff)
        .iter()
        .map(|z| z.norm_sqr())
        .sum();
    let b: f64 = squeezed_vacuum_factor(gain, p, cutoff)
        .iter()
        .map(|z| z.norm_sqr())
        .sum();
    1.0 - a * b
}

pub fn equatorial_cutoff(gain: GainParams, tol: f64) -> Result<usize> {
    let p = EquatorialPhase::new(0.0);
    let a = cumulative_probs(&squeezed_photon_factor(gain, p, MAX_CUTOFF));
    let b = cumulative_probs(&squeezed_vacuum_factor(gain, p, MAX_CUTOFF));
    search_cutoff(|c| a[c] * b[c], tol)
}

/// The two single-mode factors `[mode 0, mode 1]` of the amplified qubit
/// injected at `phase`, written in the equatorial basis `basis_phase`.
///
/// Only valid when `phase ≡ basis_phase` or `phase ≡ basis_phase + π`:
/// then the basis change is a mode permutation with phases and the state
/// stays a product across the two modes.
pub fn equatorial_factors(
    gain: GainParams,
    phase: EquatorialPhase,
    basis_phase: EquatorialPhase,
    cutoff: usize,
) -> Result<[Vec<Complex64>; 2]> {
    let own = [
        squeezed_photon_factor(gain, phase, cutoff),
        squeezed_vacuum_factor(gain, phase, cutoff),
    ];
    let u = ModeUnitary::change_of_basis(phase.basis(), basis_phase.basis());
    let map = u.as_monomial().ok_or_else(|| {
        Error::BasisMismatch(format!(
            "qubit at φ={:.6} is not a product state in the equatorial basis at φ={:.6}",
            phase.radians(),
            basis_phase.radians()
        ))
    })?;
    let mut out: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    for (src, factor) in own.into_iter().enumerate() {
        let (target, ph) = map[src];
        let mut p = Complex64::new(1.0, 0.0);
        out[target] = factor
            .into_iter()
            .map(|a| {
                let v = a * p;
                p *= ph;
                v
            })
            .collect();
    }
    Ok(out)
}

/// Amplified equatorial qubit `|Φ^φ⟩` in the equatorial basis of `space`:
/// amplitudes `γ_ij` on `|(2i+1)φ, (2j)φ⊥⟩` when the basis is `{φ, φ⊥}`,
/// or the mode-exchanged image when the basis is `{φ+π, (φ+π)⊥}`.
pub fn amplified_equatorial_state(
    gain: GainParams,
    phase: EquatorialPhase,
    space: &TwoModeSpace,
    tail_tol: f64,
) -> Result<PureState> {
    let BasisLabel::Equatorial { phase: basis_phase } = space.basis() else {
        return Err(Error::BasisMismatch(format!(
            "equatorial states need an equatorial basis, not {}",
            space.basis()
        )));
    };
    let cutoff = space.cutoff();
    check_tail(equatorial_tail(gain, cutoff), tail_tol, cutoff)?;
    let [f0, f1] = equatorial_factors(gain, phase, EquatorialPhase::new(basis_phase), cutoff)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dimension()];
    for (n, a) in f0.iter().enumerate() {
        if *a == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (m, b) in f1.iter().enumerate() {
            amps[space.index(n, m)] = a * b;
        }
    }
    PureState::from_amplitudes(*space, amps)
}

/// `(|Φ^φ⟩, |Φ^{φ⊥}⟩)` for the equatorial basis `{φ, φ⊥}` of `space`.
pub fn equatorial_pair(gain: GainParams, space: &TwoModeSpace, tail_tol: f64) -> Result<(PureState, PureState)> {
    let phase = match space.basis() {
        BasisLabel::Equatorial { phase } => EquatorialPhase::new(phase),
        other => {
            return Err(Error::BasisMismatch(format!(
                "equatorial pair needs an equatorial basis, not {other}"
            )))
        }
    };
    Ok((
        amplified_equatorial_state(gain, phase, space, tail_tol)?,
        amplified_equatorial_state(gain, phase.orthogonal(), space, tail_tol)?,
    ))
}

// ------------------------------------------------------------- superpositions

/// Normalized `N/√2 (a ± i b)` together with the numerically determined `N`.
#[derive(Debug, Clone)]
pub struct Superposition {
    pub state: PureState,
    pub normalization: f64,
}

pub fn mqs_superposition(a: &PureState, b: &PureState, relative: RelativePhase) -> Result<Superposition> {
    for s in [a, b] {
        let norm = s.norm();
        if !((norm - 1.0).abs() <= crate::fock::PURE_NORM_TOL) {
            return Err(Error::Normalization { norm });
        }
    }
    let coeff = match relative {
        RelativePhase::PlusI => Complex64::new(0.0, 1.0),
        RelativePhase::MinusI => Complex64::new(0.0, -1.0),
    };
    let raw = a.combine(Complex64::new(1.0, 0.0), b, coeff)?;
    let norm = raw.norm();
    if !(norm > 0.0) {
        return Err(Error::Normalization { norm });
    }
    Ok(Superposition {
        state: raw.scaled(Complex64::new(1.0 / norm, 0.0)),
        normalization: std::f64::consts::SQRT_2 / norm,
    })
}

// ------------------------------------------------------------ coherent states

/// `e^{-|α|²/2} α^n / √(n!)`, `n = 0..=cutoff`.
pub fn coherent_coefficients(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut a = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=cutoff {
        out.push(a);
        a *= alpha / ((n + 1) as f64).sqrt();
    }
    out
}

pub fn coherent_cutoff(alpha: Complex64, tol: f64) -> Result<usize> {
    let cum = cumulative_probs(&coherent_coefficients(alpha, MAX_CUTOFF));
    search_cutoff(|c| cum[c], tol)
}

/// `|α⟩` in mode 0 with mode 1 in vacuum.
pub fn coherent_state(alpha: Complex64, space: &TwoModeSpace, tail_tol: f64) -> Result<PureState> {
    let cutoff = space.cutoff();
    let coeffs = coherent_coefficients(alpha, cutoff);
    let tail = 1.0 - coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
    check_tail(tail, tail_tol, cutoff)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dimension()];
    for (n, c) in coeffs.into_iter().enumerate() {
        amps[space.index(n, 0)] = c;
    }
    PureState::from_amplitudes(*space, amps)
}

/// Analytic coefficients of the normalized even/odd cat on `|n, 0⟩`.
pub fn cat_coefficients(alpha: Complex64, parity: CatParity, cutoff: usize) -> Result<Vec<Complex64>> {
    let x = 2.0 * alpha.norm_sqr();
    // 1 ± e^{-2|α|²}, the odd case without cancellation
    let norm_sq = match parity {
        CatParity::Even => 2.0 * (1.0 + (-x).exp()),
        CatParity::Odd => -2.0 * (-x).exp_m1(),
    };
    if !(norm_sq > 0.0) {
        return Err(Error::InvalidParameter("odd cat with α = 0 is the zero vector".into()));
    }
    let keep = |n: usize| match parity {
        CatParity::Even => n % 2 == 0,
        CatParity::Odd => n % 2 == 1,
    };
    let scale = 2.0 / norm_sq.sqrt();
    Ok(coherent_coefficients(alpha, cutoff)
        .into_iter()
        .enumerate()
        .map(|(n, c)| if keep(n) { c * scale } else { Complex64::new(0.0, 0.0) })
        .collect())
}

pub fn cat_cutoff(alpha: Complex64, parity: CatParity, tol: f64) -> Result<usize> {
    let cum = cumulative_probs(&cat_coefficients(alpha, parity, MAX_CUTOFF)?);
    search_cutoff(|c| cum[c], tol)
}

/// `(|α⟩ ± |−α⟩)` normalized numerically, in mode 0.
pub fn coherent_mqs(alpha: Complex64, parity: CatParity, space: &TwoModeSpace, tail_tol: f64) -> Result<PureState> {
    let cutoff = space.cutoff();
    let coeffs = cat_coefficients(alpha, parity, cutoff)?;
    let tail = 1.0 - coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
    check_tail(tail, tail_tol, cutoff)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dimension()];
    for (n, c) in coeffs.into_iter().enumerate() {
        amps[space.index(n, 0)] = c;
    }
    PureState::from_amplitudes(*space, amps)?.normalized()
}
