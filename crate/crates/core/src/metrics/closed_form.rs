//! Large-amplitude closed forms for coherent-state pairs under loss.

/// `√(1 − e^{−2(1−R)|α|²})` for `|α⟩` versus `|−α⟩`.
pub fn coherent_pointer_distance_closed(alpha_sq: f64, r: f64) -> f64 {
    // 1 − e^{−y} written as −expm1(−y) to keep precision for small y
    (-(-2.0 * (1.0 - r) * alpha_sq).exp_m1()).max(0.0).sqrt()
}

/// `√(1 − √(1 − e^{−4R|α|²}))` for the even versus the odd cat.
pub fn coherent_mqs_distance_closed(alpha_sq: f64, r: f64) -> f64 {
    let inner = (-(-4.0 * r * alpha_sq).exp_m1()).max(0.0).sqrt();
    (1.0 - inner).max(0.0).sqrt()
}
