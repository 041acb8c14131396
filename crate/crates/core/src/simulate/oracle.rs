//! Closed-form extremal correlations of the simulation models.

/// Extremal correlation of the two-score model
/// `X = Z1 phi1 + ..., Y = rho Z1 phi1 + sqrt(1 - rho^2) Z2 phi2 + ...`
/// with i.i.d. scores of tail index `alpha`:
///
/// ```text
/// rho_xy = rho / sqrt(rho^2 + (1 - rho^2)^(alpha / 2))
/// ```
pub fn oracle_rho(rho: f64, alpha: f64) -> f64 {
    let r2 = rho * rho;
    let denom = (r2 + (1.0 - r2).max(0.0).powf(alpha / 2.0)).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    rho / denom
}

/// Inverse of [`oracle_rho`] in `rho` for fixed `alpha`.
///
/// The map is odd and strictly increasing on `[0, 1]`, so the magnitude is
/// found by bisection and the sign restored afterwards.
pub fn invert_oracle(rho_xy_target: f64, alpha: f64) -> f64 {
    let target = rho_xy_target.abs().min(1.0);
    if target == 0.0 {
        return 0.0;
    }
    if target == 1.0 {
        return rho_xy_target.signum();
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if oracle_rho(mid, alpha) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    mid.copysign(rho_xy_target)
}

/// Extremal correlation of the model with Bernoulli-gated heavy components:
/// `sqrt(p_a * p_b)`.
pub fn oracle_rho_bernoulli(p_a: f64, p_b: f64) -> f64 {
    (p_a * p_b).sqrt()
}
