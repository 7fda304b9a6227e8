//! Focal loss, `-alpha * (1 - p_t)^gamma * ln(p_t)`, where `p_t` is the
//! predicted probability of the true class. `gamma = 0, alpha = 1` is plain
//! cross-entropy.

use crate::error::{Error, Result};

/// Probabilities are clamped to this floor before taking the logarithm.
pub const P_FLOOR: f64 = 1e-12;

pub fn focal_loss(p_t: f64, gamma: f64, alpha: f64) -> Result<f64> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::Config(format!("focal gamma must be >= 0, got {gamma}")));
    }
    Ok(focal_value(p_t, gamma, alpha))
}

pub(crate) fn focal_value(p_t: f64, gamma: f64, alpha: f64) -> f64 {
    let p = p_t.clamp(P_FLOOR, 1.0);
    -alpha * modulating(1.0 - p, gamma) * p.ln()
}

/// `(1 - p)^gamma` with `0^0 = 1`.
fn modulating(one_minus_p: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        one_minus_p.max(0.0).powf(gamma)
    }
}

/// Coefficient `A` such that the gradient of the loss with respect to the
/// logits is `A * (p - onehot)`: `A = alpha * ((1-p)^g - g p (1-p)^(g-1) ln p)`.
pub(crate) fn focal_logit_coefficient(p_t: f64, gamma: f64, alpha: f64) -> f64 {
    let p = p_t.clamp(P_FLOOR, 1.0);
    let q = 1.0 - p;
    if gamma == 0.0 {
        return alpha;
    }
    if q <= 0.0 {
        return 0.0;
    }
    alpha * (q.powf(gamma) - gamma * p * q.powf(gamma - 1.0) * p.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_classified_is_zero() {
        assert_eq!(focal_loss(1.0, 2.0, 0.25).unwrap(), 0.0);
        assert_eq!(focal_loss(1.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gamma_zero_is_cross_entropy() {
        let v = focal_loss(0.5, 0.0, 1.0).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn direct_evaluation() {
        let v = focal_loss(0.9, 2.0, 0.25).unwrap();
        let expected = 0.25 * 0.1f64.powi(2) * -(0.9f64.ln());
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 2.634e-4).abs() < 1e-7);
    }

    #[test]
    fn negative_gamma_rejected() {
        assert!(matches!(focal_loss(0.5, -0.5, 0.25), Err(Error::Config(_))));
    }

    #[test]
    fn zero_probability_is_clamped() {
        let v = focal_loss(0.0, 0.0, 1.0).unwrap();
        assert!((v - (-P_FLOOR.ln())).abs() < 1e-9);
    }
}
