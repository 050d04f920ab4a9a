//! Security mathematics: entropy, multi-photon accounting, the finite-key
//! length, its finite-size correction, the ε budget and the asymptotic rate.

mod asymptotic;
mod curve;
mod epsilon;
mod finite_key;

use thiserror::Error;

pub use asymptotic::{asymptotic_gllp_rate, DEFAULT_SIFT_FACTOR};
pub use curve::{
    loss_range, rate_vs_loss_curve, read_curve_csv, write_curve_csv, CurveModel, CurvePoint, CURVE_CSV_HEADER,
    CURVE_CSV_VERSION,
};
pub use epsilon::{optimize_epsilons, EpsilonSplit, SecurityBudget};
pub use finite_key::{delta_term, finite_key_length, KeyLengthResult, LeakageBreakdown};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SecurityError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ε budget has no slack left: {0}")]
    Budget(String),
}

/// Binary Shannon entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Probability that the source emits two photons into the channel:
/// `(eta_s * eta_e)^2 * g2 / 2`.
pub fn multi_photon_prob(g2: f64, eta_s: f64, eta_e: f64) -> Result<f64, SecurityError> {
    for (name, v) in [("g2", g2), ("eta_s", eta_s), ("eta_e", eta_e)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(SecurityError::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let eta = eta_s * eta_e;
    Ok(eta * eta * g2 / 2.0)
}

/// GLLP factor `A = 1 - p_m / p_det`: the fraction of detections that
/// stem from single photons in the worst case.
pub fn gllp_factor(p_m: f64, p_det: f64) -> Result<f64, SecurityError> {
    if !(p_det > 0.0 && p_det <= 1.0) {
        return Err(SecurityError::InvalidParameter(format!(
            "p_det = {p_det} outside (0, 1]"
        )));
    }
    if !(0.0..=p_det).contains(&p_m) {
        return Err(SecurityError::InvalidParameter(format!(
            "p_m = {p_m} outside [0, p_det]"
        )));
    }
    Ok(1.0 - p_m / p_det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints_and_symmetry() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.2) - binary_entropy(0.8)).abs() < 1e-15);
    }

    #[test]
    fn multi_photon_extremes() {
        assert_eq!(multi_photon_prob(0.0, 0.3, 0.3).unwrap(), 0.0);
        assert_eq!(multi_photon_prob(1.0, 1.0, 1.0).unwrap(), 0.5);
        assert!(multi_photon_prob(1.1, 0.5, 0.5).is_err());
    }

    #[test]
    fn gllp_boundaries() {
        assert_eq!(gllp_factor(0.0, 0.83).unwrap(), 1.0);
        assert_eq!(gllp_factor(0.83, 0.83).unwrap(), 0.0);
        assert!(gllp_factor(0.9, 0.83).is_err());
        assert!(gllp_factor(0.0, 0.0).is_err());
    }
}
