use super::binary_entropy;

pub const DEFAULT_SIFT_FACTOR: f64 = 0.5;

/// Asymptotic key rate `raw * sift * max(0, A (1 - H(q / A)) - f H(q))`.
///
/// `raw_rate` is the detection rate before sifting, in any unit; the result
/// is in the same unit.
pub fn asymptotic_gllp_rate(raw_rate: f64, sift_factor: f64, q: f64, f: f64, a: f64) -> f64 {
    if a <= 0.0 || q / a >= 0.5 {
        return 0.0;
    }
    let fraction = a * (1.0 - binary_entropy(q / a)) - f * binary_entropy(q);
    raw_rate * sift_factor * fraction.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_rate_is_sifted_times_a() {
        let r = asymptotic_gllp_rate(1000.0, 0.5, 0.0, 1.2, 0.99);
        assert!((r - 495.0).abs() < 1e-9);
    }

    #[test]
    fn high_qber_clamps_to_zero() {
        assert_eq!(asymptotic_gllp_rate(1000.0, 0.5, 0.11, 1.17, 1.0), 0.0);
        assert_eq!(asymptotic_gllp_rate(1000.0, 0.5, 0.3, 1.0, 0.5), 0.0);
    }
}
