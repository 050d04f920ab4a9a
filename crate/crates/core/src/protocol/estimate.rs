use super::ProtocolError;

/// Fraction of disagreeing positions between the two disclosed samples.
pub fn estimate_qber(alice: &[u8], bob: &[u8]) -> Result<f64, ProtocolError> {
    if alice.len() != bob.len() {
        return Err(ProtocolError::Estimation(format!(
            "sample lengths differ: {} vs {}",
            alice.len(),
            bob.len()
        )));
    }
    if alice.is_empty() {
        return Err(ProtocolError::Estimation("empty sample".into()));
    }
    let errors = alice.iter().zip(bob).filter(|(a, b)| (*a ^ *b) & 1 == 1).count();
    Ok(errors as f64 / alice.len() as f64)
}

/// `q_tilde = q_hat + sqrt((2 ln(1/eps_pe) + 2 ln(m + 1)) / m) / 2`,
/// clamped to `1/2`.
pub fn qber_upper_bound(q_hat: f64, m: usize, eps_pe: f64) -> Result<f64, ProtocolError> {
    if m == 0 {
        return Err(ProtocolError::Estimation("sample size must be at least 1".into()));
    }
    if !(eps_pe > 0.0 && eps_pe < 1.0) {
        return Err(ProtocolError::InvalidParameter(format!(
            "eps_pe = {eps_pe} outside (0, 1)"
        )));
    }
    if !(0.0..=1.0).contains(&q_hat) {
        return Err(ProtocolError::InvalidParameter(format!(
            "q_hat = {q_hat} outside [0, 1]"
        )));
    }
    let m = m as f64;
    let penalty = 0.5 * ((2.0 * (1.0 / eps_pe).ln() + 2.0 * (m + 1.0).ln()) / m).sqrt();
    Ok((q_hat + penalty).min(0.5))
}
