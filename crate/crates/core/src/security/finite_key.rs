//! The finite-key secret length and its decomposition.

use super::{binary_entropy, SecurityBudget, SecurityError};

/// `Δ = 7 sqrt(log2(2 / eps_bar) n) + log2(1 / eps_pa^2)`.
pub fn delta_term(n: usize, eps_bar: f64, eps_pa: f64) -> Result<f64, SecurityError> {
    if n == 0 {
        return Err(SecurityError::InvalidParameter("n must be at least 1".into()));
    }
    for (name, v) in [("eps_bar", eps_bar), ("eps_pa", eps_pa)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(SecurityError::InvalidParameter(format!("{name} = {v} outside (0, 1)")));
        }
    }
    Ok(7.0 * ((2.0 / eps_bar).log2() * n as f64).sqrt() - 2.0 * eps_pa.log2())
}

/// Result of [`finite_key_length`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyLengthResult {
    pub n: usize,
    pub l_key: usize,
    pub a: f64,
    pub q_tilde: f64,
    pub delta: f64,
    /// `n A (1 - H(q_tilde / A))`, or 0 once `q_tilde / A >= 1/2`.
    pub entropy_term: f64,
    pub leak_ec: usize,
    pub leak_ev: usize,
    pub nu_auth: usize,
}

impl KeyLengthResult {
    /// Splits `n - l_key` into the individual contributions given the raw
    /// QBER estimate the bound was derived from.
    pub fn breakdown(&self, q_hat: f64) -> LeakageBreakdown {
        let n = self.n as f64;
        let h_hat = binary_entropy(q_hat);
        let h_tilde = binary_entropy(self.q_tilde.min(0.5));
        let qber = n * h_hat;
        let parameter_estimation = n * (h_tilde - h_hat);
        let multi_photon = n * (1.0 - h_tilde) - self.entropy_term;
        let accounted = qber
            + parameter_estimation
            + multi_photon
            + self.leak_ec as f64
            + self.delta
            + self.leak_ev as f64
            + self.nu_auth as f64;
        LeakageBreakdown {
            n: self.n,
            l_key: self.l_key,
            qber,
            parameter_estimation,
            multi_photon,
            error_correction: self.leak_ec as f64,
            finite_size: self.delta,
            error_verification: self.leak_ev as f64,
            authentication: self.nu_auth as f64,
            rounding: n - self.l_key as f64 - accounted,
        }
    }
}

/// How the `n` sifted bits of a frame divide into key and the different
/// kinds of leakage, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageBreakdown {
    pub n: usize,
    pub l_key: usize,
    /// `n H(q_hat)`.
    pub qber: f64,
    /// `n (H(q_tilde) - H(q_hat))`.
    pub parameter_estimation: f64,
    /// `n (1 - H(q_tilde)) - n A (1 - H(q_tilde / A))`.
    pub multi_photon: f64,
    pub error_correction: f64,
    pub finite_size: f64,
    pub error_verification: f64,
    pub authentication: f64,
    /// Floor rounding, or everything beyond `n` when the key length clamps
    /// to zero.
    pub rounding: f64,
}

impl LeakageBreakdown {
    /// `(label, bits)` pairs in a fixed order, key last.
    pub fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("qber", self.qber),
            ("parameter_estimation", self.parameter_estimation),
            ("multi_photon", self.multi_photon),
            ("error_correction", self.error_correction),
            ("finite_size", self.finite_size),
            ("error_verification", self.error_verification),
            ("authentication", self.authentication),
            ("rounding", self.rounding),
            ("secret_key", self.l_key as f64),
        ]
    }

    /// Sum of all entries; equals `n` up to float error.
    pub fn total(&self) -> f64 {
        self.entries().iter().map(|(_, v)| v).sum()
    }
}

/// `l_key = floor(n A (1 - H(q_tilde / A)) - leak_EC - Δ - leak_EV) - nu_auth`,
/// clamped at zero. `Δ` and `leak_EV` come from `budget`.
pub fn finite_key_length(
    n: usize,
    q_tilde: f64,
    leak_ec: usize,
    nu_auth: usize,
    a: f64,
    budget: &SecurityBudget,
) -> Result<KeyLengthResult, SecurityError> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(SecurityError::InvalidParameter(format!("A = {a} outside (0, 1]")));
    }
    if !(0.0..=1.0).contains(&q_tilde) {
        return Err(SecurityError::InvalidParameter(format!(
            "q_tilde = {q_tilde} outside [0, 1]"
        )));
    }
    budget.validate()?;
    let delta = delta_term(n, budget.eps_bar, budget.eps_pa)?;
    let x = q_tilde / a;
    let entropy_term = if x >= 0.5 {
        0.0
    } else {
        n as f64 * a * (1.0 - binary_entropy(x))
    };
    let inner = (entropy_term - leak_ec as f64 - delta - budget.leak_ev as f64).floor();
    let l_key = (inner - nu_auth as f64).max(0.0) as usize;
    Ok(KeyLengthResult {
        n,
        l_key,
        a,
        q_tilde,
        delta,
        entropy_term,
        leak_ec,
        leak_ev: budget.leak_ev,
        nu_auth,
    })
}
