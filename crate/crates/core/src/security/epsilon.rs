//! The ε budget and the split of its slack between `eps_bar` and `eps_pa`.

use super::{delta_term, SecurityError};

/// All security parameters of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityBudget {
    pub eps_total: f64,
    pub eps_pe: f64,
    pub eps_cor: f64,
    pub eps_pa: f64,
    pub eps_bar: f64,
    pub eps_auth: f64,
    /// Bits disclosed by error verification.
    pub leak_ev: usize,
    /// Length of one authentication tag.
    pub tag_auth_bits: usize,
}

impl SecurityBudget {
    pub const EPS_TOTAL: f64 = 1e-10;
    pub const EPS_PE: f64 = 4e-12;
    pub const EPS_COR: f64 = 6e-11;
    pub const EPS_AUTH: f64 = 1e-12;
    pub const LEAK_EV: usize = 34;
    pub const TAG_AUTH_BITS: usize = 86;

    /// Default budget with `(eps_bar, eps_pa)` optimised for a frame of
    /// `n` bits.
    pub fn for_frame(n: usize) -> Result<Self, SecurityError> {
        let split = optimize_epsilons(Self::EPS_TOTAL, Self::EPS_PE, Self::EPS_COR, Self::EPS_AUTH, n)?;
        let b = Self {
            eps_total: Self::EPS_TOTAL,
            eps_pe: Self::EPS_PE,
            eps_cor: Self::EPS_COR,
            eps_pa: split.eps_pa,
            eps_bar: split.eps_bar,
            eps_auth: Self::EPS_AUTH,
            leak_ev: Self::LEAK_EV,
            tag_auth_bits: Self::TAG_AUTH_BITS,
        };
        b.validate()?;
        Ok(b)
    }

    /// Sum of the composed failure probabilities.
    pub fn composed(&self) -> f64 {
        self.eps_cor + self.eps_pa + self.eps_pe + self.eps_bar + self.eps_auth
    }

    pub fn validate(&self) -> Result<(), SecurityError> {
        for (name, v) in [
            ("eps_total", self.eps_total),
            ("eps_pe", self.eps_pe),
            ("eps_cor", self.eps_cor),
            ("eps_pa", self.eps_pa),
            ("eps_bar", self.eps_bar),
            ("eps_auth", self.eps_auth),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(SecurityError::InvalidParameter(format!("{name} = {v} outside (0, 1)")));
            }
        }
        // Relative tolerance for the rounding of the optimiser's split.
        if self.composed() > self.eps_total * (1.0 + 1e-12) {
            return Err(SecurityError::Budget(format!(
                "composed ε {} exceeds total {}",
                self.composed(),
                self.eps_total
            )));
        }
        Ok(())
    }
}

/// Output of [`optimize_epsilons`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSplit {
    pub eps_bar: f64,
    pub eps_pa: f64,
    /// The finite-size correction at this split.
    pub delta: f64,
}

/// Splits the slack `eps_total - eps_pe - eps_cor - eps_auth` into
/// `eps_bar + eps_pa` so that `Δ(n, eps_bar, eps_pa)` is minimal.
///
/// `Δ` is convex in the fraction `t = eps_bar / slack` on `(0, 1)`, so a
/// golden-section search on `t` converges to the optimum.
pub fn optimize_epsilons(
    eps_total: f64,
    eps_pe: f64,
    eps_cor: f64,
    eps_auth: f64,
    n: usize,
) -> Result<EpsilonSplit, SecurityError> {
    if n == 0 {
        return Err(SecurityError::InvalidParameter("n must be at least 1".into()));
    }
    let slack = eps_total - eps_pe - eps_cor - eps_auth;
    if !(slack > eps_total * 1e-9) {
        return Err(SecurityError::Budget(format!("slack {slack:e}")));
    }
    let delta_at = |t: f64| delta_term(n, slack * t, slack * (1.0 - t)).unwrap_or(f64::INFINITY);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-9, 1.0 - 1e-9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (delta_at(c), delta_at(d));
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = delta_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = delta_at(d);
        }
    }
    let t = 0.5 * (a + b);
    let eps_bar = slack * t;
    // eps_pa takes the remainder so the sum never exceeds the slack.
    let eps_pa = slack - eps_bar;
    Ok(EpsilonSplit {
        eps_bar,
        eps_pa,
        delta: delta_term(n, eps_bar, eps_pa).expect("split inside (0, 1)"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_slack_is_an_error() {
        assert!(matches!(
            optimize_epsilons(1e-10, 4e-11, 6e-11, 0.0, 1000),
            Err(SecurityError::Budget(_))
        ));
    }

    #[test]
    fn default_budget_composes() {
        let b = SecurityBudget::for_frame(200_000).unwrap();
        assert!(b.composed() <= b.eps_total);
        assert!((b.eps_bar + b.eps_pa - 3.5e-11).abs() < 1e-20);
    }
}
