use super::SimError;

/// The physical parameter chain of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Pulse rate `ν_S`, Hz.
    pub source_rate_hz: f64,
    pub eta_qd: f64,
    pub eta_transport: f64,
    pub eta_fc: f64,
    /// Second-order correlation at zero delay.
    pub g2: f64,
    pub eta_encoder: f64,
    pub channel_loss_db: f64,
    /// Receiver efficiency `η_R`, detection efficiency included.
    pub eta_receiver: f64,
    /// Detection efficiency `p_det` used for the multi-photon bound.
    pub detector_efficiency: f64,
    pub dark_count_hz: f64,
    pub dead_time_s: f64,
    /// Full width of the acceptance gate centred on each pulse slot.
    pub temporal_window_s: f64,
    /// Standard deviation of the detection time jitter.
    pub timing_jitter_s: f64,
    pub burst_len: usize,
    /// Probability that Alice prepares in the X basis.
    pub basis_ratio: f64,
    /// Probability of a wrong-detector click in the matched basis from
    /// encoder and channel imperfections.
    pub misalignment_qber: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            source_rate_hz: 72.6e6,
            eta_qd: 0.165,
            eta_transport: 0.71,
            eta_fc: 0.5,
            g2: 0.0047,
            eta_encoder: 0.55,
            channel_loss_db: -10.0 * 0.109f64.log10(),
            eta_receiver: 0.114,
            detector_efficiency: 0.83,
            dark_count_hz: 50.0,
            dead_time_s: 33e-9,
            temporal_window_s: 1e-9,
            timing_jitter_s: 50e-12,
            burst_len: 605,
            basis_ratio: 0.5,
            misalignment_qber: 0.03225,
        }
    }
}

impl SystemParams {
    /// C-band source efficiency `η_S = η_QD η_T η_FC`.
    pub fn eta_source_cband(&self) -> f64 {
        self.eta_qd * self.eta_transport * self.eta_fc
    }

    /// Channel transmission `η_QC = 10^(-loss / 10)`.
    pub fn eta_channel(&self) -> f64 {
        10f64.powf(-self.channel_loss_db / 10.0)
    }

    /// Probability that a pulse carries at least one photon into the channel.
    pub fn eta_pulse(&self) -> f64 {
        self.eta_source_cband() * self.eta_encoder
    }

    /// Two-photon probability per pulse, `g2 η^2 / 2`.
    pub fn two_photon_prob(&self) -> f64 {
        let eta = self.eta_pulse();
        self.g2 * eta * eta / 2.0
    }

    /// Probability that one photon reaches a detector and clicks.
    pub fn photon_transmission(&self) -> f64 {
        self.eta_channel() * self.eta_receiver
    }

    /// Probability that a pulse yields a signal click.
    pub fn signal_click_prob(&self) -> f64 {
        let t = self.photon_transmission();
        let p2 = self.two_photon_prob();
        let p1 = self.eta_pulse() - p2;
        p1 * t + p2 * (1.0 - (1.0 - t) * (1.0 - t))
    }

    /// Expected signal clicks per second before dead time.
    pub fn expected_signal_rate(&self) -> f64 {
        self.source_rate_hz * self.signal_click_prob()
    }

    /// Pulse period in seconds.
    pub fn pulse_period(&self) -> f64 {
        1.0 / self.source_rate_hz
    }

    /// Dark counts accepted per pulse slot over all four detectors.
    pub fn dark_prob_per_pulse(&self) -> f64 {
        4.0 * self.dark_count_hz * self.temporal_window_s.min(self.pulse_period())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fractions = [
            ("eta_qd", self.eta_qd),
            ("eta_transport", self.eta_transport),
            ("eta_fc", self.eta_fc),
            ("g2", self.g2),
            ("eta_encoder", self.eta_encoder),
            ("eta_receiver", self.eta_receiver),
            ("detector_efficiency", self.detector_efficiency),
            ("basis_ratio", self.basis_ratio),
            ("misalignment_qber", self.misalignment_qber),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::param(name, format!("{v} is not a fraction")));
            }
        }
        if !(self.channel_loss_db >= 0.0) {
            return Err(SimError::param(
                "channel_loss_db",
                "must be non-negative; infinity blocks the channel",
            ));
        }
        let non_negative = [
            ("dark_count_hz", self.dark_count_hz),
            ("dead_time_s", self.dead_time_s),
            ("temporal_window_s", self.temporal_window_s),
            ("timing_jitter_s", self.timing_jitter_s),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimError::param(name, format!("{v} must be finite and non-negative")));
            }
        }
        if !(self.source_rate_hz > 0.0 && self.source_rate_hz.is_finite()) {
            return Err(SimError::param("source_rate_hz", "must be positive"));
        }
        if self.burst_len == 0 {
            return Err(SimError::param("burst_len", "must be at least 1"));
        }
        if self.two_photon_prob() > self.eta_pulse() {
            return Err(SimError::param(
                "g2",
                "two-photon probability exceeds emission probability",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_the_efficiency_chain() {
        let p = SystemParams::default();
        p.validate().unwrap();
        assert!((p.eta_source_cband() - 0.058575).abs() < 1e-12);
        assert!((p.eta_channel() - 0.109).abs() < 1e-12);
        let rate = p.source_rate_hz * p.eta_pulse() * p.photon_transmission();
        assert!((rate - 2.9e4).abs() / 2.9e4 < 0.02, "{rate}");
    }

    #[test]
    fn rejects_out_of_range() {
        let p = SystemParams {
            eta_fc: 1.5,
            ..SystemParams::default()
        };
        assert!(p.validate().is_err());
    }
}
