//! Discrete-event model of the single-photon link: source, encoder, fibre
//! channel and a four-detector passive-basis receiver.
//!
//! Two paths produce click records. [`emit_pulses`] and
//! [`transmit_and_detect`] walk every pulse and are meant for short runs and
//! cross-checks. [`LinkSimulator`] skips directly from one detected pulse to
//! the next and is what sessions use; it draws from the same distributions.

mod detector;
mod drift;
mod params;
mod records;
mod source;

use thiserror::Error;

pub use detector::{transmit_and_detect, ClickRecord, LinkSimulator, LinkStats, DETECTORS, PULSE_NONE};
pub use drift::{compensate, step_drift, CompensatorConfig, DriftConfig, DriftModel, DriftState};
pub use params::SystemParams;
pub use records::{
    read_click_records, read_pulse_records, write_click_records, write_pulse_records, RecordKind, RECORD_BYTES,
};
pub use source::{emit_pulses, encode_burst, AliceSource, PulseEmitter, PulseRecord};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("record format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        SimError::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn index(self) -> u8 {
        match self {
            Basis::Z => 0,
            Basis::X => 1,
        }
    }

    pub fn from_index(i: u8) -> Self {
        if i & 1 == 0 {
            Basis::Z
        } else {
            Basis::X
        }
    }
}

/// Independent generator streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stream {
    Alice = 0,
    Signal = 1,
    Bob = 2,
    Dark = 3, // 3..7, one per detector
    Jitter = 7,
    Drift = 8,
}

pub(crate) fn stream_rng(seed: u64, stream: Stream, offset: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64 + offset);
    rng
}
