use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use super::{stream_rng, Basis, SimError, Stream, SystemParams};

/// Emission truth for one pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseRecord {
    pub pulse_index: u64,
    pub basis: Basis,
    pub bit: u8,
    pub photon_count: u8,
    pub timestamp_s: f64,
}

/// Alice's state choices as a random-access function of the pulse index.
///
/// Pulse `i` consumes words `2i` and `2i + 1` of a ChaCha8 stream, so any
/// pulse can be regenerated without replaying the ones before it. The
/// sequence is pseudo-random; a deployed system would replace it with a
/// physical random source.
#[derive(Debug, Clone)]
pub struct AliceSource {
    rng: ChaCha8Rng,
    threshold: u64,
}

impl AliceSource {
    pub fn new(seed: u64, basis_ratio: f64) -> Self {
        Self {
            rng: stream_rng(seed, Stream::Alice, 0),
            threshold: (basis_ratio.clamp(0.0, 1.0) * 4_294_967_296.0).round() as u64,
        }
    }

    fn decode(&self, a: u32, b: u32) -> (Basis, u8) {
        let basis = if (a as u64) < self.threshold {
            Basis::X
        } else {
            Basis::Z
        };
        (basis, (b & 1) as u8)
    }

    /// Basis and bit prepared in pulse `index`.
    pub fn prepare(&mut self, index: u64) -> (Basis, u8) {
        self.rng.set_word_pos(2 * index as u128);
        let a = self.rng.next_u32();
        let b = self.rng.next_u32();
        self.decode(a, b)
    }

    /// Choices for pulses `start..start + len`, read sequentially.
    pub fn prepare_range(&mut self, start: u64, len: usize) -> Vec<(Basis, u8)> {
        self.rng.set_word_pos(2 * start as u128);
        (0..len)
            .map(|_| {
                let a = self.rng.next_u32();
                let b = self.rng.next_u32();
                self.decode(a, b)
            })
            .collect()
    }
}

/// The states of the first burst of `burst_len` pulses.
pub fn encode_burst(rng_seed: u64, burst_len: usize, basis_ratio: f64) -> Result<Vec<(Basis, u8)>, SimError> {
    if burst_len == 0 {
        return Err(SimError::param("burst_len", "must be at least 1"));
    }
    if !(basis_ratio > 0.0 && basis_ratio < 1.0) {
        return Err(SimError::param("basis_ratio", format!("{basis_ratio} outside (0, 1)")));
    }
    Ok(AliceSource::new(rng_seed, basis_ratio).prepare_range(0, burst_len))
}

/// Sequential pulse generator; see [`emit_pulses`].
#[derive(Debug, Clone)]
pub struct PulseEmitter {
    alice: AliceSource,
    photons: ChaCha8Rng,
    next: u64,
    end: u64,
    p_one_or_more: f64,
    p_two: f64,
    period: f64,
}

impl Iterator for PulseEmitter {
    type Item = PulseRecord;

    fn next(&mut self) -> Option<PulseRecord> {
        if self.next >= self.end {
            return None;
        }
        let i = self.next;
        self.next += 1;
        let a = self.alice.rng.next_u32();
        let b = self.alice.rng.next_u32();
        let (basis, bit) = self.alice.decode(a, b);
        let u: f64 = self.photons.random();
        let photon_count = if u < self.p_two {
            2
        } else if u < self.p_one_or_more {
            1
        } else {
            0
        };
        Some(PulseRecord {
            pulse_index: i,
            basis,
            bit,
            photon_count,
            timestamp_s: i as f64 * self.period,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

/// Generates `n_pulses` pulses: at least one photon with probability
/// `η = η_S η_E`, two photons with probability `g2 η^2 / 2`.
pub fn emit_pulses(params: &SystemParams, n_pulses: u64, rng_seed: u64) -> Result<PulseEmitter, SimError> {
    params.validate()?;
    if n_pulses == 0 {
        return Err(SimError::param("n_pulses", "must be at least 1"));
    }
    let mut alice = AliceSource::new(rng_seed, params.basis_ratio);
    alice.rng.set_word_pos(0);
    Ok(PulseEmitter {
        alice,
        photons: stream_rng(rng_seed, Stream::Signal, 0),
        next: 0,
        end: n_pulses,
        p_one_or_more: params.eta_pulse(),
        p_two: params.two_photon_prob(),
        period: params.pulse_period(),
    })
}
