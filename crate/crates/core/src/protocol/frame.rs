use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{estimate_qber, qber_upper_bound, ProtocolError};

/// Key bits per frame.
pub const DEFAULT_FRAME_LEN: usize = 200_000;

/// Estimation sample size for `n` key bits: `floor(n / 10)`.
pub fn sample_count(n: usize) -> usize {
    n / 10
}

/// `m` distinct positions out of `0..total`, drawn uniformly without
/// replacement from `seed`, in ascending order.
pub fn sample_positions(total: usize, m: usize, seed: u64) -> Result<Vec<usize>, ProtocolError> {
    if m > total {
        return Err(ProtocolError::InvalidParameter(format!(
            "cannot sample {m} of {total} positions"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = rand::seq::index::sample(&mut rng, total, m).into_vec();
    pos.sort_unstable();
    Ok(pos)
}

/// Splits frame bits into `(key, sample)` where `sample` holds the bits at
/// `positions` (ascending) and `key` the rest, both in frame order.
pub fn split_frame(bits: &[u8], positions: &[usize]) -> Result<(Vec<u8>, Vec<u8>), ProtocolError> {
    let mut key = Vec::with_capacity(bits.len().saturating_sub(positions.len()));
    let mut sample = Vec::with_capacity(positions.len());
    let mut next = positions.iter().peekable();
    for (i, &b) in bits.iter().enumerate() {
        if next.peek() == Some(&&i) {
            sample.push(b);
            next.next();
        } else {
            key.push(b);
        }
    }
    if next.next().is_some() {
        return Err(ProtocolError::InvalidParameter(
            "sample position beyond the frame".into(),
        ));
    }
    Ok((key, sample))
}

/// `n + m` consecutive sifted bits of one party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFrame {
    pub frame_id: u64,
    pub bits: Vec<u8>,
    /// Some bit of the frame was collected during a compensation scan.
    pub discard: bool,
}

/// Cuts a party's sifted bit stream into frames of `n + floor(n / 10)`.
#[derive(Debug, Clone)]
pub struct FrameBuffer {
    key_len: usize,
    sample_len: usize,
    bits: Vec<u8>,
    scan: Vec<bool>,
    next_id: u64,
}

impl FrameBuffer {
    pub fn new(key_len: usize) -> Self {
        Self {
            key_len,
            sample_len: sample_count(key_len),
            bits: Vec::new(),
            scan: Vec::new(),
            next_id: 0,
        }
    }

    pub fn key_len(&self) -> usize {
        self.key_len
    }

    pub fn sample_len(&self) -> usize {
        self.sample_len
    }

    /// Sifted bits per frame, `n + m`.
    pub fn frame_bits(&self) -> usize {
        self.key_len + self.sample_len
    }

    pub fn buffered(&self) -> usize {
        self.bits.len()
    }

    pub fn push(&mut self, bit: u8, during_scan: bool) {
        self.bits.push(bit & 1);
        self.scan.push(during_scan);
    }

    pub fn pop(&mut self) -> Option<RawFrame> {
        let len = self.frame_bits();
        if self.bits.len() < len {
            return None;
        }
        let bits: Vec<u8> = self.bits.drain(..len).collect();
        let discard = self.scan.drain(..len).any(|s| s);
        let frame_id = self.next_id;
        self.next_id += 1;
        Some(RawFrame {
            frame_id,
            bits,
            discard,
        })
    }
}

/// One party's frame after parameter estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct SiftedFrame {
    pub frame_id: u64,
    pub key_bits: Vec<u8>,
    pub est_sample_bits: Vec<u8>,
    pub q_hat: f64,
    pub q_tilde: f64,
    pub discard_flag: bool,
}

impl SiftedFrame {
    /// Removes the sample chosen by `sample_seed`, compares it with the
    /// peer's disclosed sample and bounds the QBER.
    pub fn assemble(
        raw: &RawFrame,
        sample_len: usize,
        sample_seed: u64,
        peer_sample: &[u8],
        eps_pe: f64,
    ) -> Result<Self, ProtocolError> {
        let positions = sample_positions(raw.bits.len(), sample_len, sample_seed)?;
        let (key_bits, est_sample_bits) = split_frame(&raw.bits, &positions)?;
        let q_hat = estimate_qber(&est_sample_bits, peer_sample)?;
        let q_tilde = qber_upper_bound(q_hat, sample_len, eps_pe)?;
        Ok(Self {
            frame_id: raw.frame_id,
            key_bits,
            est_sample_bits,
            q_hat,
            q_tilde,
            discard_flag: raw.discard,
        })
    }
}
