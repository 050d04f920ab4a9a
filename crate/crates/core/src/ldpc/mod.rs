//! Rate-adaptive LDPC information reconciliation.
//!
//! The sender transmits the syndrome of its frame under a base code chosen
//! from a small family; the receiver runs sum-product decoding against that
//! syndrome using its own noisy copy of the frame as side information.
//! Puncturing and shortening fine-tune the effective rate between the base
//! rates.

mod alist;
mod codebook;
mod decoder;
pub mod design;
mod distribution;
mod efficiency;
mod matrix;
mod peg;
mod rate;

use thiserror::Error;

pub use alist::{read_alist, write_alist};
pub use codebook::{
    shipped_distribution, BaseCode, Codebook, CodebookConfig, RateSelection, DEFAULT_BASE_RATES, MAX_SUPPORTED_QBER,
};
pub use decoder::{decode, DecodeOutcome, Decoder, TannerGraph, DEFAULT_MAX_ITERS};
pub use distribution::DegreeDistribution;
pub use efficiency::{measure_efficiency, simulate_frames, EfficiencyReport, FrameRun};
pub use matrix::ParityCheckMatrix;
pub use peg::{peg_construct, PegConfig, DEFAULT_BFS_BUDGET};
pub use rate::{effective_rate, filler_bits, PuncturePlan, RateAdaptConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdpcError {
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid degree distribution: {0}")]
    Distribution(String),
    #[error("code construction failed: {0}")]
    Construction(String),
    #[error("malformed matrix data: {0}")]
    Format(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("QBER {0} is outside the range supported by the code family")]
    UnsupportedQber(f64),
    #[error("i/o error: {0}")]
    Io(String),
}

/// A parity-check matrix together with how it was built.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: ParityCheckMatrix,
    distribution: Option<DegreeDistribution>,
    seed: Option<u64>,
}

impl LdpcCode {
    pub fn new(h: ParityCheckMatrix) -> Self {
        Self::with_provenance(h, None, None)
    }

    pub(crate) fn with_provenance(
        h: ParityCheckMatrix,
        distribution: Option<DegreeDistribution>,
        seed: Option<u64>,
    ) -> Self {
        Self { h, distribution, seed }
    }

    pub fn matrix(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn block_len(&self) -> usize {
        self.h.num_cols()
    }

    pub fn syndrome_len(&self) -> usize {
        self.h.num_rows()
    }

    /// `1 - rows / cols`.
    pub fn rate(&self) -> f64 {
        self.h.design_rate()
    }

    /// The distribution the code was built from, if known.
    pub fn distribution(&self) -> Option<&DegreeDistribution> {
        self.distribution.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Shortest cycle length; see [`ParityCheckMatrix::girth`].
    pub fn girth(&self) -> Option<usize> {
        self.h.girth(None)
    }

    /// `H x` over GF(2).
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>, LdpcError> {
        self.h.syndrome(bits)
    }
}
