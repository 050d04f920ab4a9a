//! Two-party post-processing over an authenticated classical channel.
//!
//! Bob drives the session. Per frame the message flow is
//!
//! ```text
//! sifting, repeated until both buffers hold n + m bits:
//!   B -> A  BASIS_ANNOUNCE detections   (pulse indices)
//!   A -> B  BASIS_ANNOUNCE bases        (Alice's basis per detection)
//!   B -> A  BASIS_ANNOUNCE matched      (one flag per detection)
//! B -> A  FRAME_ACK keep | discard_scan
//! A -> B  SAMPLE_DISCLOSE               (sample seed and Alice's sample)
//! B -> A  SAMPLE_DISCLOSE               (Bob's sample)
//! A -> B  SYNDROME | FRAME_ACK discard_qber
//! B -> A  FRAME_ACK decoded | decode_failed   (one retry at a lower rate)
//! A -> B  VERIFY_HASH
//! B -> A  FRAME_ACK verified | verify_failed
//! A -> B  PA_SEED | FRAME_ACK no_key
//! B -> A  AUTH_TAG                      (over the frame transcript)
//! A -> B  AUTH_TAG                      (over the transcript and Bob's tag)
//! ```
//!
//! The session opens with a `FRAME_ACK hello` exchange carrying the
//! configuration digest and ends with `FRAME_ACK close` from Bob. Each tag
//! spends 86 one-time-pad bits from the key ledger; the ledger is refilled
//! from the first `nu_auth` bits of each frame's amplified key. Bob keeps a
//! frame's key once Alice's tag verifies; Alice keeps hers when Bob's next
//! message arrives and is not an abort.

mod channel;
mod config;
mod loopback;
mod messages;
mod peers;
mod report;
mod sources;
mod transport;
mod wire;

use thiserror::Error;

pub use config::{bootstrap_key_from_seed, SessionConfig};
pub use loopback::{forward_all, run_loopback, run_loopback_with};
pub use messages::{Abort, AbortCode, BasisAnnounce, FrameAck, PaSeed, Payload, SampleDisclose, Syndrome, VerifyHash};
pub use peers::{run_alice, run_bob, run_session, Station};
pub use report::{
    read_frame_log, write_frame_log, AbortInfo, FrameKey, FrameRecord, FrameStatus, Role, SessionReport,
    FRAME_LOG_VERSION,
};
pub use sources::{ClickSource, PulseSource, RecordedClicks, RecordedPulses};
pub use transport::{memory_duplex, Intercept, Interceptor, MemoryPipe, Transport};
pub use wire::{
    decode_message, encode_message, read_message, MessageType, SequenceCheck, WireError, WireMessage, HEADER_LEN,
    MAX_MESSAGE_LEN,
};

use crate::hashing::HashError;
use crate::ldpc::LdpcError;
use crate::protocol::ProtocolError;
use crate::security::SecurityError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("wire: {0}")]
    Wire(#[from] WireError),
    #[error("peer aborted ({:?}): {}", .0.code, .0.reason)]
    PeerAbort(Abort),
    #[error("authentication failed in frame {frame_id}")]
    AuthFailure { frame_id: u64 },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Security(#[from] SecurityError),
    #[error(transparent)]
    Estimation(#[from] ProtocolError),
}

impl SessionError {
    /// Code announced to the peer when this error ends the session.
    pub fn abort_code(&self) -> AbortCode {
        match self {
            Self::Wire(WireError::Io(_)) | Self::Io(_) => AbortCode::Transport,
            Self::Wire(_) | Self::Protocol(_) | Self::Estimation(_) => AbortCode::Protocol,
            Self::PeerAbort(a) => a.code,
            Self::AuthFailure { .. } => AbortCode::AuthFailure,
            Self::Config(_) => AbortCode::ConfigMismatch,
            Self::Hash(HashError::Exhausted { .. }) => AbortCode::KeyExhausted,
            Self::Hash(_) | Self::Ldpc(_) | Self::Security(_) => AbortCode::Internal,
        }
    }
}
