//! Typed payloads of the wire messages.

use super::wire::{put_bits, put_varint, MessageType, Reader, WireError};
use crate::hashing::AuthTag;

/// Sub-type byte of a `BASIS_ANNOUNCE` payload.
const DETECTIONS: u8 = 0;
const BASES: u8 = 1;
const MATCHED: u8 = 2;

/// Sifting exchange.
///
/// ```text
/// Detections: u8 0, u32 count, count varint deltas of ascending pulse indices
///             (the first delta is from 0)
/// Bases:      u8 1, u32 count, packed bits (1 = X) for each detection
/// Matched:    u8 2, u32 count, packed bits (1 = bases agree) per detection
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisAnnounce {
    Detections(Vec<u64>),
    Bases(Vec<u8>),
    Matched(Vec<u8>),
}

impl BasisAnnounce {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Self::Detections(idx) => {
                out.push(DETECTIONS);
                out.extend_from_slice(&(idx.len() as u32).to_be_bytes());
                let mut prev = 0;
                for &i in idx {
                    put_varint(&mut out, i - prev);
                    prev = i;
                }
            }
            Self::Bases(bits) => {
                out.push(BASES);
                put_bits(&mut out, bits);
            }
            Self::Matched(bits) => {
                out.push(MATCHED);
                put_bits(&mut out, bits);
            }
        }
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(payload);
        let msg = match r.u8()? {
            DETECTIONS => {
                let n = r.u32()? as usize;
                let mut idx = Vec::with_capacity(n.min(payload.len()));
                let mut prev = 0u64;
                for k in 0..n {
                    let d = r.varint()?;
                    if k > 0 && d == 0 {
                        return Err(WireError::Malformed("pulse indices must be strictly ascending".into()));
                    }
                    prev = prev
                        .checked_add(d)
                        .ok_or_else(|| WireError::Malformed("pulse index overflow".into()))?;
                    idx.push(prev);
                }
                Self::Detections(idx)
            }
            BASES => Self::Bases(r.bits()?),
            MATCHED => Self::Matched(r.bits()?),
            other => return Err(WireError::Malformed(format!("unknown basis announcement {other}"))),
        };
        r.finish()?;
        Ok(msg)
    }
}

/// Estimation sample: `u64 sample_seed, u32 count, packed bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleDisclose {
    pub sample_seed: u64,
    pub bits: Vec<u8>,
}

impl SampleDisclose {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.sample_seed.to_be_bytes().to_vec();
        put_bits(&mut out, &self.bits);
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(payload);
        let msg = Self {
            sample_seed: r.u64()?,
            bits: r.bits()?,
        };
        r.finish()?;
        Ok(msg)
    }
}

/// One reconciliation attempt.
///
/// ```text
/// u8 attempt, u8 code_index, u32 punctured, u32 shortened,
/// u64 filler_seed, u32 syndrome bits, packed syndrome
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub attempt: u8,
    pub code_index: u8,
    pub punctured: u32,
    pub shortened: u32,
    pub filler_seed: u64,
    pub syndrome: Vec<u8>,
}

impl Syndrome {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.attempt, self.code_index];
        out.extend_from_slice(&self.punctured.to_be_bytes());
        out.extend_from_slice(&self.shortened.to_be_bytes());
        out.extend_from_slice(&self.filler_seed.to_be_bytes());
        put_bits(&mut out, &self.syndrome);
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(payload);
        let msg = Self {
            attempt: r.u8()?,
            code_index: r.u8()?,
            punctured: r.u32()?,
            shortened: r.u32()?,
            filler_seed: r.u64()?,
            syndrome: r.bits()?,
        };
        r.finish()?;
        Ok(msg)
    }
}

/// Error verification: `u64 k1, u64 a, u64 tag` (tag in the low 34 bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyHash {
    pub k1: u64,
    pub a: u64,
    pub tag: u64,
}

impl VerifyHash {
    pub fn encode(&self) -> Vec<u8> {
        [self.k1, self.a, self.tag]
            .iter()
            .flat_map(|v| v.to_be_bytes())
            .collect()
    }

    pub fn decode(payload: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(payload);
        let msg = Self {
            k1: r.u64()?,
            a: r.u64()?,
            tag: r.u64()?,
        };
        r.finish()?;
        Ok(msg)
    }
}

/// Toeplitz seed: `u32 input_len, u32 output_len, u32 count, packed seed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaSeed {
    pub input_len: u32,
    pub output_len: u32,
    pub seed: Vec<u8>,
}

impl PaSeed {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.input_len.to_be_bytes().to_vec();
        out.extend_from_slice(&self.output_len.to_be_bytes());
        put_bits(&mut out, &self.seed);
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(payload);
        let msg = Self {
            input_len: r.u32()?,
            output_len: r.u32()?,
            seed: r.bits()?,
        };
        r.finish()?;
        Ok(msg)
    }
}

/// Encrypted tag: 11 bytes holding the 86-bit value right-aligned.
pub fn encode_auth_tag(tag: &AuthTag) -> Vec<u8> {
    tag.to_bytes().to_vec()
}

pub fn decode_auth_tag(payload: &[u8]) -> Result<AuthTag, WireError> {
    let bytes: [u8; 11] = payload
        .try_into()
        .map_err(|_| WireError::Malformed(format!("auth tag of {} bytes", payload.len())))?;
    Ok(AuthTag::from_bytes(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum AbortCode {
    Transport = 1,
    AuthFailure = 2,
    Protocol = 3,
    ConfigMismatch = 4,
    KeyExhausted = 5,
    Internal = 6,
}

impl AbortCode {
    pub fn from_code(code: u8) -> Result<Self, WireError> {
        Ok(match code {
            1 => Self::Transport,
            2 => Self::AuthFailure,
            3 => Self::Protocol,
            4 => Self::ConfigMismatch,
            5 => Self::KeyExhausted,
            6 => Self::Internal,
            other => return Err(WireError::Malformed(format!("abort code {other}"))),
        })
    }
}

/// `u8 code, UTF-8 reason`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abort {
    pub code: AbortCode,
    pub reason: String,
}

impl Abort {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.code as u8];
        out.extend_from_slice(self.reason.as_bytes());
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(payload);
        let code = AbortCode::from_code(r.u8()?)?;
        let reason = String::from_utf8_lossy(r.rest()).into_owned();
        Ok(Self { code, reason })
    }
}

/// Frame control: `u8 status` followed by a status-specific body.
///
/// ```text
/// 0 Hello         32-byte configuration digest
/// 1 Keep
/// 2 DiscardScan
/// 3 DiscardQber
/// 4 Decoded
/// 5 DecodeFailed
/// 6 Verified
/// 7 VerifyFailed
/// 8 NoKey
/// 9 Close         u64 simulated link time in nanoseconds
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameAck {
    Hello([u8; 32]),
    Keep,
    DiscardScan,
    DiscardQber,
    Decoded,
    DecodeFailed,
    Verified,
    VerifyFailed,
    NoKey,
    Close { elapsed_ns: u64 },
}

impl FrameAck {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Self::Hello(d) => {
                let mut out = vec![0];
                out.extend_from_slice(d);
                out
            }
            Self::Keep => vec![1],
            Self::DiscardScan => vec![2],
            Self::DiscardQber => vec![3],
            Self::Decoded => vec![4],
            Self::DecodeFailed => vec![5],
            Self::Verified => vec![6],
            Self::VerifyFailed => vec![7],
            Self::NoKey => vec![8],
            Self::Close { elapsed_ns } => {
                let mut out = vec![9];
                out.extend_from_slice(&elapsed_ns.to_be_bytes());
                out
            }
        }
    }

    pub fn decode(payload: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(payload);
        let msg = match r.u8()? {
            0 => Self::Hello(r.bytes(32)?.try_into().expect("32 bytes")),
            1 => Self::Keep,
            2 => Self::DiscardScan,
            3 => Self::DiscardQber,
            4 => Self::Decoded,
            5 => Self::DecodeFailed,
            6 => Self::Verified,
            7 => Self::VerifyFailed,
            8 => Self::NoKey,
            9 => Self::Close { elapsed_ns: r.u64()? },
            other => return Err(WireError::Malformed(format!("unknown frame status {other}"))),
        };
        r.finish()?;
        Ok(msg)
    }
}

/// A decoded payload together with its type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    BasisAnnounce(BasisAnnounce),
    SampleDisclose(SampleDisclose),
    Syndrome(Syndrome),
    VerifyHash(VerifyHash),
    PaSeed(PaSeed),
    AuthTag(AuthTag),
    Abort(Abort),
    FrameAck(FrameAck),
}

impl Payload {
    pub fn kind(&self) -> MessageType {
        match self {
            Self::BasisAnnounce(_) => MessageType::BasisAnnounce,
            Self::SampleDisclose(_) => MessageType::SampleDisclose,
            Self::Syndrome(_) => MessageType::Syndrome,
            Self::VerifyHash(_) => MessageType::VerifyHash,
            Self::PaSeed(_) => MessageType::PaSeed,
            Self::AuthTag(_) => MessageType::AuthTag,
            Self::Abort(_) => MessageType::Abort,
            Self::FrameAck(_) => MessageType::FrameAck,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        match self {
            Self::BasisAnnounce(m) => m.encode(),
            Self::SampleDisclose(m) => m.encode(),
            Self::Syndrome(m) => m.encode(),
            Self::VerifyHash(m) => m.encode(),
            Self::PaSeed(m) => m.encode(),
            Self::AuthTag(m) => encode_auth_tag(m),
            Self::Abort(m) => m.encode(),
            Self::FrameAck(m) => m.encode(),
        }
    }

    pub fn decode(kind: MessageType, payload: &[u8]) -> Result<Self, WireError> {
        Ok(match kind {
            MessageType::BasisAnnounce => Self::BasisAnnounce(BasisAnnounce::decode(payload)?),
            MessageType::SampleDisclose => Self::SampleDisclose(SampleDisclose::decode(payload)?),
            MessageType::Syndrome => Self::Syndrome(Syndrome::decode(payload)?),
            MessageType::VerifyHash => Self::VerifyHash(VerifyHash::decode(payload)?),
            MessageType::PaSeed => Self::PaSeed(PaSeed::decode(payload)?),
            MessageType::AuthTag => Self::AuthTag(decode_auth_tag(payload)?),
            MessageType::Abort => Self::Abort(Abort::decode(payload)?),
            MessageType::FrameAck => Self::FrameAck(FrameAck::decode(payload)?),
        })
    }
}
