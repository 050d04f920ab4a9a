//! Bit-exact framing of the classical channel.
//!
//! ```text
//! offset  size  field
//! 0       4     length of everything after this field, u32 big-endian
//! 4       1     type code
//! 5       8     frame_id, u64 big-endian
//! 13      8     sequence number, u64 big-endian
//! 21      ...   payload
//! ```
//!
//! The length prefix therefore equals `17 + payload.len()`. Payload layouts
//! of the individual message types are documented on the payload structs;
//! all integers are big-endian and bit strings are packed MSB first.

use std::io::Read;

use thiserror::Error;

use crate::bits::{pack_bytes, unpack_bytes};

/// Bytes of a message after the length prefix, excluding the payload.
pub const HEADER_LEN: usize = 17;
/// Largest accepted length prefix.
pub const MAX_MESSAGE_LEN: usize = 64 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("truncated message: {0}")]
    Truncated(String),
    #[error("sequence regression: got {got} after {last}")]
    SequenceRegression { got: u64, last: u64 },
    #[error("message of {0} bytes exceeds the limit")]
    TooLarge(usize),
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("transport: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    BasisAnnounce = 0x01,
    SampleDisclose = 0x02,
    Syndrome = 0x03,
    VerifyHash = 0x04,
    PaSeed = 0x05,
    AuthTag = 0x06,
    Abort = 0x07,
    FrameAck = 0x08,
}

impl MessageType {
    pub fn from_code(code: u8) -> Result<Self, WireError> {
        Ok(match code {
            0x01 => Self::BasisAnnounce,
            0x02 => Self::SampleDisclose,
            0x03 => Self::Syndrome,
            0x04 => Self::VerifyHash,
            0x05 => Self::PaSeed,
            0x06 => Self::AuthTag,
            0x07 => Self::Abort,
            0x08 => Self::FrameAck,
            other => return Err(WireError::UnknownType(other)),
        })
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub kind: MessageType,
    pub frame_id: u64,
    pub seq: u64,
    pub payload: Vec<u8>,
}

pub fn encode_message(msg: &WireMessage) -> Vec<u8> {
    let len = HEADER_LEN + msg.payload.len();
    let mut out = Vec::with_capacity(4 + len);
    out.extend_from_slice(&(len as u32).to_be_bytes());
    out.push(msg.kind.code());
    out.extend_from_slice(&msg.frame_id.to_be_bytes());
    out.extend_from_slice(&msg.seq.to_be_bytes());
    out.extend_from_slice(&msg.payload);
    out
}

/// Decodes exactly one message occupying all of `bytes`.
pub fn decode_message(bytes: &[u8]) -> Result<WireMessage, WireError> {
    if bytes.len() < 4 {
        return Err(WireError::Truncated("missing length prefix".into()));
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    if len > MAX_MESSAGE_LEN {
        return Err(WireError::TooLarge(len));
    }
    if len < HEADER_LEN {
        return Err(WireError::Truncated(format!("length {len} shorter than the header")));
    }
    if bytes.len() != 4 + len {
        return Err(WireError::Truncated(format!(
            "prefix says {len} bytes, {} present",
            bytes.len() - 4
        )));
    }
    decode_body(&bytes[4..])
}

fn decode_body(body: &[u8]) -> Result<WireMessage, WireError> {
    Ok(WireMessage {
        kind: MessageType::from_code(body[0])?,
        frame_id: u64::from_be_bytes(body[1..9].try_into().expect("8 bytes")),
        seq: u64::from_be_bytes(body[9..17].try_into().expect("8 bytes")),
        payload: body[17..].to_vec(),
    })
}

/// Reads one message from a byte stream.
pub fn read_message(r: &mut impl Read) -> Result<WireMessage, WireError> {
    let mut prefix = [0u8; 4];
    r.read_exact(&mut prefix).map_err(io_err)?;
    let len = u32::from_be_bytes(prefix) as usize;
    if len > MAX_MESSAGE_LEN {
        return Err(WireError::TooLarge(len));
    }
    if len < HEADER_LEN {
        return Err(WireError::Truncated(format!("length {len} shorter than the header")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(io_err)?;
    decode_body(&body)
}

fn io_err(e: std::io::Error) -> WireError {
    WireError::Io(e.to_string())
}

/// Enforces strictly increasing sequence numbers on one direction.
#[derive(Debug, Clone, Default)]
pub struct SequenceCheck {
    last: Option<u64>,
}

impl SequenceCheck {
    pub fn accept(&mut self, seq: u64) -> Result<(), WireError> {
        if let Some(last) = self.last {
            if seq <= last {
                return Err(WireError::SequenceRegression { got: seq, last });
            }
        }
        self.last = Some(seq);
        Ok(())
    }
}

/// Cursor over a payload.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Truncated(format!(
                "payload needs {n} more bytes, {} left",
                self.buf.len()
            )));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        self.take(n)
    }

    /// `u32` bit count followed by the packed bits.
    pub(crate) fn bits(&mut self) -> Result<Vec<u8>, WireError> {
        let n = self.u32()? as usize;
        let packed = self.take(n.div_ceil(8))?;
        Ok(unpack_bytes(packed, n).expect("length checked"))
    }

    pub(crate) fn varint(&mut self) -> Result<u64, WireError> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.u8()?;
            v |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(WireError::Malformed("varint longer than 64 bits".into()))
    }

    pub(crate) fn rest(&mut self) -> &'a [u8] {
        std::mem::take(&mut self.buf)
    }

    pub(crate) fn finish(&self) -> Result<(), WireError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(WireError::Malformed(format!("{} trailing bytes", self.buf.len())))
        }
    }
}

pub(crate) fn put_bits(out: &mut Vec<u8>, bits: &[u8]) {
    out.extend_from_slice(&(bits.len() as u32).to_be_bytes());
    out.extend_from_slice(&pack_bytes(bits));
}

pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}
