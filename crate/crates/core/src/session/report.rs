//! Session outcome: per-frame log, keys and summary.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::messages::AbortCode;
use super::SessionError;
use crate::security::{KeyLengthResult, LeakageBreakdown};

/// Version line written before the CSV header of a frame log.
pub const FRAME_LOG_VERSION: &str = "# qkd-frame-log v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStatus {
    /// Key extracted.
    Ok,
    /// Reconciled and verified, but the bound left no key.
    NoKey,
    /// Some bit was sifted during a compensation scan.
    DiscardScan,
    /// The estimated QBER is beyond what the codes support.
    DiscardQber,
    DecodeFailed,
    VerifyFailed,
}

impl FrameStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NoKey => "no_key",
            Self::DiscardScan => "discard_scan",
            Self::DiscardQber => "discard_qber",
            Self::DecodeFailed => "decode_failed",
            Self::VerifyFailed => "verify_failed",
        }
    }
}

/// One row of the frame log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_id: u64,
    pub status: FrameStatus,
    pub n: usize,
    pub m: usize,
    pub q_hat: Option<f64>,
    pub q_tilde: Option<f64>,
    /// Effective rate of the last reconciliation attempt.
    pub rate: Option<f64>,
    pub attempts: u8,
    /// Syndrome bits sent over all attempts.
    pub syndrome_bits: usize,
    pub leak_ec: usize,
    pub leak_ev: usize,
    pub nu_auth: usize,
    pub a: f64,
    pub delta: Option<f64>,
    pub entropy_term: Option<f64>,
    pub l_key: usize,
    /// Errors fixed by the decoder; known to Bob only.
    pub corrected_errors: Option<usize>,
}

impl FrameRecord {
    pub(crate) fn empty(frame_id: u64, n: usize, m: usize, nu_auth: usize, a: f64) -> Self {
        Self {
            frame_id,
            status: FrameStatus::Ok,
            n,
            m,
            q_hat: None,
            q_tilde: None,
            rate: None,
            attempts: 0,
            syndrome_bits: 0,
            leak_ec: 0,
            leak_ev: 0,
            nu_auth,
            a,
            delta: None,
            entropy_term: None,
            l_key: 0,
            corrected_errors: None,
        }
    }

    /// The bound behind this row, if the frame got that far.
    pub fn key_length(&self) -> Option<KeyLengthResult> {
        Some(KeyLengthResult {
            n: self.n,
            l_key: self.l_key,
            a: self.a,
            q_tilde: self.q_tilde?,
            delta: self.delta?,
            entropy_term: self.entropy_term?,
            leak_ec: self.leak_ec,
            leak_ev: self.leak_ev,
            nu_auth: self.nu_auth,
        })
    }

    pub fn breakdown(&self) -> Option<LeakageBreakdown> {
        Some(self.key_length()?.breakdown(self.q_hat?))
    }

    /// Efficiency `leak_EC / (n H(q))` against the decoder's error count.
    pub fn efficiency(&self) -> Option<f64> {
        let q = self.corrected_errors? as f64 / self.n as f64;
        let h = crate::security::binary_entropy(q);
        (h > 0.0).then(|| self.leak_ec as f64 / (self.n as f64 * h))
    }
}

/// Secret key of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameKey {
    pub frame_id: u64,
    /// One bit per byte.
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbortInfo {
    pub code: AbortCode,
    pub reason: String,
    /// Raised by a failed authentication check, locally or at the peer.
    pub security_alarm: bool,
    /// Whether the abort came from the peer.
    pub remote: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub role: Role,
    pub frames: Vec<FrameRecord>,
    pub keys: Vec<FrameKey>,
    pub abort: Option<AbortInfo>,
    /// Simulated link time covered, s.
    pub elapsed_s: f64,
    /// Secret bits spent on tags, setup excluded.
    pub auth_consumed: usize,
    pub auth_setup: usize,
    pub auth_replenished: usize,
}

impl SessionReport {
    pub(crate) fn new(role: Role) -> Self {
        Self {
            role,
            frames: Vec::new(),
            keys: Vec::new(),
            abort: None,
            elapsed_s: 0.0,
            auth_consumed: 0,
            auth_setup: 0,
            auth_replenished: 0,
        }
    }

    pub fn secret_bits(&self) -> usize {
        self.keys.iter().map(|k| k.bits.len()).sum()
    }

    pub fn frames_with_status(&self, status: FrameStatus) -> usize {
        self.frames.iter().filter(|f| f.status == status).count()
    }

    /// Realised secret key rate over the simulated time, bit/s.
    pub fn skr_bps(&self) -> f64 {
        if self.elapsed_s > 0.0 {
            self.secret_bits() as f64 / self.elapsed_s
        } else {
            0.0
        }
    }

    pub fn succeeded(&self) -> bool {
        self.abort.is_none()
    }

    /// SHA-256 over the MSB-first packing of all frame keys in order.
    pub fn key_digest(&self) -> String {
        let mut h = Sha256::new();
        for k in &self.keys {
            h.update(crate::bits::pack_bytes(&k.bits));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Key bits the session assumed were spent on authentication.
    pub fn nu_auth_total(&self) -> usize {
        self.frames.iter().map(|f| f.nu_auth).sum()
    }

    pub fn write_frame_log(&self, w: impl Write) -> Result<(), SessionError> {
        write_frame_log(&self.frames, w)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "role             {}\nframes           {}\n",
            self.role,
            self.frames.len()
        );
        for st in [
            FrameStatus::Ok,
            FrameStatus::NoKey,
            FrameStatus::DiscardScan,
            FrameStatus::DiscardQber,
            FrameStatus::DecodeFailed,
            FrameStatus::VerifyFailed,
        ] {
            let c = self.frames_with_status(st);
            if c > 0 {
                s += &format!("  {:<14} {c}\n", st.as_str());
            }
        }
        s += &format!(
            "secret bits      {}\nlink time        {:.3} s\nsecret key rate  {:.1} bit/s\nauth key used    {} (+{} setup), replenished {}\nkey digest       {}\n",
            self.secret_bits(),
            self.elapsed_s,
            self.skr_bps(),
            self.auth_consumed,
            self.auth_setup,
            self.auth_replenished,
            self.key_digest()
        );
        match &self.abort {
            None => s += "status           completed\n",
            Some(a) => {
                s += &format!(
                    "status           aborted ({:?}{}{}): {}\n",
                    a.code,
                    if a.remote { ", by peer" } else { "" },
                    if a.security_alarm { ", SECURITY ALARM" } else { "" },
                    a.reason
                )
            }
        }
        s
    }
}

pub fn write_frame_log(frames: &[FrameRecord], mut w: impl Write) -> Result<(), SessionError> {
    writeln!(w, "{FRAME_LOG_VERSION}").map_err(|e| SessionError::Io(e.to_string()))?;
    let mut csv = csv::Writer::from_writer(w);
    for f in frames {
        csv.serialize(f).map_err(|e| SessionError::Io(e.to_string()))?;
    }
    csv.flush().map_err(|e| SessionError::Io(e.to_string()))
}

/// Reads a frame log, checking the version line and the column set.
pub fn read_frame_log(mut r: impl Read) -> Result<Vec<FrameRecord>, SessionError> {
    let mut text = String::new();
    r.read_to_string(&mut text)
        .map_err(|e| SessionError::Io(e.to_string()))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    if first.trim_end() != FRAME_LOG_VERSION {
        return Err(SessionError::Io(format!("not a frame log: first line {first:?}")));
    }
    let mut csv = csv::Reader::from_reader(rest.as_bytes());
    csv.deserialize()
        .map(|row| row.map_err(|e| SessionError::Io(format!("frame log: {e}"))))
        .collect()
}
