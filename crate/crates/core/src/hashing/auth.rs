//! Wegman-Carter authentication.
//!
//! The hash part is `low_86(a * P(k))` over `GF(2^128)` with a secret key
//! `(k, a)` that is set up once per session. For distinct messages and any
//! offset `δ`, `Pr[h(m1) ^ h(m2) = δ] <= 2^-86 + L / 2^128`. Each tag is
//! then encrypted with 86 fresh one-time-pad bits, which are the only key
//! material consumed per tag.

use super::polyhash::block_count;
use super::{poly_hash, Field, HashError};

pub const AUTH_TAG_BITS: u32 = 86;

/// Secret, reusable hash key of the authentication family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthKey {
    pub k: u128,
    pub a: u128,
}

impl AuthKey {
    /// Key from 256 bits of secret material, MSB first.
    pub fn from_bits(bits: &[u8]) -> Result<Self, HashError> {
        if bits.len() != 256 {
            return Err(HashError::Length(format!(
                "auth key needs 256 bits, got {}",
                bits.len()
            )));
        }
        Ok(Self {
            k: bits_to_u128(&bits[..128]),
            a: bits_to_u128(&bits[128..]),
        })
    }
}

/// Bits (one per byte) as an unsigned integer, first bit most significant.
pub(crate) fn bits_to_u128(bits: &[u8]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | u128::from(b & 1))
}

/// An encrypted authentication tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthTag {
    pub bits: u128,
    /// One-time-pad bits spent on this tag.
    pub consumed_bits: usize,
}

impl AuthTag {
    /// The tag as 11 bytes, big-endian.
    pub fn to_bytes(&self) -> [u8; 11] {
        let b = self.bits.to_be_bytes();
        b[5..].try_into().expect("11 bytes")
    }

    pub fn from_bytes(bytes: [u8; 11]) -> Self {
        let mut b = [0u8; 16];
        b[5..].copy_from_slice(&bytes);
        Self {
            bits: u128::from_be_bytes(b) & ((1u128 << AUTH_TAG_BITS) - 1),
            consumed_bits: AUTH_TAG_BITS as usize,
        }
    }
}

/// Polynomial hash of a byte message; identical to [`poly_hash`] on the
/// MSB-first bit expansion.
fn poly_hash_bytes(bytes: &[u8], key: u128) -> u128 {
    let f = Field::GF2_128;
    let mut acc = 0u128;
    for chunk in bytes.chunks(16) {
        let mut b = [0u8; 16];
        b[..chunk.len()].copy_from_slice(chunk);
        acc = f.mul(acc ^ u128::from_be_bytes(b), key);
    }
    f.mul(acc ^ (bytes.len() as u128 * 8), key)
}

/// Tag of a bit message in an arbitrary field: `low_t(a P(k)) ^ pad`.
pub fn auth_tag_in(field: &Field, tag_bits: u32, bits: &[u8], k: u128, a: u128, pad: u128) -> u128 {
    let mask = if tag_bits >= 128 {
        u128::MAX
    } else {
        (1u128 << tag_bits) - 1
    };
    (field.mul(a, poly_hash(field, bits, k)) ^ pad) & mask
}

/// 86-bit tag of a byte message under `key` and a fresh 86-bit `pad`.
pub fn auth_tag(message: &[u8], key: &AuthKey, pad: u128) -> AuthTag {
    let mask = (1u128 << AUTH_TAG_BITS) - 1;
    let h = Field::GF2_128.mul(key.a, poly_hash_bytes(message, key.k));
    AuthTag {
        bits: (h ^ pad) & mask,
        consumed_bits: AUTH_TAG_BITS as usize,
    }
}

/// Recomputes the tag and compares.
pub fn auth_check(message: &[u8], tag: &AuthTag, key: &AuthKey, pad: u128) -> bool {
    auth_tag(message, key, pad).bits == tag.bits
}

/// Forgery bound `2^-86 + L / 2^128` for a message of `len_bytes` bytes.
pub fn auth_forgery_bound(len_bytes: usize) -> f64 {
    let f = Field::GF2_128;
    2f64.powi(-(AUTH_TAG_BITS as i32)) + block_count(&f, len_bytes * 8) as f64 / f.order()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_hash_matches_bit_hash() {
        let msg: Vec<u8> = (0..37u8).map(|i| i.wrapping_mul(73)).collect();
        let bits: Vec<u8> = msg
            .iter()
            .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
            .collect();
        let key = 0x0123_4567_89ab_cdef_fedc_ba98_7654_3210u128;
        assert_eq!(poly_hash_bytes(&msg, key), poly_hash(&Field::GF2_128, &bits, key));
    }

    #[test]
    fn tag_bytes_round_trip() {
        let t = AuthTag {
            bits: (1u128 << 85) | 0xabcdef,
            consumed_bits: 86,
        };
        assert_eq!(AuthTag::from_bytes(t.to_bytes()), t);
        assert!(auth_forgery_bound(1 << 20) < 1e-12);
    }
}
