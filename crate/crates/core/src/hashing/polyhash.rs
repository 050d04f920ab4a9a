//! Polynomial-evaluation hashing over `GF(2^k)`.
//!
//! A message of `len` bits is split MSB-first into `k`-bit blocks
//! `m_1 .. m_{L-1}` (the last one zero-padded), followed by a block holding
//! `len`. With key `k1` the hash is
//!
//! ```text
//! P(k1) = m_1 k1^L + m_2 k1^(L-1) + ... + m_L k1
//! ```
//!
//! Two distinct messages collide with probability at most `L / 2^k` over a
//! uniform `k1`, since their difference is a non-zero polynomial of degree
//! at most `L` without constant term. The verification tag multiplies by a
//! second key `a` and keeps the low `t` bits: for distinct messages the tag
//! collides with probability at most `2^-t + L / 2^k`.

use super::Field;

/// Number of blocks `L` for a message of `len` bits, length block included.
pub fn block_count(field: &Field, len: usize) -> usize {
    len.div_ceil(field.degree() as usize) + 1
}

/// `P(key)` for a bit message (one bit per byte).
pub fn poly_hash(field: &Field, bits: &[u8], key: u128) -> u128 {
    let k = field.degree() as usize;
    let mut acc = 0u128;
    for chunk in bits.chunks(k) {
        let mut block = 0u128;
        for &b in chunk {
            block = (block << 1) | u128::from(b & 1);
        }
        block <<= k - chunk.len();
        acc = field.mul(acc ^ block, key);
    }
    let len_block = (bits.len() as u128) & field.mask();
    field.mul(acc ^ len_block, key)
}

/// Tag length of the error-verification hash.
pub const VERIFY_TAG_BITS: u32 = 34;

/// Fresh, public key of one error-verification round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyKey {
    pub k1: u64,
    pub a: u64,
}

/// `low_t(a * P(k1))` in an arbitrary field.
pub fn verify_hash_in(field: &Field, tag_bits: u32, bits: &[u8], k1: u128, a: u128) -> u128 {
    let mask = if tag_bits >= 128 {
        u128::MAX
    } else {
        (1u128 << tag_bits) - 1
    };
    field.mul(a, poly_hash(field, bits, k1)) & mask
}

/// 34-bit verification tag over `GF(2^64)`.
pub fn verify_hash(bits: &[u8], key: &VerifyKey) -> u64 {
    verify_hash_in(&Field::GF2_64, VERIFY_TAG_BITS, bits, key.k1 as u128, key.a as u128) as u64
}

/// Collision bound `2^-34 + L / 2^64` for a message of `len` bits.
pub fn verify_collision_bound(len: usize) -> f64 {
    let f = Field::GF2_64;
    2f64.powi(-(VERIFY_TAG_BITS as i32)) + block_count(&f, len) as f64 / f.order()
}
