//! Bit-vector helpers shared by the post-processing stages.
//!
//! Keys, syndromes and samples are carried as `Vec<u8>` holding one bit per
//! byte (values 0 or 1). The helpers here convert to and from the packed
//! representations used on the wire (MSB-first bytes) and inside the hashing
//! kernels (little-endian `u64` words, bit `i` at `words[i / 64] >> (i % 64)`).

/// Packs bits MSB-first into bytes. Trailing bits of the last byte are zero.
pub fn pack_bytes(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

/// Inverse of [`pack_bytes`]; `len` bits are read from `bytes`.
///
/// Returns `None` when `bytes` is too short to hold `len` bits.
pub fn unpack_bytes(bytes: &[u8], len: usize) -> Option<Vec<u8>> {
    if bytes.len() < len.div_ceil(8) {
        return None;
    }
    Some((0..len).map(|i| (bytes[i / 8] >> (7 - (i % 8))) & 1).collect())
}

/// Packs bits into little-endian words.
pub fn pack_words(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 64] |= u64::from(b & 1) << (i % 64);
    }
    out
}

/// Inverse of [`pack_words`].
pub fn unpack_words(words: &[u64], len: usize) -> Vec<u8> {
    (0..len).map(|i| ((words[i / 64] >> (i % 64)) & 1) as u8).collect()
}

/// Hamming distance between two equal-length bit slices.
///
/// # Panics
///
/// Panics if the lengths differ.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    assert_eq!(a.len(), b.len(), "hamming distance of unequal lengths");
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Element-wise XOR of two equal-length bit slices.
pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len(), "xor of unequal lengths");
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Renders bits as a hex string of the MSB-first packing.
pub fn to_hex(bits: &[u8]) -> String {
    pack_bytes(bits).iter().map(|b| format!("{b:02x}")).collect()
}
