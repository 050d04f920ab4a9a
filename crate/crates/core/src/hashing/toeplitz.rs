//! Toeplitz hashing for privacy amplification.
//!
//! The `l x n` matrix is `T[i][j] = seed[l - 1 - i + j]`, so a seed of
//! `n + l - 1` bits fixes it. The output is `y = T x` over GF(2).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HashError;
use crate::bits::pack_words;

/// Public seed of one privacy-amplification hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzSeed {
    pub input_len: usize,
    pub output_len: usize,
    /// `input_len + output_len - 1` bits (none if either length is zero).
    pub bits: Vec<u8>,
    pub frame_id: u64,
}

impl ToeplitzSeed {
    pub fn from_bits(input_len: usize, output_len: usize, bits: Vec<u8>, frame_id: u64) -> Result<Self, HashError> {
        let need = seed_len(input_len, output_len);
        if bits.len() != need {
            return Err(HashError::Length(format!(
                "toeplitz seed needs {need} bits, got {}",
                bits.len()
            )));
        }
        Ok(Self {
            input_len,
            output_len,
            bits,
            frame_id,
        })
    }

    /// Uniform seed drawn from a ChaCha stream keyed by `rng_seed`.
    pub fn generate(input_len: usize, output_len: usize, rng_seed: u64, frame_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let bits = (0..seed_len(input_len, output_len))
            .map(|_| rng.random::<u8>() & 1)
            .collect();
        Self {
            input_len,
            output_len,
            bits,
            frame_id,
        }
    }
}

fn seed_len(n: usize, l: usize) -> usize {
    if n == 0 || l == 0 {
        0
    } else {
        n + l - 1
    }
}

fn check(seed: &ToeplitzSeed, input: &[u8]) -> Result<(), HashError> {
    if input.len() != seed.input_len {
        return Err(HashError::Length(format!(
            "toeplitz input has {} bits, seed expects {}",
            input.len(),
            seed.input_len
        )));
    }
    Ok(())
}

/// `T x` on packed words.
pub fn toeplitz_hash(seed: &ToeplitzSeed, input: &[u8]) -> Result<Vec<u8>, HashError> {
    check(seed, input)?;
    let (n, l) = (seed.input_len, seed.output_len);
    if n == 0 {
        return Ok(vec![0; l]);
    }
    let x = pack_words(input);
    let mut s = pack_words(&seed.bits);
    s.push(0);
    let words = x.len();
    let tail = match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    };
    let out = (0..l)
        .map(|i| {
            // Row i reads seed[o .. o + n].
            let o = l - 1 - i;
            let (w0, sh) = (o / 64, o % 64);
            let mut acc = 0u64;
            for w in 0..words {
                let lo = s[w0 + w] >> sh;
                let hi = if sh == 0 { 0 } else { s[w0 + w + 1] << (64 - sh) };
                let mut win = lo | hi;
                if w + 1 == words {
                    win &= tail;
                }
                acc ^= win & x[w];
            }
            (acc.count_ones() & 1) as u8
        })
        .collect();
    Ok(out)
}

/// Dense reference: `y_i = sum_j T[i][j] x_j`.
pub fn toeplitz_hash_naive(seed: &ToeplitzSeed, input: &[u8]) -> Result<Vec<u8>, HashError> {
    check(seed, input)?;
    let (n, l) = (seed.input_len, seed.output_len);
    Ok((0..l)
        .map(|i| (0..n).fold(0u8, |acc, j| acc ^ (seed.bits[l - 1 - i + j] & input[j] & 1)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_awkward_lengths() {
        for (n, l) in [(1, 1), (63, 5), (64, 64), (65, 130), (200, 1), (129, 77)] {
            let seed = ToeplitzSeed::generate(n, l, (n * 31 + l) as u64, 0);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let x: Vec<u8> = (0..n).map(|_| rng.random::<u8>() & 1).collect();
            assert_eq!(
                toeplitz_hash(&seed, &x).unwrap(),
                toeplitz_hash_naive(&seed, &x).unwrap(),
                "{n} {l}"
            );
        }
    }

    #[test]
    fn matrix_convention() {
        // n = 3, l = 2: rows are seed[1..4] and seed[0..3].
        let seed = ToeplitzSeed::from_bits(3, 2, vec![1, 0, 0, 1], 7).unwrap();
        assert_eq!(toeplitz_hash(&seed, &[0, 0, 1]).unwrap(), vec![1, 0]);
        assert_eq!(toeplitz_hash(&seed, &[1, 0, 0]).unwrap(), vec![0, 1]);
        assert!(toeplitz_hash(&seed, &[1, 0]).is_err());
    }
}
