//! Compresses a reconciled key with a random Toeplitz matrix and checks the
//! fast product against the textbook one.
//!
//! ```text
//! cargo run --release --example privacy_amplification -- [input_len] [output_len]
//! ```

use std::time::Instant;

use qkd::bits::to_hex;
use qkd::hashing::{toeplitz_hash, toeplitz_hash_naive, ToeplitzSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(200_000), |s| s.parse())?;
    let l: usize = args.get(1).map_or(Ok(46_000), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let key: Vec<u8> = (0..n).map(|_| rng.random::<u8>() & 1).collect();
    let seed = ToeplitzSeed::generate(n, l, 8, 0);

    let t = Instant::now();
    let out = toeplitz_hash(&seed, &key)?;
    println!("{n} -> {l} bits in {:.2?}", t.elapsed());
    println!("first 64 output bits {}", to_hex(&out[..64.min(l)]));

    let small_n = n.min(4_000);
    let small_l = l.min(1_000);
    let small_seed = ToeplitzSeed::generate(small_n, small_l, 9, 0);
    let fast = toeplitz_hash(&small_seed, &key[..small_n])?;
    let naive = toeplitz_hash_naive(&small_seed, &key[..small_n])?;
    println!("fast and naive agree at {small_n} -> {small_l}: {}", fast == naive);
    Ok(())
}
