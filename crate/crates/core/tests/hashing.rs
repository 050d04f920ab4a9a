use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qkd::hashing::{
    auth_check, auth_forgery_bound, auth_tag, auth_tag_in, block_count, poly_hash, toeplitz_hash, toeplitz_hash_naive,
    verify_collision_bound, verify_hash, verify_hash_in, AuthKey, Field, HashError, KeyLedger, ToeplitzSeed, VerifyKey,
    AUTH_TAG_BITS, BOOTSTRAP_KEY_BITS, SETUP_KEY_BITS,
};

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random::<u8>() & 1).collect()
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn int_bits(v: u32, len: usize) -> Vec<u8> {
    (0..len).rev().map(|i| ((v >> i) & 1) as u8).collect()
}

#[test]
fn toeplitz_hand_example() {
    let seed = ToeplitzSeed::from_bits(6, 3, vec![1, 0, 1, 1, 0, 1, 0, 1], 0).unwrap();
    let x = [1, 1, 0, 1, 0, 1];
    // Rows read seed[2..8], seed[1..7], seed[0..6].
    assert_eq!(toeplitz_hash_naive(&seed, &x).unwrap(), vec![0, 1, 1]);
    assert_eq!(toeplitz_hash(&seed, &x).unwrap(), vec![0, 1, 1]);
}

#[test]
fn toeplitz_zero_input_and_length_errors() {
    let seed = ToeplitzSeed::generate(100, 40, 3, 7);
    assert_eq!(seed.bits.len(), 139);
    assert_eq!(seed.frame_id, 7);
    assert_eq!(toeplitz_hash(&seed, &[0; 100]).unwrap(), vec![0; 40]);
    assert!(toeplitz_hash(&seed, &[0; 99]).is_err());
    assert!(ToeplitzSeed::from_bits(6, 3, vec![0; 7], 0).is_err());
}

#[test]
fn toeplitz_is_linear_over_many_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let seed = ToeplitzSeed::generate(64, 40, 1, 0);
    for _ in 0..10_000 {
        let a = random_bits(&mut rng, 64);
        let b = random_bits(&mut rng, 64);
        let lhs = toeplitz_hash(&seed, &xor(&a, &b)).unwrap();
        let rhs = xor(&toeplitz_hash(&seed, &a).unwrap(), &toeplitz_hash(&seed, &b).unwrap());
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn toeplitz_output_bits_are_unbiased() {
    let (n, l, seeds) = (32, 16, 100_000u64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inputs = [int_bits(1, n), int_bits(0x8000_0000, n), random_bits(&mut rng, n)];
    for x in &inputs {
        let mut ones = vec![0u64; l];
        for s in 0..seeds {
            let y = toeplitz_hash(&ToeplitzSeed::generate(n, l, s, 0), x).unwrap();
            for (c, b) in ones.iter_mut().zip(y) {
                *c += u64::from(b);
            }
        }
        let expect = seeds as f64 / 2.0;
        let chi2: f64 = ones.iter().map(|&c| (c as f64 - expect).powi(2) / expect * 2.0).sum();
        // 99.9% quantile of chi-square with 16 degrees of freedom.
        assert!(chi2 < 39.25, "chi2 {chi2}");
    }
}

#[test]
fn verify_family_meets_its_bound_exhaustively() {
    // Scaled family: GF(2^8), 8-bit tags, all 16-bit messages. For equal
    // lengths the tag difference is a * (P(x) ^ P(y)), and P(x) ^ P(y) only
    // depends on d = x ^ y, so enumerating (d, k1) and the a-counts covers
    // every pair and every key.
    let f = Field::GF2_8;
    let t = 8;
    let len = 16;
    let mask = (1u128 << t) - 1;
    let zeros: Vec<u128> = (0..256).map(|k1| poly_hash(&f, &vec![0; len], k1)).collect();
    let a_hits: Vec<u32> = (0..256u128)
        .map(|diff| (0..256u128).filter(|&a| f.mul(a, diff) & mask == 0).count() as u32)
        .collect();
    let mut worst = 0u32;
    for d in 1..(1u32 << len) {
        let db = int_bits(d, len);
        let hits: u32 = (0..256u128)
            .map(|k1| a_hits[(poly_hash(&f, &db, k1) ^ zeros[k1 as usize]) as usize])
            .sum();
        worst = worst.max(hits);
    }
    let keys = 256.0 * 256.0;
    let bound = 2f64.powi(-t) + block_count(&f, len) as f64 / f.order();
    assert!(worst as f64 / keys <= bound, "{} > {bound}", worst as f64 / keys);

    // The reduction itself, on sampled pairs and keys.
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..100_000 {
        let (x, d) = (rng.random::<u16>() as u32, rng.random_range(1..1u32 << 16));
        let (k1, a) = (rng.random::<u8>() as u128, rng.random::<u8>() as u128);
        let (xb, yb) = (int_bits(x, len), int_bits(x ^ d, len));
        let collide = verify_hash_in(&f, t as u32, &xb, k1, a) == verify_hash_in(&f, t as u32, &yb, k1, a);
        let diff = poly_hash(&f, &int_bits(d, len), k1) ^ zeros[k1 as usize];
        assert_eq!(collide, f.mul(a, diff) & mask == 0);
    }
}

#[test]
fn auth_family_meets_its_bound_exhaustively() {
    // Scaled family: GF(2^10), 10-bit tags, 6-bit messages. For every
    // message difference, the offset between two tags is counted over all
    // 2^20 keys; the one-time pad cancels in the offset.
    let f = Field::GF2_10;
    let t = 10u32;
    let len = 6;
    let q = 1u128 << 10;
    let bound = 2f64.powi(-(t as i32)) + block_count(&f, len) as f64 / f.order();
    let keys = (q * q) as f64;
    let zeros: Vec<u128> = (0..q).map(|k| poly_hash(&f, &[0; 6], k)).collect();
    let mut worst = 0u32;
    for d in 1..(1u32 << len) {
        let db = int_bits(d, len);
        let mut hist = vec![0u32; q as usize];
        for k in 0..q {
            let diff = poly_hash(&f, &db, k) ^ zeros[k as usize];
            for a in 0..q {
                hist[f.mul(a, diff) as usize] += 1;
            }
        }
        worst = worst.max(*hist.iter().max().unwrap());
    }
    assert!(worst as f64 / keys <= bound, "{} > {bound}", worst as f64 / keys);

    // Messages of different lengths, by direct enumeration of tags.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..8 {
        let m1 = int_bits(rng.random_range(0..32), 5);
        let m2 = int_bits(rng.random_range(0..64), 6);
        let mut hist = vec![0u32; q as usize];
        for k in 0..q {
            for a in 0..q {
                let pad = rng.random::<u128>() & (q - 1);
                let off = auth_tag_in(&f, t, &m1, k, a, pad) ^ auth_tag_in(&f, t, &m2, k, a, pad);
                hist[off as usize] += 1;
            }
        }
        let p = *hist.iter().max().unwrap() as f64 / keys;
        assert!(p <= bound, "{p} > {bound}");
    }
}

#[test]
fn verify_tags_are_deterministic_and_catch_single_flips() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let msg = random_bits(&mut rng, 1_024);
    let key = VerifyKey {
        k1: rng.random(),
        a: rng.random(),
    };
    assert_eq!(verify_hash(&msg, &key), verify_hash(&msg.clone(), &key));
    assert!(verify_hash(&msg, &key) < 1 << 34);
    let mut missed = 0;
    for _ in 0..100_000 {
        let key = VerifyKey {
            k1: rng.random(),
            a: rng.random(),
        };
        let mut other = msg.clone();
        other[rng.random_range(0..msg.len())] ^= 1;
        missed += usize::from(verify_hash(&msg, &key) == verify_hash(&other, &key));
    }
    // Expected misses at the 2^-34 bound are about 6e-6.
    assert_eq!(missed, 0);
    assert!(verify_collision_bound(200_000) <= 6e-11);
}

#[test]
fn auth_round_trip_and_tamper_rejection() {
    let mut rng = ChaCha8Rng::seed_from_u64(86);
    let key = AuthKey::from_bits(&random_bits(&mut rng, 256)).unwrap();
    let mut rejected = 0;
    for _ in 0..100_000 {
        let msg: Vec<u8> = (0..rng.random_range(1..64)).map(|_| rng.random()).collect();
        let pad = rng.random::<u128>() & ((1 << AUTH_TAG_BITS) - 1);
        let tag = auth_tag(&msg, &key, pad);
        assert_eq!(tag.consumed_bits, 86);
        assert!(auth_check(&msg, &tag, &key, pad));
        let mut bad = msg.clone();
        let bit = rng.random_range(0..bad.len() * 8);
        bad[bit / 8] ^= 1 << (bit % 8);
        rejected += usize::from(!auth_check(&bad, &tag, &key, pad));
    }
    assert_eq!(rejected, 100_000);
    assert!(auth_forgery_bound(1 << 20) <= 1e-12);
    assert!(AuthKey::from_bits(&[0; 255]).is_err());
}

#[test]
fn ledger_accounting_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bootstrap = random_bits(&mut rng, BOOTSTRAP_KEY_BITS);
    let mut l = KeyLedger::new(&bootstrap);
    assert_eq!(l.take_setup(SETUP_KEY_BITS).unwrap(), bootstrap[..256].to_vec());
    let mut spent = 0;
    for frame in 0..100usize {
        for _ in 0..2 {
            l.take(AUTH_TAG_BITS as usize).unwrap();
            spent += 86;
        }
        l.replenish(&vec![1; 100 + frame % 3 * 40]);
    }
    assert_eq!(l.consumed(), spent);
    assert_eq!(l.consumed(), 100 * 172);
    assert_eq!(
        l.available(),
        BOOTSTRAP_KEY_BITS - SETUP_KEY_BITS + l.replenished() - spent
    );
    let left = l.available();
    assert_eq!(
        l.take(left + 1),
        Err(HashError::Exhausted {
            needed: left + 1,
            available: left
        })
    );
}

proptest! {
    #[test]
    fn fast_toeplitz_equals_naive(n in 1usize..300, l in 1usize..200, seed in any::<u64>()) {
        let s = ToeplitzSeed::generate(n, l, seed, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x = random_bits(&mut rng, n);
        prop_assert_eq!(toeplitz_hash(&s, &x).unwrap(), toeplitz_hash_naive(&s, &x).unwrap());
        prop_assert_eq!(ToeplitzSeed::generate(n, l, seed, 0), s);
    }
}
