use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qkd::ldpc::{
    decode, effective_rate, measure_efficiency, peg_construct, read_alist, shipped_distribution, simulate_frames,
    write_alist, Codebook, CodebookConfig, Decoder, DegreeDistribution, LdpcCode, ParityCheckMatrix, RateAdaptConfig,
    DEFAULT_MAX_ITERS,
};
use qkd::security::binary_entropy;

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random::<u8>() & 1).collect()
}

fn bsc(rng: &mut ChaCha8Rng, bits: &[u8], q: f64) -> Vec<u8> {
    bits.iter().map(|&b| b ^ u8::from(rng.random::<f64>() < q)).collect()
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn code_3_6() -> &'static LdpcCode {
    static C: OnceLock<LdpcCode> = OnceLock::new();
    C.get_or_init(|| peg_construct(504, &DegreeDistribution::regular(3, 6).unwrap(), 11).unwrap())
}

fn code_070() -> &'static LdpcCode {
    static C: OnceLock<LdpcCode> = OnceLock::new();
    C.get_or_init(|| peg_construct(10_000, &shipped_distribution(0.70).unwrap(), 3).unwrap())
}

/// Small codebook that every selection test shares.
fn codebook() -> &'static Codebook {
    static C: OnceLock<Codebook> = OnceLock::new();
    C.get_or_init(|| {
        let mut cfg = CodebookConfig::new(4_000, 5);
        cfg.f_model = 1.17;
        Codebook::new(cfg).unwrap()
    })
}

/// Shortest cycle through the Tanner graph by breadth-first search from
/// every variable node, independent of the library's girth routine.
fn bfs_girth(h: &ParityCheckMatrix) -> Option<usize> {
    let (n, m) = (h.num_cols(), h.num_rows());
    let mut best: Option<usize> = None;
    for start in 0..n {
        // Nodes 0..n are variables, n..n+m checks.
        let mut dist = vec![usize::MAX; n + m];
        let mut parent = vec![usize::MAX; n + m];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let nbrs: Vec<usize> = if u < n {
                h.col(u).iter().map(|&r| n + r as usize).collect()
            } else {
                h.row(u - n).iter().map(|&c| c as usize).collect()
            };
            for v in nbrs {
                if v == parent[u] {
                    continue;
                }
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else {
                    let len = dist[u] + dist[v] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

#[test]
fn regular_code_has_girth_at_least_six() {
    let c = code_3_6();
    let h = c.matrix();
    assert_eq!((h.num_rows(), h.num_cols()), (252, 504));
    assert!((0..504).all(|j| h.col_weight(j) == 3));
    assert_eq!(h.num_edges(), 1512);
    let g = bfs_girth(h).unwrap();
    assert!(g >= 6, "girth {g}");
    assert_eq!(c.girth(), Some(g));
    assert!(h.is_connected());
    assert!((c.rate() - 0.5).abs() < 1e-12);
}

#[test]
fn degree_two_code_has_weight_two_columns() {
    let c = peg_construct(100, &DegreeDistribution::regular(2, 4).unwrap(), 1).unwrap();
    assert!((0..100).all(|j| c.matrix().col_weight(j) == 2));
    assert_eq!(c.syndrome_len(), 50);
}

#[test]
fn construction_is_deterministic_under_seed() {
    let d = shipped_distribution(0.75).unwrap();
    let a = peg_construct(1_000, &d, 9).unwrap();
    let b = peg_construct(1_000, &d, 9).unwrap();
    let c = peg_construct(1_000, &d, 10).unwrap();
    assert_eq!(a.matrix(), b.matrix());
    assert_ne!(a.matrix(), c.matrix());
}

#[test]
fn shipped_codes_realise_their_distributions() {
    for i in 0..codebook().len() {
        let base = codebook().code(i).unwrap();
        let h = base.code.matrix();
        let dist = base.code.distribution().unwrap();
        let mut want = dist.column_counts(h.num_cols());
        want.retain(|&(_, k)| k > 0);
        let mut got = std::collections::BTreeMap::new();
        for j in 0..h.num_cols() {
            *got.entry(h.col_weight(j)).or_insert(0usize) += 1;
        }
        assert_eq!(got.into_iter().collect::<Vec<_>>(), want, "code {i}");
        assert!((0..h.num_cols()).all(|j| h.col_weight(j) >= 2 && h.col_weight(j) <= 15));
        assert_eq!(h.num_rows(), dist.row_count(h.num_cols()));
        assert!(
            (base.code.rate() - base.nominal_rate).abs() < 0.01,
            "code {i}: {}",
            base.code.rate()
        );
        assert!(h.is_connected());
    }
}

#[test]
fn infeasible_distribution_is_rejected() {
    // Degree-15 columns cannot fit into 8 rows.
    let d = DegreeDistribution::new(vec![(15, 1.0)], vec![(200, 1.0)]).unwrap();
    assert!(peg_construct(100, &d, 1).is_err());
}

#[test]
fn hand_fixture_syndrome() {
    let h = ParityCheckMatrix::from_dense(&[
        &[1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0],
        &[0, 1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1],
        &[0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0],
        &[1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 0],
        &[0, 1, 0, 0, 0, 1, 1, 0, 1, 0, 0, 1],
        &[1, 0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 1],
    ]);
    let x = [1, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0];
    assert_eq!(h.syndrome(&x).unwrap(), vec![1, 1, 1, 0, 0, 1]);
    assert_eq!(h.syndrome(&[0; 12]).unwrap(), vec![0; 6]);
    assert!(h.syndrome(&[0; 11]).is_err());
}

#[test]
fn zero_flips_decode_immediately() {
    let c = code_3_6();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_bits(&mut rng, 504);
    let s = c.syndrome(&x).unwrap();
    let ra = RateAdaptConfig::identity(c);
    let out = decode(c, &ra, &x, &s, 0.02, DEFAULT_MAX_ITERS).unwrap();
    assert!(out.converged && out.iterations <= 2, "{}", out.iterations);
    assert_eq!(out.corrected.unwrap(), x);
}

#[test]
fn decoder_rejects_bad_inputs() {
    let c = code_3_6();
    let ra = RateAdaptConfig::identity(c);
    let x = vec![0u8; 504];
    let s = vec![0u8; 252];
    assert!(decode(c, &ra, &x, &s, 0.0, 10).is_err());
    assert!(decode(c, &ra, &x, &s, 0.5, 10).is_err());
    assert!(decode(c, &ra, &x, &s, 0.1, 0).is_err());
    assert!(decode(c, &ra, &x[1..], &s, 0.1, 10).is_err());
    assert!(decode(c, &ra, &x, &s[1..], 0.1, 10).is_err());
}

#[test]
fn rate_070_converges_at_four_percent() {
    let c = code_070();
    let ra = RateAdaptConfig::identity(c);
    let mut dec = Decoder::new(c);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut ok = 0;
    for _ in 0..100 {
        let x = random_bits(&mut rng, c.block_len());
        let y = bsc(&mut rng, &x, 0.04);
        let s = c.syndrome(&x).unwrap();
        let out = dec.decode(&ra, &y, &s, 0.04, DEFAULT_MAX_ITERS).unwrap();
        if let Some(z) = out.corrected {
            assert_eq!(c.syndrome(&z).unwrap(), s);
            ok += usize::from(z == x);
        }
    }
    assert!(ok >= 99, "{ok}/100 frames");
}

#[test]
fn rate_090_fails_at_fifteen_percent() {
    let c = codebook().code(codebook().len() - 1).unwrap();
    assert_eq!(c.nominal_rate, 0.90);
    let ra = RateAdaptConfig::identity(&c.code);
    let mut dec = Decoder::new(&c.code);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut ok = 0;
    for _ in 0..100 {
        let x = random_bits(&mut rng, c.code.block_len());
        let y = bsc(&mut rng, &x, 0.15);
        let s = c.code.syndrome(&x).unwrap();
        ok += usize::from(dec.decode(&ra, &y, &s, 0.15, DEFAULT_MAX_ITERS).unwrap().converged);
    }
    assert!(ok < 5, "{ok}/100 frames");
}

#[test]
fn decoding_is_deterministic() {
    let c = code_3_6();
    let ra = RateAdaptConfig::identity(c);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random_bits(&mut rng, 504);
    let y = bsc(&mut rng, &x, 0.06);
    let s = c.syndrome(&x).unwrap();
    let a = decode(c, &ra, &y, &s, 0.06, 40).unwrap();
    let b = Decoder::new(c).decode(&ra, &y, &s, 0.06, 40).unwrap();
    assert_eq!(a, b);
}

#[test]
fn selection_leaks_about_1_17_entropy_at_trial_qber() {
    let cb = codebook();
    let q = 0.0404;
    let sel = cb.select_rate(q).unwrap();
    let leak = cb.leak_bits(&sel).unwrap() as f64 / cb.frame_len() as f64;
    let model = 1.17 * binary_entropy(q);
    assert!(
        (leak - model).abs() < 2.0 / cb.frame_len() as f64 + 1e-9,
        "{leak} vs {model}"
    );
    assert!((leak - 0.283).abs() < 0.005, "{leak}");
    assert_eq!(cb.nominal_rate(sel.code_index), 0.70);
}

#[test]
fn tiny_qber_selects_the_highest_rate() {
    let cb = codebook();
    for q in [0.0, 1e-6, 1e-3] {
        assert_eq!(cb.select_rate(q).unwrap().code_index, cb.len() - 1, "{q}");
    }
    assert!(cb.select_rate(0.12).is_err());
    assert!(cb.select_rate(-0.01).is_err());
}

#[test]
fn leakage_is_monotone_in_qber() {
    let cb = codebook();
    let mut last = 0;
    for k in 1..=110 {
        let q = k as f64 * 1e-3;
        let leak = match cb.select_rate(q) {
            Ok(sel) => cb.leak_bits(&sel).unwrap(),
            Err(_) => break,
        };
        assert!(leak >= last, "q {q}: {leak} < {last}");
        last = leak;
    }
}

#[test]
fn every_selection_satisfies_the_rate_identity() {
    let cb = codebook();
    let nb = cb.block_len();
    for k in 0..=100 {
        let Ok(sel) = cb.select_rate(k as f64 * 1e-3) else {
            break;
        };
        let base = cb.code(sel.code_index).unwrap();
        let r = base.code.rate();
        let expect = (r * nb as f64 - sel.shortened as f64) / (nb - sel.punctured - sel.shortened) as f64;
        let ra = cb.adaptation(&sel, 3).unwrap();
        assert!((ra.effective_rate() - expect).abs() < 1e-12);
        assert_eq!(ra.frame_len(), cb.frame_len());
        assert!(ra.punctured().iter().all(|c| !ra.shortened().contains(c)));
        // Syndrome plus punctured columns, counted bit by bit.
        let leak = base.code.syndrome_len() - ra.num_punctured();
        assert_eq!(ra.leak_bits(), leak);
        assert_eq!(cb.leak_bits(&sel).unwrap(), leak);
        assert!((1.0 - leak as f64 / cb.frame_len() as f64 - ra.effective_rate()).abs() < 1e-9);
    }
}

#[test]
fn realised_efficiency_stays_between_one_and_one_and_a_half() {
    let cb = codebook();
    // The lowest base rate caps the family near 5.7% QBER.
    assert!(cb.select_rate(0.06).is_err());
    for q in [0.01, 0.02, 0.03, 0.04, 0.05] {
        let runs = simulate_frames(cb, q, 8, 100 + (q * 1e3) as u64).unwrap();
        for r in runs.iter().filter(|r| r.converged) {
            assert!(
                r.leak_bits as f64 >= r.frame_len as f64 * binary_entropy(r.qber),
                "q {q}"
            );
        }
        let rep = measure_efficiency(&runs);
        assert!(rep.converged > 0, "q {q}");
        assert!(rep.f >= 1.0 && rep.f <= 1.5, "q {q}: f {}", rep.f);
        assert_eq!(rep.converged + rep.failed, rep.frames);
    }
}

#[test]
fn adapted_decode_recovers_alice_frame() {
    let cb = codebook();
    let sel = cb.select_rate(0.03).unwrap();
    assert!(sel.punctured > 0 && sel.shortened > 0, "{sel:?}");
    let base = cb.code(sel.code_index).unwrap();
    let ra = cb.adaptation(&sel, 77).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let alice = random_bits(&mut rng, cb.frame_len());
    let fill = random_bits(&mut rng, ra.num_punctured());
    let word = ra.assemble_word(&alice, &fill).unwrap();
    let s = base.code.syndrome(&word).unwrap();
    let bob = bsc(&mut rng, &alice, 0.02);
    let out = decode(&base.code, &ra, &bob, &s, 0.03, DEFAULT_MAX_ITERS).unwrap();
    assert_eq!(out.corrected.unwrap(), alice);
}

#[test]
fn alist_round_trip() {
    let h = code_3_6().matrix();
    let text = write_alist(h);
    assert_eq!(&read_alist(&text).unwrap(), h);
    assert!(read_alist("3 2\n").is_err());
}

#[test]
fn rate_formula_examples() {
    assert_eq!(effective_rate(0.7, 1000, 0, 0), 0.7);
    assert!((effective_rate(0.5, 1000, 100, 0) - 500.0 / 900.0).abs() < 1e-15);
    assert!((effective_rate(0.5, 1000, 0, 100) - 400.0 / 900.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn syndrome_is_linear(seed in any::<u64>()) {
        let c = code_3_6();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_bits(&mut rng, 504);
        let y = random_bits(&mut rng, 504);
        let lhs = c.syndrome(&xor(&x, &y)).unwrap();
        let rhs = xor(&c.syndrome(&x).unwrap(), &c.syndrome(&y).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn converged_output_matches_syndrome(seed in any::<u64>(), q in 0.01f64..0.12) {
        let c = code_3_6();
        let ra = RateAdaptConfig::identity(c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_bits(&mut rng, 504);
        let y = bsc(&mut rng, &x, q);
        let s = c.syndrome(&x).unwrap();
        let out = decode(c, &ra, &y, &s, q, 30).unwrap();
        prop_assert_eq!(out.converged, out.corrected.is_some());
        if let Some(z) = out.corrected {
            prop_assert_eq!(c.syndrome(&z).unwrap(), s);
        }
    }
}
