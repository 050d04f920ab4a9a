use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qkd::protocol::{
    estimate_qber, qber_upper_bound, resolve_clicks, sample_count, sample_positions, sift, split_frame, FrameBuffer,
    SiftedFrame,
};
use qkd::sim::{Basis, ClickRecord, PulseRecord};

fn pulse(i: u64, basis: Basis, bit: u8) -> PulseRecord {
    PulseRecord {
        pulse_index: i,
        basis,
        bit,
        photon_count: 1,
        timestamp_s: i as f64 * 1e-8,
    }
}

fn click(i: u64, basis: Basis, bit: u8) -> ClickRecord {
    ClickRecord {
        pulse_index: i,
        detector_id: basis.index() * 2 + bit,
        timestamp_s: i as f64 * 1e-8,
        is_dark: false,
        during_scan: false,
    }
}

#[test]
fn hand_built_fixture_keeps_three_matches() {
    use Basis::{X, Z};
    let alice = [
        pulse(0, Z, 0),
        pulse(1, X, 1),
        pulse(2, Z, 1),
        pulse(3, X, 0),
        pulse(4, Z, 0),
        pulse(5, X, 1),
        pulse(6, Z, 1),
        pulse(7, X, 0),
    ];
    // Slot 4 fires both Z detectors; slots 0, 2 and 7 click in the wrong
    // basis, 3 and 5 stay dark.
    let bob = [
        click(0, X, 1),
        click(1, X, 1),
        click(2, X, 0),
        click(4, Z, 0),
        click(4, Z, 1),
        click(6, Z, 0),
        click(7, Z, 0),
    ];
    let mut seen = [false; 2];
    for seed in 0..64 {
        let pairs = sift(&alice, &bob, seed).unwrap();
        let idx: Vec<u64> = pairs.iter().map(|p| p.pulse_index).collect();
        assert_eq!(idx, vec![1, 4, 6]);
        assert_eq!((pairs[0].alice_bit, pairs[0].bob_bit), (1, 1));
        assert_eq!((pairs[2].alice_bit, pairs[2].bob_bit), (1, 0));
        assert_eq!(pairs[1].basis, Z);
        seen[pairs[1].bob_bit as usize] = true;
        assert_eq!(pairs, sift(&alice, &bob, seed).unwrap());
    }
    assert_eq!(seen, [true, true], "double click bit should be random");
}

#[test]
fn equal_bases_keep_every_click() {
    let alice: Vec<_> = (0..100).map(|i| pulse(i, Basis::X, (i % 2) as u8)).collect();
    let bob: Vec<_> = (0..100).map(|i| click(i, Basis::X, (i % 3 == 0) as u8)).collect();
    assert_eq!(sift(&alice, &bob, 1).unwrap().len(), 100);
}

#[test]
fn independent_bases_retain_half() {
    let n = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis = |r: &mut ChaCha8Rng| if r.random::<bool>() { Basis::X } else { Basis::Z };
    let alice: Vec<_> = (0..n)
        .map(|i| pulse(i, basis(&mut rng), rng.random::<u8>() & 1))
        .collect();
    let bob: Vec<_> = (0..n)
        .map(|i| click(i, basis(&mut rng), rng.random::<u8>() & 1))
        .collect();
    let kept = sift(&alice, &bob, 1).unwrap().len() as f64 / n as f64;
    let sigma = (0.25 / n as f64).sqrt();
    assert!((kept - 0.5).abs() < 5.0 * sigma, "{kept}");
}

#[test]
fn missing_pulse_is_a_sync_error() {
    let alice = [pulse(0, Basis::Z, 0)];
    assert!(sift(&alice, &[click(1, Basis::Z, 0)], 0).is_err());
}

#[test]
fn sifting_never_pairs_mismatched_bases() {
    // Every Alice state and every subset of detectors for three pulses.
    let states = [(Basis::Z, 0), (Basis::Z, 1), (Basis::X, 0), (Basis::X, 1)];
    let mut cases = 0;
    for a in 0..64usize {
        let alice: Vec<_> = (0..3)
            .map(|i| {
                let (b, bit) = states[(a >> (2 * i)) & 3];
                pulse(i as u64, b, bit)
            })
            .collect();
        for det in 0..4096usize {
            let mut bob = Vec::new();
            for i in 0..3 {
                let mask = (det >> (4 * i)) & 15;
                for d in 0..4u8 {
                    if mask >> d & 1 == 1 {
                        bob.push(click(i as u64, Basis::from_index(d / 2), d % 2));
                    }
                }
            }
            for p in sift(&alice, &bob, (a * 4096 + det) as u64).unwrap() {
                let ap = alice[p.pulse_index as usize];
                assert_eq!(p.basis, ap.basis);
                assert_eq!(p.alice_bit, ap.bit);
                let fired: Vec<u8> = bob
                    .iter()
                    .filter(|c| c.pulse_index == p.pulse_index && c.basis() == p.basis)
                    .map(|c| c.bit())
                    .collect();
                assert!(fired.contains(&p.bob_bit));
            }
            cases += 1;
        }
    }
    assert_eq!(cases, 64 * 4096);
}

#[test]
fn resolution_is_one_detection_per_slot_in_order() {
    let bob = [
        click(9, Basis::X, 0),
        click(2, Basis::Z, 1),
        click(9, Basis::Z, 1),
        click(5, Basis::X, 1),
    ];
    let d = resolve_clicks(&bob, 7);
    assert_eq!(d.iter().map(|d| d.pulse_index).collect::<Vec<_>>(), vec![2, 5, 9]);
}

#[test]
fn estimate_examples() {
    assert_eq!(estimate_qber(&[1, 0, 1, 1], &[1, 0, 1, 1]).unwrap(), 0.0);
    assert_eq!(estimate_qber(&[1, 0, 1, 1], &[0, 1, 0, 0]).unwrap(), 1.0);
    let a = vec![0u8; 20_000];
    let mut b = a.clone();
    for i in 0..808 {
        b[i * 24] = 1;
    }
    assert!((estimate_qber(&a, &b).unwrap() - 0.0404).abs() < 1e-15);
    assert!(estimate_qber(&[], &[]).is_err());
    assert!(estimate_qber(&[0, 1], &[0]).is_err());
}

#[test]
fn upper_bound_examples() {
    let q = qber_upper_bound(0.0404, 20_000, 4e-12).unwrap();
    assert!((q - 0.070_461_713_3).abs() < 1e-9, "{q}");
    let q = qber_upper_bound(0.03, 1_000_000_000_000, 4e-12).unwrap();
    assert!((q - 0.03).abs() < 1e-4, "{q}");
    assert_eq!(qber_upper_bound(0.49, 50, 4e-12).unwrap(), 0.5);
    assert!(qber_upper_bound(0.1, 0, 4e-12).is_err());
    assert!(qber_upper_bound(0.1, 10, 0.0).is_err());
    assert!(qber_upper_bound(0.1, 10, 1.0).is_err());
}

#[test]
fn sample_is_floor_of_a_tenth() {
    assert_eq!(sample_count(200_000), 20_000);
    assert_eq!(sample_count(10_009), 1_000);
}

#[test]
fn frames_flagged_in_a_scan_are_marked() {
    let mut buf = FrameBuffer::new(20);
    for i in 0..22 {
        buf.push(1, i == 7);
    }
    for _ in 0..22 {
        buf.push(0, false);
    }
    let a = buf.pop().unwrap();
    let b = buf.pop().unwrap();
    assert!(a.discard && !b.discard);
    assert_eq!((a.frame_id, b.frame_id), (0, 1));
    assert!(buf.pop().is_none());
    let f = SiftedFrame::assemble(&b, 2, 3, &[0, 0], 4e-12).unwrap();
    assert_eq!(f.key_bits.len(), 20);
    assert_eq!(f.q_hat, 0.0);
    assert!(f.q_hat <= f.q_tilde && f.q_tilde <= 0.5);
}

proptest! {
    #[test]
    fn bound_is_monotone(q1 in 0.0f64..0.5, q2 in 0.0f64..0.5, m1 in 1usize..100_000, m2 in 1usize..100_000,
                         e1 in -20.0f64..-1.0, e2 in -20.0f64..-1.0) {
        let (qa, qb) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let (ma, mb) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        let (ea, eb) = if e1 <= e2 { (10f64.powf(e1), 10f64.powf(e2)) } else { (10f64.powf(e2), 10f64.powf(e1)) };
        let (m, e) = (ma, ea);
        prop_assert!(qber_upper_bound(qa, m, e).unwrap() <= qber_upper_bound(qb, m, e).unwrap());
        prop_assert!(qber_upper_bound(qa, mb, e).unwrap() <= qber_upper_bound(qa, ma, e).unwrap());
        prop_assert!(qber_upper_bound(qa, m, eb).unwrap() <= qber_upper_bound(qa, m, ea).unwrap());
        let t = qber_upper_bound(qa, m, e).unwrap();
        prop_assert!(qa <= t && t <= 0.5);
    }

    #[test]
    fn sample_and_key_partition_the_frame(total in 10usize..5_000, seed in any::<u64>()) {
        let m = total / 10;
        let pos = sample_positions(total, m, seed).unwrap();
        prop_assert_eq!(pos.len(), m);
        prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let bits: Vec<u8> = (0..total).map(|i| (i * 7 % 5 < 2) as u8).collect();
        let (key, sample) = split_frame(&bits, &pos).unwrap();
        prop_assert_eq!(key.len(), total - m);
        prop_assert_eq!(sample, pos.iter().map(|&p| bits[p]).collect::<Vec<_>>());
        let rest: Vec<u8> = (0..total).filter(|i| pos.binary_search(i).is_err()).map(|i| bits[i]).collect();
        prop_assert_eq!(key, rest);
        prop_assert_eq!(pos.clone(), sample_positions(total, m, seed).unwrap());
    }
}
