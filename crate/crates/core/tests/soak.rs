use std::path::Path;

use qkd::experiment::ExperimentConfig;
use qkd::session::{run_loopback, FrameStatus};
use qkd::sim::LinkSimulator;

/// Ten minutes of link time at the field-trial operating point, drift and
/// compensation included.
#[test]
#[ignore = "runs several minutes; cargo test --release --test soak -- --ignored"]
fn ten_minutes_without_abort() {
    let cfg =
        ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/field_trial.conf")).unwrap();
    let p = &cfg.params;
    let sifted_hz = p.source_rate_hz * p.eta_pulse() * p.photon_transmission() * 0.5;
    let mut session = cfg.session_config().unwrap();
    session.frames = (600.0 * sifted_hz / (session.frame_len + session.sample_len()) as f64).ceil() as usize + 1;
    let codebook = cfg.codebook().unwrap();
    let mut bob = LinkSimulator::new(p.clone(), cfg.drift_model().unwrap(), cfg.seed).unwrap();
    let mut alice = bob.alice();
    let (a, b) = run_loopback(
        &session,
        &codebook,
        &mut alice,
        &mut bob,
        (cfg.alice_seed(), cfg.bob_seed()),
    );
    println!("{}", b.summary());
    assert!(a.succeeded() && b.succeeded());
    assert!(b.elapsed_s >= 600.0, "{} s", b.elapsed_s);
    assert_eq!(b.frames.len(), session.frames);
    assert_eq!(b.frames_with_status(FrameStatus::VerifyFailed), 0);
    assert!(b.frames_with_status(FrameStatus::Ok) * 10 >= b.frames.len() * 9);
    assert_eq!(a.keys, b.keys);
    assert_eq!(a.auth_consumed, b.nu_auth_total());
}
