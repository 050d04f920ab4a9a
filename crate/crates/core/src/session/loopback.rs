use std::thread;

use super::{
    memory_duplex, run_alice, run_bob, ClickSource, Intercept, Interceptor, PulseSource, SessionConfig, SessionReport,
};
use crate::ldpc::Codebook;

/// Hook that leaves every message untouched.
pub fn forward_all(_: &mut Vec<u8>) -> Intercept {
    Intercept::Forward
}

/// Runs Alice and Bob on two threads over an in-memory pipe.
pub fn run_loopback(
    cfg: &SessionConfig,
    codebook: &Codebook,
    alice: &mut (dyn PulseSource + Send),
    bob: &mut (dyn ClickSource + Send),
    seeds: (u64, u64),
) -> (SessionReport, SessionReport) {
    run_loopback_with(cfg, codebook, alice, bob, seeds, forward_all, forward_all)
}

/// [`run_loopback`] with a man in the middle on each direction.
pub fn run_loopback_with<FA, FB>(
    cfg: &SessionConfig,
    codebook: &Codebook,
    alice: &mut (dyn PulseSource + Send),
    bob: &mut (dyn ClickSource + Send),
    seeds: (u64, u64),
    alice_to_bob: FA,
    bob_to_alice: FB,
) -> (SessionReport, SessionReport)
where
    FA: FnMut(&mut Vec<u8>) -> Intercept + Send,
    FB: FnMut(&mut Vec<u8>) -> Intercept + Send,
{
    let (a_end, b_end) = memory_duplex(cfg.read_timeout);
    let a_end = Interceptor::new(a_end, alice_to_bob);
    let b_end = Interceptor::new(b_end, bob_to_alice);
    thread::scope(|s| {
        let a = s.spawn(move || run_alice(a_end, cfg, codebook, alice, seeds.0, ""));
        let b = run_bob(b_end, cfg, codebook, bob, seeds.1, "");
        (a.join().expect("alice thread"), b)
    })
}
