//! Sifts one second of simulated clicks, cuts a frame and estimates its
//! QBER from a random sample.
//!
//! ```text
//! cargo run --release --example sift_and_estimate -- [frame_len]
//! ```

use qkd::protocol::{estimate_qber, qber_upper_bound, sample_count, sample_positions, sift_with_source, split_frame};
use qkd::security::SecurityBudget;
use qkd::sim::{DriftModel, LinkSimulator, SystemParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(10_000), |s| s.parse())?;
    let m = sample_count(n);
    let params = SystemParams::default();
    let mut sim = LinkSimulator::new(params, DriftModel::disabled(3), 3)?;
    let mut alice = sim.alice();

    let mut pairs = Vec::new();
    while pairs.len() < n + m {
        let clicks = sim.run_for(0.25);
        pairs.extend(sift_with_source(&mut alice, &clicks, 3)?);
    }
    pairs.truncate(n + m);
    let a: Vec<u8> = pairs.iter().map(|p| p.alice_bit).collect();
    let b: Vec<u8> = pairs.iter().map(|p| p.bob_bit).collect();
    println!("sifted {} bits in {:.2} s of link time", pairs.len(), sim.elapsed_s());

    let pos = sample_positions(n + m, m, 17)?;
    let (a_sample, a_key) = split_frame(&a, &pos)?;
    let (b_sample, b_key) = split_frame(&b, &pos)?;
    let q_hat = estimate_qber(&a_sample, &b_sample)?;
    let q_key = estimate_qber(&a_key, &b_key)?;
    let q_tilde = qber_upper_bound(q_hat, m, SecurityBudget::EPS_PE)?;
    println!("sample m = {m}: q_hat = {q_hat:.5}, q_tilde = {q_tilde:.5}");
    println!("true QBER of the {n} key bits: {q_key:.5}");
    Ok(())
}
