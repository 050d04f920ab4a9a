//! Alice and Bob on two threads over an in-memory pipe, fed by the link
//! simulator.
//!
//! ```text
//! cargo run --release --example loopback_session -- [frame_len] [frames] [misalignment_qber]
//! ```

use std::time::Instant;

use qkd::ldpc::{Codebook, CodebookConfig};
use qkd::session::{bootstrap_key_from_seed, run_loopback, SessionConfig};
use qkd::sim::{DriftModel, LinkSimulator, SystemParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(20_000), |s| s.parse())?;
    let frames: usize = args.get(1).map_or(Ok(5), |s| s.parse())?;
    let params = SystemParams {
        misalignment_qber: args.get(2).map_or(Ok(0.04), |s| s.parse())?,
        ..SystemParams::default()
    };

    let codebook = Codebook::new(CodebookConfig::new(n, 7))?;
    let cfg = SessionConfig::new(n, frames, &params, bootstrap_key_from_seed(99))?;
    let mut alice = qkd::sim::AliceSource::new(1, params.basis_ratio);
    let mut bob = LinkSimulator::new(params, DriftModel::disabled(1), 1)?;

    let t = Instant::now();
    let (a, b) = run_loopback(&cfg, &codebook, &mut alice, &mut bob, (11, 22));
    println!("{}", b.summary());
    println!("alice digest {}", a.key_digest());
    println!("keys identical: {}", a.keys == b.keys);
    for f in &b.frames {
        println!(
            "frame {:>3} {:<13} q_hat {:.4} q_tilde {:.4} leak {:>6} l_key {:>6} f {:.3}",
            f.frame_id,
            f.status.as_str(),
            f.q_hat.unwrap_or(f64::NAN),
            f.q_tilde.unwrap_or(f64::NAN),
            f.leak_ec,
            f.l_key,
            f.efficiency().unwrap_or(f64::NAN)
        );
    }
    println!("wall time {:.1}s", t.elapsed().as_secs_f64());
    Ok(())
}
