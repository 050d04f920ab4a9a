//! Alice and Bob as separate stations over a localhost TCP connection,
//! driven by an experiment config.
//!
//! ```text
//! cargo run --release --example tcp_session -- [config]
//! ```

use std::path::Path;
use std::thread;

use qkd::experiment::{cmd_alice, cmd_bob, Endpoint, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = match std::env::args().nth(1) {
        Some(p) => ExperimentConfig::load(Path::new(&p))?,
        None => {
            let mut c = ExperimentConfig::default();
            c.frame_len = 4_000;
            c.frames = 3;
            c.params.misalignment_qber = 0.0;
            c
        }
    };
    cfg.out_dir = std::env::temp_dir().join("qkd_tcp_session");
    let addr = "127.0.0.1:47211".to_string();

    let alice_cfg = cfg.clone();
    let listen = Endpoint::Listen(addr.clone());
    let alice = thread::spawn(move || cmd_alice(&alice_cfg, &listen));
    let bob = cmd_bob(&cfg, &Endpoint::Connect(addr))?;
    let alice = alice.join().expect("alice thread")?;

    println!("{}", bob.summary());
    println!("alice digest {}", alice.key_digest());
    println!("bob digest   {}", bob.key_digest());
    println!("outputs in {}", cfg.out_dir.display());
    Ok(())
}
