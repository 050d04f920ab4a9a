//! Polarisation drift with and without the compensator, as QBER over time.
//!
//! ```text
//! cargo run --release --example drift_compensation -- [seconds]
//! ```

use qkd::protocol::sift_with_source;
use qkd::sim::{CompensatorConfig, DriftConfig, DriftModel, LinkSimulator, SystemParams};

fn run(enabled: bool, seconds: usize) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let drift = DriftConfig {
        step_sigma: 0.05,
        amplitude: 0.4,
        tick_s: 0.1,
    };
    let comp = CompensatorConfig {
        enabled,
        ..CompensatorConfig::default()
    };
    let mut sim = LinkSimulator::new(SystemParams::default(), DriftModel::new(drift, comp, 2)?, 2)?;
    let mut alice = sim.alice();
    let mut out = Vec::new();
    for _ in 0..seconds {
        let clicks = sim.run_for(1.0);
        let pairs = sift_with_source(&mut alice, &clicks, 0)?;
        let errors = pairs.iter().filter(|p| p.alice_bit != p.bob_bit).count();
        out.push(errors as f64 / pairs.len().max(1) as f64);
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seconds: usize = std::env::args().nth(1).map_or(Ok(30), |s| s.parse())?;
    let free = run(false, seconds)?;
    let tracked = run(true, seconds)?;
    println!("second  qber_free  qber_compensated");
    for (i, (a, b)) in free.iter().zip(&tracked).enumerate() {
        println!("{i:>6}  {a:>9.4}  {b:>16.4}");
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("mean    {:>9.4}  {:>16.4}", mean(&free), mean(&tracked));
    Ok(())
}
