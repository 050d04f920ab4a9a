//! Reconciles random frames over a binary symmetric channel and reports the
//! efficiency and convergence of the rate-adaptive code family.
//!
//! ```text
//! cargo run --release --example reconcile_frame -- [frame_len] [qber] [frames] [f_model]
//! ```

use std::time::Instant;

use qkd::ldpc::{measure_efficiency, simulate_frames, Codebook, CodebookConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(20_000), |s| s.parse())?;
    let q: f64 = args.get(1).map_or(Ok(0.04), |s| s.parse())?;
    let frames: usize = args.get(2).map_or(Ok(20), |s| s.parse())?;
    let mut cfg = CodebookConfig::new(n, 1);
    if let Some(f) = args.get(3) {
        cfg.f_model = f.parse()?;
    }
    let codebook = Codebook::new(cfg)?;

    let start = Instant::now();
    let sel = codebook.select_rate(q)?;
    let base = codebook.code(sel.code_index)?;
    println!(
        "base code {:.2}: {} x {}, built in {:.1?}; p = {}, s = {}, effective rate {:.4}",
        base.nominal_rate,
        base.code.syndrome_len(),
        base.code.block_len(),
        start.elapsed(),
        sel.punctured,
        sel.shortened,
        sel.effective_rate
    );

    let start = Instant::now();
    let runs = simulate_frames(&codebook, q, frames, 7)?;
    let report = measure_efficiency(&runs);
    println!(
        "{} frames in {:.1?}: f = {:.4}, converged {}/{}, mean iterations {:.1}",
        report.frames,
        start.elapsed(),
        report.f,
        report.converged,
        report.frames,
        report.mean_iterations
    );
    Ok(())
}
