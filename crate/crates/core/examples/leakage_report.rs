//! Runs a short loopback session, writes its frame log and renders the
//! leakage breakdown from it.
//!
//! ```text
//! cargo run --release --example leakage_report -- [frame_len] [frames]
//! ```

use qkd::experiment::cmd_report;
use qkd::ldpc::{Codebook, CodebookConfig};
use qkd::session::{bootstrap_key_from_seed, run_loopback, SessionConfig};
use qkd::sim::{AliceSource, DriftModel, LinkSimulator, SystemParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(100_000), |s| s.parse())?;
    let frames: usize = args.get(1).map_or(Ok(3), |s| s.parse())?;
    let params = SystemParams {
        misalignment_qber: 0.04,
        ..SystemParams::default()
    };
    let codebook = Codebook::new(CodebookConfig::new(n, 7))?;
    let cfg = SessionConfig::new(n, frames, &params, bootstrap_key_from_seed(3))?;
    let mut alice = AliceSource::new(8, params.basis_ratio);
    let mut bob = LinkSimulator::new(params, DriftModel::disabled(8), 8)?;
    let (_, report) = run_loopback(&cfg, &codebook, &mut alice, &mut bob, (1, 2));

    let path = std::env::temp_dir().join("qkd_leakage_frames.csv");
    report.write_frame_log(std::fs::File::create(&path)?)?;
    print!("{}", cmd_report(&path)?.to_text());
    Ok(())
}
