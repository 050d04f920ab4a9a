//! Runs the link simulator at the default parameters and compares the click
//! rate with the analytic efficiency chain.
//!
//! ```text
//! cargo run --release --example simulate_link -- [seconds] [channel_loss_db]
//! ```

use qkd::sim::{DriftModel, LinkSimulator, SystemParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seconds: f64 = args.first().map_or(Ok(1.0), |s| s.parse())?;
    let mut params = SystemParams::default();
    if let Some(l) = args.get(1) {
        params.channel_loss_db = l.parse()?;
    }

    let mut sim = LinkSimulator::new(params.clone(), DriftModel::disabled(1), 1)?;
    let clicks = sim.run_for(seconds);
    let stats = sim.stats();
    let chain = params.source_rate_hz * params.eta_pulse() * params.photon_transmission();

    println!(
        "eta_S = {:.6}, eta_QC = {:.4}",
        params.eta_source_cband(),
        params.eta_channel()
    );
    println!("pulses            {}", stats.pulses);
    println!("clicks            {} ({} dark)", clicks.len(), stats.accepted_dark);
    println!("dropped by gate   {}", stats.dropped_window);
    println!("dropped dead time {}", stats.dropped_dead_time);
    println!("two-photon clicks {}", sim.two_photon_clicks());
    println!("click rate        {:.1} /s", stats.click_rate(&params));
    println!("chain product     {chain:.1} /s");
    Ok(())
}
