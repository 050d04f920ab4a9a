//! Optimises a variable-degree distribution for one code rate and prints it
//! in the distribution file format.
//!
//! ```text
//! cargo run --release --example design_degree_distribution -- 0.70 [generations] [seed]
//! ```

use qkd::ldpc::design::{ga_threshold, optimize, DesignConfig};
use qkd::ldpc::DegreeDistribution;
use qkd::security::binary_entropy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let rate: f64 = args.next().as_deref().unwrap_or("0.70").parse()?;
    let mut cfg = DesignConfig::new(rate);
    if let Some(g) = args.next() {
        cfg.generations = g.parse()?;
    }
    if let Some(s) = args.next() {
        cfg.seed = s.parse()?;
    }

    let regular = DegreeDistribution::regular(3, (3.0 / (1.0 - rate)).round() as usize)?;
    println!(
        "# (3, {}) regular: threshold {:.4}",
        regular.check()[0].0,
        ga_threshold(&regular)
    );

    let (dist, threshold) = optimize(&cfg)?;
    // Efficiency at threshold: (1 - R) / H(p*).
    println!(
        "# rate {:.4}, threshold {:.5}, efficiency at threshold {:.4}",
        dist.design_rate(),
        threshold,
        (1.0 - dist.design_rate()) / binary_entropy(threshold)
    );
    print!("{}", dist.to_text());
    Ok(())
}
