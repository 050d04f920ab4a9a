//! Key length against block size at a fixed QBER, with the ε split
//! optimised per block.
//!
//! ```text
//! cargo run --release --example finite_key_budget -- [qber] [f]
//! ```

use qkd::protocol::{qber_upper_bound, sample_count};
use qkd::security::{binary_entropy, delta_term, finite_key_length, gllp_factor, multi_photon_prob, SecurityBudget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let q: f64 = args.first().map_or(Ok(0.0404), |s| s.parse())?;
    let f: f64 = args.get(1).map_or(Ok(1.17), |s| s.parse())?;
    let a = gllp_factor(multi_photon_prob(0.0047, 0.058575, 0.55)?, 0.83)?;
    println!("A = {a:.8}");
    println!(
        "{:>9} {:>7} {:>9} {:>9} {:>9} {:>9}",
        "n", "m", "q_tilde", "delta", "l_key", "fraction"
    );
    for n in [10_000usize, 20_000, 50_000, 100_000, 200_000, 500_000, 1_000_000] {
        let m = sample_count(n);
        let b = SecurityBudget::for_frame(n)?;
        let q_tilde = qber_upper_bound(q, m, b.eps_pe)?;
        let leak = (f * n as f64 * binary_entropy(q)).ceil() as usize;
        let r = finite_key_length(n, q_tilde, leak, 172, a, &b)?;
        println!(
            "{n:>9} {m:>7} {q_tilde:>9.5} {:>9.1} {:>9} {:>9.4}",
            delta_term(n, b.eps_bar, b.eps_pa)?,
            r.l_key,
            r.l_key as f64 / (n + m) as f64
        );
    }
    Ok(())
}
