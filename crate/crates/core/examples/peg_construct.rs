//! Builds a parity-check matrix by progressive edge growth from a degree
//! distribution and prints its structure.
//!
//! ```text
//! cargo run --release --example peg_construct -- [block_len] [rate]
//! ```

use std::time::Instant;

use qkd::ldpc::{peg_construct, shipped_distribution, write_alist};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(2_000), |s| s.parse())?;
    let rate: f64 = args.get(1).map_or(Ok(0.70), |s| s.parse())?;
    let dist = shipped_distribution(rate).ok_or("rate is not one of the shipped distributions")?;

    let t = Instant::now();
    let code = peg_construct(n, &dist, 5)?;
    let h = code.matrix();
    println!(
        "{} x {} with {} edges in {:.2?}",
        h.num_rows(),
        h.num_cols(),
        h.num_edges(),
        t.elapsed()
    );
    println!("rate {:.4} (design {:.4})", code.rate(), dist.design_rate());
    println!("girth {:?}, connected {}", code.girth(), h.is_connected());

    let mut hist = std::collections::BTreeMap::new();
    for c in 0..h.num_cols() {
        *hist.entry(h.col_weight(c)).or_insert(0usize) += 1;
    }
    for (d, count) in hist {
        println!("  variable degree {d:>2}: {count}");
    }
    let alist = write_alist(h);
    println!("alist export: {} lines", alist.lines().count());
    Ok(())
}
