//! Asymptotic and finite secret key rate against channel loss.
//!
//! ```text
//! cargo run --release --example gllp_curve -- [start:stop:step]
//! ```

use qkd::security::{
    asymptotic_gllp_rate, loss_range, rate_vs_loss_curve, write_curve_csv, CurveModel, DEFAULT_SIFT_FACTOR,
};
use qkd::sim::SystemParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let range = std::env::args().nth(1).unwrap_or_else(|| "0:40:2".into());
    let v: Vec<f64> = range.split(':').map(str::parse).collect::<Result<_, _>>()?;
    let [a, b, step] = v[..] else {
        return Err("expected start:stop:step".into());
    };

    let mut model = CurveModel::new(SystemParams::default(), 200_000)?;
    model.anchor = Some((9.6, 47_900.0));
    let gllp_a = model.gllp_a()?;
    let point = asymptotic_gllp_rate(47_900.0, DEFAULT_SIFT_FACTOR, 0.0325, 1.17, gllp_a);
    println!("# operating point: {point:.1} bit/s at 9.6 dB");
    let curve = rate_vs_loss_curve(&model, &loss_range(a, b, step)?)?;
    write_curve_csv(&curve, std::io::stdout().lock())?;
    Ok(())
}
