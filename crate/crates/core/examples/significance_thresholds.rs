//! Two-tailed p-values and critical correlation coefficients.
//!
//! ```text
//! cargo run --example significance_thresholds
//! ```

use peerstat::model::StatConfig;
use peerstat::stats::{correlate, critical_r, p_value, pearson_r};

fn main() -> peerstat::Result<()> {
    let config = StatConfig::new(0.05)?;
    println!("{:>4} {:>8} {:>8}", "N", "r(.05)", "r(.01)");
    for n in [3, 5, 8, 10, 14, 20, 30, 46, 100] {
        println!(
            "{n:>4} {:>8.4} {:>8.4}",
            critical_r(n, 0.05)?,
            critical_r(n, 0.01)?
        );
    }

    println!();
    for (r, n) in [(0.98, 5), (-0.48, 5), (0.49, 46), (0.29, 46)] {
        println!("r = {r:>5}, N = {n:>2}: p = {:.4}", p_value(r, n)?);
    }

    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let y = [1.2, 1.9, 3.4, 3.8, 5.5, 5.7];
    println!("\nr = {:.4}", pearson_r(&x, &y)?);
    println!("{:?}", correlate(&x, &y, &config)?);
    println!("{:?}", correlate(&x, &[3.0; 6], &config)?);
    Ok(())
}
