//! Stress against embedding dimension for a 160 × 146 synthetic profile.
//!
//!     cargo run --release --example stress_sweep

use odormap::embedding::write_sweep_csv;
use odormap::{pairwise_distances, sample, stress_sweep, MdsConfig, MetricKind, ProfileAxis};

fn main() -> odormap::Result<()> {
    let profile = sample::dravnieks_shaped_profile(1);
    let d = pairwise_distances(&profile, ProfileAxis::Items, MetricKind::Cosine)?;
    let rows = stress_sweep(&d, 10, &MdsConfig::default())?;
    for row in &rows {
        let bar = "#".repeat((row.stress1 * 60.0).round() as usize);
        println!("k={:2} stress1={:.4} {bar}", row.k, row.stress1);
    }
    let out = std::env::temp_dir().join("odormap-sweep.csv");
    write_sweep_csv(&rows, &out)?;
    println!("written to {}", out.display());
    Ok(())
}
