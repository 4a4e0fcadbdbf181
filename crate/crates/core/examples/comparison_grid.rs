//! Mantel r for every pair of distance matrices built from one profile.
//!
//!     cargo run --release --example comparison_grid

use odormap::{comparison_grid, pairwise_distances, sample, Alternative, MetricKind, ProfileAxis};

fn main() -> odormap::Result<()> {
    let profile = sample::latent_profile(60, 40, 5, 3);
    let matrices = MetricKind::ALL
        .iter()
        .map(|&m| pairwise_distances(&profile, ProfileAxis::Items, m))
        .collect::<odormap::Result<Vec<_>>>()?;
    let grid = comparison_grid(&matrices, 499, Alternative::TwoSided, 0)?;

    let r = grid.r_matrix();
    print!("{:>18}", "");
    for tag in &grid.metric_tags {
        print!("{tag:>18}");
    }
    println!();
    for (i, tag) in grid.metric_tags.iter().enumerate() {
        print!("{tag:>18}");
        for j in 0..grid.metric_tags.len() {
            print!("{:>18.3}", r[[i, j]]);
        }
        println!();
    }
    for e in &grid.results {
        println!("{} / {}: p = {:.3} {}", e.tag_a, e.tag_b, e.result.p_value, e.result.stars());
    }
    Ok(())
}
