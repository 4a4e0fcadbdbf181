//! Pairwise distances over a small rating table, in all three metrics and
//! along both axes.
//!
//!     cargo run --example distances

use ndarray::array;
use odormap::{pair_count, pairwise_distances, ItemSet, MetricKind, ProfileAxis, ProfileMatrix};

fn main() -> odormap::Result<()> {
    let items = ItemSet::new(["vanillin", "cedrol", "cis-3-hexenol", "ethyl butyrate"])?;
    let descriptors = ItemSet::new(["sweet", "woody", "green", "fruity", "vanilla"])?;
    let ratings = array![
        [4.5, 0.5, 0.2, 1.0, 4.9],
        [0.4, 4.8, 0.9, 0.1, 0.3],
        [0.6, 0.3, 4.7, 1.2, 0.1],
        [2.1, 0.1, 1.3, 4.6, 0.4],
    ];
    let profile = ProfileMatrix::new(items, descriptors, ratings)?;

    for axis in [ProfileAxis::Items, ProfileAxis::Attributes] {
        for metric in MetricKind::ALL {
            let d = pairwise_distances(&profile, axis, metric)?;
            println!("{} ({} pairs)", d.metric_tag(), pair_count(d.len())?);
            for (i, label) in d.items().iter().enumerate() {
                let row: Vec<String> = (0..d.len()).map(|j| format!("{:6.3}", d.get(i, j))).collect();
                println!("  {label:>15} {}", row.join(" "));
            }
        }
    }
    Ok(())
}
