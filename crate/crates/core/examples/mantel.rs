//! Mantel test between two views of the same items: cosine distances over a
//! seeded rating table and a noisy copy of them.
//!
//!     cargo run --release --example mantel

use odormap::stats::write_paired_values;
use odormap::{mantel, pairwise_distances, sample, Alternative, DistanceMatrix, MetricKind, ProfileAxis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> odormap::Result<()> {
    let profile = sample::latent_profile(40, 30, 4, 7);
    let cos = pairwise_distances(&profile, ProfileAxis::Items, MetricKind::Cosine)?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise: Vec<f64> = (0..cos.lower_triangle().len()).map(|_| rng.gen_range(0.0..0.4)).collect();
    let noisy = DistanceMatrix::from_pairs(cos.items().clone(), "noisy", |i, j| {
        cos.get(i, j) + noise[odormap::PairIndex::new(i, j).linear_index]
    })?;
    let unrelated = pairwise_distances(&sample::latent_profile(40, 30, 4, 99), ProfileAxis::Items, MetricKind::Cosine)?
        .with_tag("unrelated");

    for other in [&noisy, &unrelated] {
        let res = mantel(&cos, other, 999, Alternative::TwoSided, 0)?;
        println!(
            "{} vs {}: r = {:.3}, p = {:.3} {}",
            cos.metric_tag(),
            other.metric_tag(),
            res.r,
            res.p_value,
            res.stars()
        );
    }

    let out = std::env::temp_dir().join("odormap-mantel-pairs.csv");
    write_paired_values(&cos, &noisy, &out)?;
    println!("paired values for plotting: {}", out.display());
    Ok(())
}
