//! Harvests pairwise similarities for the bundled essential-oil list from
//! the offline mock provider, then shows that a second run is served from
//! the cache.
//!
//!     cargo run --example harvest_mock

use odormap::harvest::DEFAULT_TEMPLATE;
use odormap::{harvest, mock_provider, sample, similarity_to_distance, HarvestOptions};

fn main() -> odormap::Result<()> {
    let dir = std::env::temp_dir().join("odormap-harvest-mock");
    std::fs::create_dir_all(&dir).map_err(|e| odormap::Error::Io { path: dir.clone(), source: e })?;
    let cache = dir.join("cache.jsonl");
    let _ = std::fs::remove_file(&cache);

    let oils = sample::essential_oils();
    let provider = mock_provider(42);
    let first = harvest(&oils, &provider, &cache, DEFAULT_TEMPLATE, &HarvestOptions::default())?;
    println!(
        "first run: {} pairs, {} requested, {} provider calls",
        first.total_pairs,
        first.requested_pairs,
        provider.calls()
    );

    let again = mock_provider(42);
    let second = harvest(&oils, &again, &cache, DEFAULT_TEMPLATE, &HarvestOptions::default())?;
    println!(
        "second run: {} cached, {} requested, {} provider calls",
        second.cached_pairs,
        second.requested_pairs,
        again.calls()
    );

    let sim = second.into_matrix()?;
    let out = dir.join("similarity.csv");
    sim.save_csv(&out)?;
    let d = similarity_to_distance(&sim);
    let (i, j) = (oils.position("lemon").unwrap(), oils.position("grapefruit").unwrap());
    println!("lemon / grapefruit: similarity {:.3}, distance {:.3}", sim.get(i, j), d.get(i, j));
    println!("matrix written to {}", out.display());
    Ok(())
}
