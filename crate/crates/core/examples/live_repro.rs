//! Live comparison against a chat-completions endpoint. Harvests the
//! similarity of every pair of odor names in a profile table, converts the
//! answers to distances and reports the Mantel r against cosine distances
//! of the ratings. The published reference for a 160-odor table and a small
//! hosted model is r = 0.332 (p = 0.001); there is no pass/fail gate.
//!
//!     ODORMAP_API_KEY=... cargo run --release --example live_repro -- \
//!         PROFILE.csv ENDPOINT MODEL [CACHE]
//!
//! PROFILE.csv holds one odor per row with descriptor ratings in columns.
//! Without arguments the example prints this usage and exits.

use std::path::PathBuf;

use odormap::harvest::{HttpProvider, DEFAULT_TEMPLATE};
use odormap::{
    harvest, load_profile_csv, mantel, pairwise_distances, similarity_to_distance, Alternative, HarvestOptions,
    MetricKind, Orientation, ProfileAxis, ProviderConfig,
};

const REFERENCE_R: f64 = 0.332;

fn main() -> odormap::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 3 {
        eprintln!("usage: live_repro PROFILE.csv ENDPOINT MODEL [CACHE]");
        eprintln!("reference: r = {REFERENCE_R}, p = 0.001");
        return Ok(());
    }
    let profile = load_profile_csv(&args[0], Orientation::ItemsAsRows)?;
    let cosine = pairwise_distances(&profile, ProfileAxis::Items, MetricKind::Cosine)?;
    let cache = args.get(3).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("live_repro_cache.jsonl"));

    let config = ProviderConfig::new(args[1].clone(), args[2].clone());
    let options = HarvestOptions::from(&config);
    let provider = HttpProvider::new(config)?;
    let report = harvest(profile.items(), &provider, &cache, DEFAULT_TEMPLATE, &options)?;
    println!(
        "{} pairs: {} cached, {} requested, {} failed",
        report.total_pairs,
        report.cached_pairs,
        report.requested_pairs,
        report.failures.len()
    );
    for f in report.failures.iter().take(5) {
        println!("  failed {} / {}: {}", f.item_a, f.item_b, f.reason);
    }
    let llm = similarity_to_distance(&report.into_matrix()?);
    let res = mantel(&cosine, &llm, 999, Alternative::TwoSided, 0)?;
    println!(
        "r = {:.3} (reference {REFERENCE_R}), p = {:.3} {}, n = {}",
        res.r,
        res.p_value,
        res.stars(),
        res.n_items
    );
    Ok(())
}
