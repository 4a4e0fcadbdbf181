//! Two-dimensional SMACOF embedding of the mock essential-oil distances,
//! rendered as an SVG map with the floral, citrus and woody oils colored.
//!
//!     cargo run --release --example mds_map

use odormap::harvest::DEFAULT_TEMPLATE;
use odormap::{harvest, mock_provider, render_map, sample, similarity_to_distance, smacof, GroupSpec, HarvestOptions, MdsConfig};

fn main() -> odormap::Result<()> {
    let dir = std::env::temp_dir();
    let cache = dir.join("odormap-mds-map.jsonl");
    let report = harvest(&sample::essential_oils(), &mock_provider(42), &cache, DEFAULT_TEMPLATE, &HarvestOptions::default())?;
    let d = similarity_to_distance(&report.into_matrix()?);

    let embedding = smacof(&d, &MdsConfig::with_components(2))?;
    println!(
        "stress1 {:.4} after {} iterations (restart {})",
        embedding.stress1, embedding.iterations_used, embedding.restart_index
    );
    let out = dir.join("odormap-oils-map.svg");
    render_map(&embedding, &GroupSpec::scent_families(), &out)?;
    embedding.write_csv(dir.join("odormap-oils-coords.csv"))?;
    println!("map written to {}", out.display());
    Ok(())
}
