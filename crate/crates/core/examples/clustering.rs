//! Average-linkage clustering of a few points on a line, then of the mock
//! essential-oil distances with a dendrogram SVG.
//!
//!     cargo run --release --example clustering

use odormap::clustering::cluster;
use odormap::harvest::DEFAULT_TEMPLATE;
use odormap::{
    average_linkage, cut_tree, harvest, mock_provider, render_dendrogram, sample, similarity_to_distance,
    ClusterMode, DistanceMatrix, GroupSpec, HarvestOptions, ItemSet,
};

fn main() -> odormap::Result<()> {
    let xs = [0.0_f64, 1.0, 10.0];
    let line = DistanceMatrix::from_pairs(ItemSet::new(["a", "b", "c"])?, "line", |i, j| (xs[i] - xs[j]).abs())?;
    let dg = average_linkage(&line)?;
    for m in &dg.merges {
        println!("merge {} + {} at {} (size {})", m.left, m.right, m.distance, m.size);
    }
    println!("leaf order {:?}, two clusters {:?}", dg.leaf_order(), cut_tree(&dg, 2)?);

    let dir = std::env::temp_dir();
    let oils = sample::essential_oils();
    let report = harvest(&oils, &mock_provider(42), &dir.join("odormap-clustering.jsonl"), DEFAULT_TEMPLATE, &HarvestOptions::default())?;
    let d = similarity_to_distance(&report.into_matrix()?);
    let tree = cluster(&d, ClusterMode::RowsAsFeatures)?;
    let clusters = cut_tree(&tree, 5)?;
    for k in 0..5 {
        let members: Vec<&str> = oils.iter().zip(&clusters).filter(|(_, &c)| c == k).map(|(l, _)| l).collect();
        println!("cluster {k}: {} oils, e.g. {}", members.len(), members.iter().take(4).copied().collect::<Vec<_>>().join(", "));
    }
    let out = dir.join("odormap-oils-dendrogram.svg");
    render_dendrogram(&tree, &oils, &GroupSpec::scent_families(), &out)?;
    tree.write_json(dir.join("odormap-oils-tree.json"))?;
    println!("dendrogram written to {}", out.display());
    Ok(())
}
