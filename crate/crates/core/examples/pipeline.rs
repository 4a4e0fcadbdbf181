//! The whole offline pipeline through the command-line front end: harvest
//! with the mock provider, convert to distances, compare with a rating
//! table, embed, cluster and render.
//!
//!     cargo run --release --example pipeline [OUT_DIR]

use std::path::PathBuf;

fn step(args: &[&str]) {
    println!("$ odormap {}", args.join(" "));
    let code = odormap::cli::run(std::iter::once("odormap").chain(args.iter().copied()));
    if code != 0 {
        std::process::exit(code);
    }
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("odormap-pipeline"));
    std::fs::create_dir_all(&out).expect("create output directory");
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let s = |p: PathBuf| p.to_string_lossy().into_owned();
    let oils = s(root.join("data/essential_oils.txt"));
    let ratings = s(root.join("tests/fixtures/oil_profiles.csv"));
    let o = |name: &str| s(out.join(name));

    step(&["harvest", "--items", &oils, "--mock-seed", "42", "--cache", &o("cache.jsonl"), "--out", &o("sim.csv")]);
    step(&["sim2dist", "--in", &o("sim.csv"), "--out", &o("mock.csv")]);
    step(&["distances", "--input", &ratings, "--metric", "cosine", "--out", &o("ratings.csv")]);
    step(&["mantel", "--a", &o("mock.csv"), "--b", &o("ratings.csv"), "--out", &o("mantel.json")]);
    step(&["sweep", "--dist", &o("mock.csv"), "--max-dims", "6", "--out", &o("sweep.csv")]);
    step(&["mds", "--dist", &o("mock.csv"), "--dims", "2", "--out", &o("coords.csv")]);
    step(&["map", "--coords", &o("coords.csv"), "--preset", "scent-families", "--out", &o("map.svg")]);
    step(&["cluster", "--dist", &o("mock.csv"), "--out", &o("tree.json")]);
    step(&["dendro", "--tree", &o("tree.json"), "--labels", &oils, "--preset", "scent-families", "--out", &o("dendrogram.svg")]);
    println!("outputs in {}", out.display());
}
