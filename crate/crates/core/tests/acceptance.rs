//! Acceptance suite. Runs every criterion in sequence, prints one
//! `[PASS]`/`[FAIL]` line per criterion and exits non-zero on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::*;
use ndarray::Array2;
use odormap::harvest::DEFAULT_TEMPLATE;
use odormap::stats::mantel;
use odormap::{
    average_linkage, guttman_step, harvest, mock_provider, pair_count, pairwise_distances, sample,
    similarity_to_distance, smacof, stress_sweep, Alternative, DistanceMatrix, HarvestOptions,
    MdsConfig, MetricKind, ProfileAxis, ProfileMatrix,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);
type Oracle = fn(&[f64], &[f64]) -> f64;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(id: &str, name: &str, limit: Duration, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let result = result.and_then(|detail| {
        if elapsed < limit {
            Ok(detail)
        } else {
            Err(format!("{detail}; runtime {elapsed:?} exceeds {limit:?}"))
        }
    });
    let (tag, detail) = match &result {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let limit = if limit == Duration::MAX { "none".to_string() } else { format!("{limit:?}") };
    println!("[{tag}] {id} {name} ({:.3}s, limit {limit}): {detail}", elapsed.as_secs_f64());
    result.is_ok()
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("C1", "pair counts", Duration::from_millis(1), c1_pair_counts),
        ("C2", "metric oracle equivalence", Duration::from_secs(5), c2_metrics),
        ("C3", "mantel correctness", Duration::from_secs(60), c3_mantel),
        ("C4", "smacof recovery", Duration::from_secs(30), c4_smacof),
        ("C5", "stress sweep monotonicity", Duration::from_secs(120), c5_sweep),
        ("C6", "upgma brute-force equivalence", Duration::from_secs(10), c6_upgma),
        ("C7", "offline pipeline", Duration::from_secs(60), c7_pipeline),
        ("C8", "reference numbers (informational)", Duration::MAX, c8_reference),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        if !run(id, name, limit, f) {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn c1_pair_counts() -> Outcome {
    let a = pair_count(146).map_err(|e| e.to_string())?;
    let b = pair_count(160).map_err(|e| e.to_string())?;
    ensure(a == 10585, || format!("pair_count(146) = {a}"))?;
    ensure(b == 12720, || format!("pair_count(160) = {b}"))?;
    Ok(format!("pair_count(146) = {a}, pair_count(160) = {b}"))
}

fn check_metrics(profile: &ProfileMatrix, axis: ProfileAxis, tol: f64) -> Result<usize, String> {
    let vectors: Vec<Vec<f64>> = match axis {
        ProfileAxis::Items => profile.values().rows().into_iter().map(|r| r.to_vec()).collect(),
        ProfileAxis::Attributes => profile.values().columns().into_iter().map(|c| c.to_vec()).collect(),
    };
    let oracles: [(MetricKind, Oracle); 3] = [
        (MetricKind::Euclidean, oracle_euclidean),
        (MetricKind::Cosine, oracle_cosine),
        (MetricKind::Correlation, oracle_correlation),
    ];
    let mut checked = 0;
    for (metric, oracle) in oracles {
        let d = pairwise_distances(profile, axis, metric).map_err(|e| e.to_string())?;
        for i in 0..vectors.len() {
            for j in 0..vectors.len() {
                let want = if i == j { 0.0 } else { oracle(&vectors[i], &vectors[j]) };
                let got = d.get(i, j);
                ensure((got - want).abs() <= tol, || {
                    format!("{metric} {axis} ({i},{j}): got {got}, oracle {want}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn fixed_profile(rows: Vec<Vec<f64>>) -> ProfileMatrix {
    let (n, m) = (rows.len(), rows[0].len());
    let values = Array2::from_shape_vec((n, m), rows.concat()).unwrap();
    ProfileMatrix::new(labels("item", n), labels("attr", m), values).unwrap()
}

fn c2_metrics() -> Outcome {
    let fixed = [
        (vec![vec![0.0, 0.0], vec![3.0, 4.0]], MetricKind::Euclidean, 5.0),
        (vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]], MetricKind::Correlation, 0.0),
        (vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]], MetricKind::Correlation, 2.0),
        (vec![vec![1.0, 0.0], vec![0.0, 1.0]], MetricKind::Cosine, 1.0),
    ];
    for (rows, metric, want) in fixed {
        let d = pairwise_distances(&fixed_profile(rows), ProfileAxis::Items, metric)
            .map_err(|e| e.to_string())?;
        ensure((d.get(0, 1) - want).abs() <= 1e-12, || {
            format!("fixed {metric} case: got {}, want {want}", d.get(0, 1))
        })?;
    }
    let mut rng = rng(2);
    let mut checked = 0;
    for _ in 0..500 {
        let n = rng.gen_range(2..=12);
        let dims = rng.gen_range(2..=8);
        let profile = random_profile(&mut rng, n, dims);
        checked += check_metrics(&profile, ProfileAxis::Items, 1e-12)?;
        checked += check_metrics(&profile, ProfileAxis::Attributes, 1e-12)?;
    }
    Ok(format!("4 fixed cases and {checked} matrix entries from 500 profiles within 1e-12"))
}

fn c3_mantel() -> Outcome {
    let mut rng = rng(3);
    for (n, perms) in [(10, 999), (12, 999), (25, 199)] {
        let d = point_distances(&points(&mut rng, n, 3), "a");
        for alt in [Alternative::TwoSided, Alternative::Greater] {
            let res = mantel(&d, &d, perms, alt, 11).map_err(|e| e.to_string())?;
            ensure(res.r == 1.0, || format!("identity r = {}", res.r))?;
            let want = 1.0 / (perms + 1) as f64;
            ensure(res.p_value == want, || format!("identity p = {} (want {want})", res.p_value))?;
        }
    }

    let mut worst = 0.0f64;
    for trial in 0..50 {
        let a = point_distances(&points(&mut rng, 12, 2), "a");
        let b = random_dissimilarities(12, "b", || rng.gen_range(0.0..1.0));
        let scale = rng.gen_range(0.01..100.0);
        let shift = rng.gen_range(0.0..10.0);
        let b2 = DistanceMatrix::from_pairs(b.items().clone(), "b2", |i, j| scale * b.get(i, j) + shift)
            .map_err(|e| e.to_string())?;
        let r1 = mantel(&a, &b, 9, Alternative::TwoSided, trial).map_err(|e| e.to_string())?.r;
        let r2 = mantel(&a, &b2, 9, Alternative::TwoSided, trial).map_err(|e| e.to_string())?.r;
        worst = worst.max((r1 - r2).abs());
    }
    ensure(worst <= 1e-12, || format!("affine invariance deviation {worst:e}"))?;

    let mut above = 0;
    for trial in 0..100u64 {
        let a = point_distances(&points(&mut rng, 12, 3), "a");
        let b = point_distances(&points(&mut rng, 12, 3), "b");
        let res = mantel(&a, &b, 999, Alternative::TwoSided, trial).map_err(|e| e.to_string())?;
        if res.p_value > 0.05 {
            above += 1;
        }
    }
    ensure(above >= 90, || format!("only {above}/100 null trials with p > 0.05"))?;
    Ok(format!(
        "identity exact; affine deviation {worst:.1e}; {above}/100 null trials with p > 0.05"
    ))
}

fn c4_smacof() -> Outcome {
    let cfg_for = |k: usize, seed: u64| MdsConfig {
        n_components: k,
        n_restarts: 4,
        max_iterations: 20_000,
        convergence_eps: 1e-14,
        rng_seed: seed,
    };
    let mut rng = rng(4);
    let mut worst = 0.0f64;
    for dim in [2usize, 3] {
        for seed in 0..10u64 {
            let d = point_distances(&points(&mut rng, 10, dim), "pts");
            let res = smacof(&d, &cfg_for(dim, seed)).map_err(|e| e.to_string())?;
            ensure(res.stress1 < 1e-4, || {
                format!("dim {dim} seed {seed}: stress1 {:e}", res.stress1)
            })?;
            worst = worst.max(res.stress1);
        }
    }

    let h = 3f64.sqrt() / 2.0;
    let tri = point_distances(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]], "tri");
    let res = smacof(&tri, &cfg_for(2, 0)).map_err(|e| e.to_string())?;
    ensure(res.stress1 < 1e-6, || format!("triangle stress1 {:e}", res.stress1))?;

    let mut steps = 0;
    let mut max_increase = f64::NEG_INFINITY;
    while steps < 10_000 {
        let n = rng.gen_range(3..=12);
        let k = rng.gen_range(1..=4);
        let d = random_dissimilarities(n, "r", || rng.gen_range(0.0..1.0));
        let mut x = Array2::from_shape_fn((n, k), |_| rng.gen_range(-1.0..1.0));
        let mut s = oracle_raw_stress(&x, &d);
        for _ in 0..25 {
            let next = guttman_step(&x, &d);
            let t = oracle_raw_stress(&next, &d);
            max_increase = max_increase.max(t - s);
            ensure(t <= s + 1e-12, || format!("stress rose from {s} to {t} (n={n}, k={k})"))?;
            x = next;
            s = t;
            steps += 1;
        }
    }
    Ok(format!(
        "20 point sets, worst stress1 {worst:.1e}; triangle stress1 {:.1e}; {steps} steps, max change {max_increase:.1e}",
        res.stress1
    ))
}

fn check_sweep(d: &DistanceMatrix, what: &str) -> Result<String, String> {
    let rows = stress_sweep(d, 10, &MdsConfig::default()).map_err(|e| e.to_string())?;
    ensure(rows.len() == 10, || format!("{what}: {} sweep rows", rows.len()))?;
    for w in rows.windows(2) {
        ensure(w[1].raw_stress <= w[0].raw_stress + 1e-9, || {
            format!("{what}: raw stress rises {} -> {} at k={}", w[0].raw_stress, w[1].raw_stress, w[1].k)
        })?;
        ensure(w[1].stress1 <= w[0].stress1 + 1e-9, || {
            format!("{what}: stress1 rises {} -> {} at k={}", w[0].stress1, w[1].stress1, w[1].k)
        })?;
    }
    Ok(format!(
        "{what} stress1 {:.3} (k=1) -> {:.3} (k=10)",
        rows[0].stress1, rows[9].stress1
    ))
}

fn c5_sweep() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let provider = mock_provider(42);
    let report = harvest(
        &sample::essential_oils(),
        &provider,
        &dir.path().join("cache.jsonl"),
        DEFAULT_TEMPLATE,
        &HarvestOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let oils = similarity_to_distance(&report.into_matrix().map_err(|e| e.to_string())?);
    let a = check_sweep(&oils, "oils")?;

    let profile = sample::dravnieks_shaped_profile(1);
    let cos = pairwise_distances(&profile, ProfileAxis::Items, MetricKind::Cosine).map_err(|e| e.to_string())?;
    let b = check_sweep(&cos, "160-item cosine")?;
    Ok(format!("{a}; {b}"))
}

fn c6_upgma() -> Outcome {
    let mut rng = rng(6);
    let mut ties = 0;
    for instance in 0..200 {
        let n = rng.gen_range(2..=40);
        let tied = instance % 2 == 0;
        let d = if tied {
            random_dissimilarities(n, "t", || rng.gen_range(1..=4) as f64)
        } else {
            random_dissimilarities(n, "c", || rng.gen_range(0.0..10.0))
        };
        let got = average_linkage(&d).map_err(|e| e.to_string())?;
        let want = oracle_upgma(&d);
        ensure(got.merges.len() == want.len(), || format!("instance {instance}: merge count"))?;
        for (step, (m, w)) in got.merges.iter().zip(&want).enumerate() {
            let same = m.left == w.0 && m.right == w.1 && m.distance.to_bits() == w.2.to_bits() && m.size == w.3;
            ensure(same, || format!("instance {instance} (n={n}) step {step}: got {m:?}, oracle {w:?}"))?;
        }
        if tied {
            ties += 1;
        }
    }
    let d = point_distances(&[vec![0.0], vec![1.0], vec![10.0]], "line");
    let dg = average_linkage(&d).map_err(|e| e.to_string())?;
    let heights: Vec<f64> = dg.merges.iter().map(|m| m.distance).collect();
    ensure(heights == [1.0, 9.5], || format!("{{0,1,10}} heights {heights:?}"))?;
    Ok(format!("200 instances ({ties} with tied integer distances) bit-exact; {{0,1,10}} -> [1.0, 9.5]"))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let mut argv = vec!["odormap"];
    argv.extend_from_slice(args);
    match odormap::cli::run(argv.iter().copied()) {
        0 => Ok(()),
        code => Err(format!("`{}` exited {code}", args.join(" "))),
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

const PIPELINE_OUTPUTS: [&str; 9] = [
    "sim.csv", "dist.csv", "fixture.csv", "mantel.json", "pairs.csv", "coords.csv", "map.svg", "tree.json",
    "dendro.svg",
];

fn pipeline(dir: &Path) -> Result<(), String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let oils = manifest_dir().join("data/essential_oils.txt").to_string_lossy().into_owned();
    let fixture = manifest_dir().join("tests/fixtures/oil_profiles.csv").to_string_lossy().into_owned();
    let cache = p("cache.jsonl");

    cli(&["harvest", "--items", &oils, "--mock-seed", "42", "--cache", &cache, "--out", &p("sim.csv")])?;
    let lines = std::fs::read_to_string(&cache).map_err(|e| e.to_string())?.lines().count();
    ensure(lines == 2775, || format!("cache holds {lines} records"))?;

    cli(&["harvest", "--items", &oils, "--mock-seed", "42", "--cache", &cache, "--out", &p("sim2.csv"), "--report", &p("rerun.json")])?;
    let rerun: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("rerun.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    ensure(rerun["requested_pairs"] == 0 && rerun["attempts"] == 0 && rerun["cached_pairs"] == 2775, || {
        format!("re-run report {rerun}")
    })?;
    let (cold, warm) = (std::fs::read(p("sim.csv")), std::fs::read(p("sim2.csv")));
    ensure(cold.is_ok() && cold.ok() == warm.ok(), || "warm-cache matrix differs from the cold run".into())?;
    let provider = mock_provider(42);
    harvest(&sample::essential_oils(), &provider, Path::new(&cache), DEFAULT_TEMPLATE, &HarvestOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(provider.calls() == 0, || format!("warm-cache re-run made {} provider calls", provider.calls()))?;

    cli(&["sim2dist", "--in", &p("sim.csv"), "--out", &p("dist.csv")])?;
    cli(&["distances", "--input", &fixture, "--metric", "cosine", "--out", &p("fixture.csv")])?;
    cli(&["mantel", "--a", &p("dist.csv"), "--b", &p("fixture.csv"), "--permutations", "999", "--seed", "7", "--out", &p("mantel.json"), "--pairs-out", &p("pairs.csv")])?;
    cli(&["mds", "--dist", &p("dist.csv"), "--dims", "2", "--seed", "0", "--out", &p("coords.csv")])?;
    cli(&["map", "--coords", &p("coords.csv"), "--preset", "scent-families", "--out", &p("map.svg")])?;
    cli(&["cluster", "--dist", &p("dist.csv"), "--out", &p("tree.json")])?;
    cli(&["dendro", "--tree", &p("tree.json"), "--labels", &oils, "--preset", "scent-families", "--out", &p("dendro.svg")])?;
    Ok(())
}

fn c7_pipeline() -> Outcome {
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(first.path())?;
    pipeline(second.path())?;
    for name in PIPELINE_OUTPUTS {
        let a = std::fs::read(first.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = std::fs::read(second.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(a == b, || format!("{name} differs between runs"))?;
        let manifest = first.path().join(format!("{name}.manifest.json"));
        ensure(name == "pairs.csv" || manifest.exists(), || format!("no manifest for {name}"))?;
    }
    let map = std::fs::read_to_string(first.path().join("map.svg")).map_err(|e| e.to_string())?;
    let points = map.matches(r#"<g class="item""#).count();
    let default = map.matches(r##"fill="#9e9e9e""##).count();
    ensure(points == 75 && default == 66, || format!("map has {points} points, {default} default-colored"))?;
    let result: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(first.path().join("mantel.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    Ok(format!(
        "2775 records, 0 calls on re-run; {} outputs byte-identical across runs; map 9 colored + 66 default; mock vs fixture r = {}, p = {}",
        PIPELINE_OUTPUTS.len(),
        result["result"]["r"],
        result["result"]["p_value"]
    ))
}

fn c8_reference() -> Outcome {
    Ok("published reference r = 0.332, p = 0.001 (live model vs 160-item cosine); not reproducible offline, \
        run `cargo run --release --example live_repro` against an endpoint to compare"
        .into())
}
