//! `odormap` command-line front end.
//!
//! Every subcommand that writes files also writes a `<output>.manifest.json`
//! recording the argument vector, input digests, seeds and tool version.
//! Failures print one JSON line `{"error": <kind>, "message": <text>}` to
//! stderr and exit with status 1; usage errors exit with status 2.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::clustering::{cluster, ClusterMode, Dendrogram};
use crate::data::{load_item_list, load_profile_csv, DistanceMatrix, Orientation};
use crate::embedding::{read_coords_csv, smacof, stress_sweep, write_sweep_csv, MdsConfig};
use crate::error::{Error, Result};
use crate::harvest::{
    harvest, mock_provider, similarity_to_distance, HarvestOptions, HttpProvider, ProviderConfig,
    SimilarityMatrix, SimilarityProvider, DEFAULT_API_KEY_ENV, DEFAULT_TEMPLATE,
};
use crate::manifest::RunManifest;
use crate::metrics::{pairwise_distances, MetricKind, ProfileAxis};
use crate::render::{render_dendrogram, render_map_svg, GroupSpec};
use crate::stats::{comparison_grid, mantel, write_paired_values, Alternative, DEFAULT_PERMUTATIONS};

#[derive(Debug, Parser)]
#[command(name = "odormap", version, about = "Build odor maps from sensory ratings and LLM similarity judgments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairwise distances from a profile CSV
    Distances(DistancesArgs),
    /// Collect pairwise similarities from a chat-completions endpoint
    Harvest(HarvestArgs),
    /// Convert a similarity matrix into distances (d = 1 - s)
    Sim2dist(Sim2distArgs),
    /// Mantel permutation test between two distance matrices
    Mantel(MantelArgs),
    /// Mantel tests for every pair of several matrices
    Grid(GridArgs),
    /// Metric MDS (SMACOF) coordinates
    Mds(MdsArgs),
    /// Stress for k = 1..max-dims
    Sweep(SweepArgs),
    /// Average-linkage hierarchical clustering
    Cluster(ClusterArgs),
    /// Render 2-D coordinates as an SVG odor map
    Map(MapArgs),
    /// Render a dendrogram as SVG
    Dendro(DendroArgs),
    /// Re-run the command recorded in a manifest
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OrientationArg {
    ItemsAsRows,
    ItemsAsColumns,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AxisArg {
    Items,
    Attributes,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MetricArg {
    Euclidean,
    Correlation,
    Cosine,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum AlternativeArg {
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ClusterModeArg {
    RowsAsFeatures,
    Precomputed,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PresetArg {
    None,
    ScentFamilies,
}

#[derive(Debug, Args, Serialize)]
struct DistancesArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "items")]
    axis: AxisArg,
    #[arg(long, value_enum, default_value = "cosine")]
    metric: MetricArg,
    #[arg(long, value_enum, default_value = "items-as-rows")]
    orientation: OrientationArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct HarvestArgs {
    /// Item list (one per line, or first column of a CSV)
    #[arg(long)]
    items: PathBuf,
    /// Chat-completions URL, e.g. http://localhost:11434/v1/chat/completions
    #[arg(long, required_unless_present = "mock_seed")]
    endpoint: Option<String>,
    #[arg(long, required_unless_present = "mock_seed")]
    model: Option<String>,
    /// Use the deterministic offline provider instead of an endpoint
    #[arg(long, conflicts_with_all = ["endpoint", "model"])]
    mock_seed: Option<u64>,
    /// JSON-lines response cache
    #[arg(long)]
    cache: PathBuf,
    /// Prompt template file with {item_a} and {item_b} placeholders
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    max_parallel: usize,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, default_value = DEFAULT_API_KEY_ENV)]
    api_key_env: String,
    /// Similarity matrix CSV
    #[arg(long)]
    out: PathBuf,
    /// Harvest report JSON (default: <out>.report.json)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct Sim2distArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct MantelArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, value_enum, default_value = "two-sided")]
    alternative: AlternativeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result as JSON
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the paired lower-triangle values as CSV
    #[arg(long)]
    pairs_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct GridArgs {
    #[arg(long, num_args = 2.., required = true)]
    matrices: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, value_enum, default_value = "two-sided")]
    alternative: AlternativeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SmacofArgs {
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

impl SmacofArgs {
    fn config(&self, k: usize) -> MdsConfig {
        MdsConfig {
            n_components: k,
            n_restarts: self.restarts,
            max_iterations: self.max_iter,
            convergence_eps: self.eps,
            rng_seed: self.seed,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct MdsArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[command(flatten)]
    smacof: SmacofArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, default_value_t = 10)]
    max_dims: usize,
    #[command(flatten)]
    smacof: SmacofArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ClusterArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, value_enum, default_value = "rows-as-features")]
    mode: ClusterModeArg,
    /// JSON merge list, or linkage CSV when the name ends in .csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct MapArgs {
    #[arg(long)]
    coords: PathBuf,
    /// label,group,color CSV
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    preset: PresetArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct DendroArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Leaf labels in leaf-id order (item list, or any CSV whose first column holds them)
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    preset: PresetArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.kind(), "message": e.to_string() })
            );
            1
        }
    }
}

fn dispatch(command: Command, argv: &[String]) -> Result<()> {
    match command {
        Command::Distances(args) => distances(args, argv),
        Command::Harvest(args) => harvest_cmd(args, argv),
        Command::Sim2dist(args) => sim2dist(args, argv),
        Command::Mantel(args) => mantel_cmd(args, argv),
        Command::Grid(args) => grid(args, argv),
        Command::Mds(args) => mds(args, argv),
        Command::Sweep(args) => sweep(args, argv),
        Command::Cluster(args) => cluster_cmd(args, argv),
        Command::Map(args) => map(args, argv),
        Command::Dendro(args) => dendro(args, argv),
        Command::Replay(args) => replay(args),
    }
}

fn manifest<A: Serialize>(command: &str, argv: &[String], args: &A) -> Result<RunManifest> {
    Ok(RunManifest::new(command, argv, serde_json::to_value(args)?))
}

fn distances(args: DistancesArgs, argv: &[String]) -> Result<()> {
    let orientation = match args.orientation {
        OrientationArg::ItemsAsRows => Orientation::ItemsAsRows,
        OrientationArg::ItemsAsColumns => Orientation::ItemsAsColumns,
    };
    let axis = match args.axis {
        AxisArg::Items => ProfileAxis::Items,
        AxisArg::Attributes => ProfileAxis::Attributes,
    };
    let metric = match args.metric {
        MetricArg::Euclidean => MetricKind::Euclidean,
        MetricArg::Correlation => MetricKind::Correlation,
        MetricArg::Cosine => MetricKind::Cosine,
    };
    let profile = load_profile_csv(&args.input, orientation)?;
    let d = pairwise_distances(&profile, axis, metric)?;
    d.save_csv(&args.out)?;
    let mut m = manifest("distances", argv, &args)?;
    m.input(&args.input)?.output(&args.out);
    m.write()?;
    println!("{} x {} {} matrix -> {}", d.len(), d.len(), d.metric_tag(), args.out.display());
    Ok(())
}

fn harvest_cmd(args: HarvestArgs, argv: &[String]) -> Result<()> {
    let items = load_item_list(&args.items)?;
    let template = match &args.template {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => DEFAULT_TEMPLATE.to_string(),
    };
    let options = HarvestOptions {
        max_parallel: args.max_parallel,
        max_retries: args.max_retries,
        ..HarvestOptions::default()
    };
    let provider: Box<dyn SimilarityProvider> = match args.mock_seed {
        Some(seed) => Box::new(mock_provider(seed)),
        None => {
            let mut config = ProviderConfig::new(
                args.endpoint.clone().unwrap_or_default(),
                args.model.clone().unwrap_or_default(),
            );
            config.api_key_env = args.api_key_env.clone();
            config.temperature = args.temperature;
            config.max_parallel = args.max_parallel;
            config.timeout_secs = args.timeout;
            config.max_retries = args.max_retries;
            Box::new(HttpProvider::new(config)?)
        }
    };
    let report = harvest(&items, provider.as_ref(), &args.cache, &template, &options)?;
    let report_path = args.report.clone().unwrap_or_else(|| {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".report.json");
        args.out.with_file_name(name)
    });
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")
        .map_err(|e| Error::io(&report_path, e))?;
    println!(
        "{} pairs: {} cached, {} requested, {} new records, {} failed",
        report.total_pairs,
        report.cached_pairs,
        report.requested_pairs,
        report.new_records,
        report.failures.len()
    );
    let matrix = report.into_matrix()?;
    matrix.save_csv(&args.out)?;
    let mut m = manifest("harvest", argv, &args)?;
    m.input(&args.items)?;
    if let Some(t) = &args.template {
        m.input(t)?;
    }
    if let Some(seed) = args.mock_seed {
        m.seed("mock_seed", seed);
    }
    m.output(&args.out).output(&report_path).output(&args.cache);
    m.write()?;
    Ok(())
}

fn sim2dist(args: Sim2distArgs, argv: &[String]) -> Result<()> {
    let s = SimilarityMatrix::load_csv(&args.input)?;
    let d = similarity_to_distance(&s);
    d.save_csv(&args.out)?;
    let mut m = manifest("sim2dist", argv, &args)?;
    m.input(&args.input)?.output(&args.out);
    m.write()?;
    Ok(())
}

fn alternative(arg: AlternativeArg) -> Alternative {
    match arg {
        AlternativeArg::Greater => Alternative::Greater,
        AlternativeArg::Less => Alternative::Less,
        AlternativeArg::TwoSided => Alternative::TwoSided,
    }
}

fn mantel_cmd(args: MantelArgs, argv: &[String]) -> Result<()> {
    let a = DistanceMatrix::load_csv(&args.a)?;
    let b = DistanceMatrix::load_csv(&args.b)?;
    let result = mantel(&a, &b, args.permutations, alternative(args.alternative), args.seed)?;
    println!(
        "r={} p={} stars={} permutations={} alternative={} n_items={}",
        result.r,
        result.p_value,
        result.stars(),
        result.permutations,
        result.alternative,
        result.n_items
    );
    let mut m = manifest("mantel", argv, &args)?;
    m.input(&args.a)?.input(&args.b)?.seed("seed", args.seed);
    if let Some(out) = &args.out {
        let json = serde_json::json!({
            "tag_a": a.metric_tag(),
            "tag_b": b.metric_tag(),
            "result": result,
            "stars": result.stars(),
        });
        std::fs::write(out, serde_json::to_string_pretty(&json)? + "\n")
            .map_err(|e| Error::io(out, e))?;
        m.output(out);
    }
    if let Some(pairs) = &args.pairs_out {
        write_paired_values(&a, &b, pairs)?;
        m.output(pairs);
    }
    if !m.outputs.is_empty() {
        m.write()?;
    }
    Ok(())
}

fn grid(args: GridArgs, argv: &[String]) -> Result<()> {
    let matrices = args
        .matrices
        .iter()
        .map(DistanceMatrix::load_csv)
        .collect::<Result<Vec<_>>>()?;
    let grid = comparison_grid(&matrices, args.permutations, alternative(args.alternative), args.seed)?;
    grid.write_csv(&args.out)?;
    for e in &grid.results {
        println!(
            "{}\t{}\tr={:.4}\tp={:.4}\t{}",
            e.tag_a,
            e.tag_b,
            e.result.r,
            e.result.p_value,
            e.result.stars()
        );
    }
    let mut m = manifest("grid", argv, &args)?;
    for path in &args.matrices {
        m.input(path)?;
    }
    m.seed("seed", args.seed).output(&args.out);
    m.write()?;
    Ok(())
}

fn mds(args: MdsArgs, argv: &[String]) -> Result<()> {
    let d = DistanceMatrix::load_csv(&args.dist)?;
    let result = smacof(&d, &args.smacof.config(args.dims))?;
    result.write_csv(&args.out)?;
    println!(
        "k={} raw_stress={} stress1={} iterations={} restart={}",
        result.n_components,
        result.raw_stress,
        result.stress1,
        result.iterations_used,
        result.restart_index
    );
    let mut m = manifest("mds", argv, &args)?;
    m.input(&args.dist)?.seed("seed", args.smacof.seed).output(&args.out);
    m.write()?;
    Ok(())
}

fn sweep(args: SweepArgs, argv: &[String]) -> Result<()> {
    let d = DistanceMatrix::load_csv(&args.dist)?;
    let rows = stress_sweep(&d, args.max_dims, &args.smacof.config(1))?;
    write_sweep_csv(&rows, &args.out)?;
    for row in &rows {
        println!("k={} raw_stress={} stress1={}", row.k, row.raw_stress, row.stress1);
    }
    let mut m = manifest("sweep", argv, &args)?;
    m.input(&args.dist)?.seed("seed", args.smacof.seed).output(&args.out);
    m.write()?;
    Ok(())
}

fn cluster_cmd(args: ClusterArgs, argv: &[String]) -> Result<()> {
    let d = DistanceMatrix::load_csv(&args.dist)?;
    let mode = match args.mode {
        ClusterModeArg::RowsAsFeatures => ClusterMode::RowsAsFeatures,
        ClusterModeArg::Precomputed => ClusterMode::Precomputed,
    };
    let dg = cluster(&d, mode)?;
    if is_csv(&args.out) {
        dg.write_linkage_csv(&args.out)?;
    } else {
        dg.write_json(&args.out)?;
    }
    let mut m = manifest("cluster", argv, &args)?;
    m.input(&args.dist)?.output(&args.out);
    m.write()?;
    Ok(())
}

fn load_groups(path: Option<&Path>, preset: PresetArg) -> Result<GroupSpec> {
    match (path, preset) {
        (Some(p), _) => GroupSpec::load_csv(p),
        (None, PresetArg::ScentFamilies) => Ok(GroupSpec::scent_families()),
        (None, PresetArg::None) => Ok(GroupSpec::new()),
    }
}

fn map(args: MapArgs, argv: &[String]) -> Result<()> {
    let (items, coords) = read_coords_csv(&args.coords)?;
    let groups = load_groups(args.groups.as_deref(), args.preset)?;
    let svg = render_map_svg(&items, &coords, &groups)?;
    std::fs::write(&args.out, svg).map_err(|e| Error::io(&args.out, e))?;
    let mut m = manifest("map", argv, &args)?;
    m.input(&args.coords)?;
    if let Some(g) = &args.groups {
        m.input(g)?;
    }
    m.output(&args.out);
    m.write()?;
    Ok(())
}

fn dendro(args: DendroArgs, argv: &[String]) -> Result<()> {
    let dg = Dendrogram::load(&args.tree)?;
    let labels = load_item_list(&args.labels)?;
    let groups = load_groups(args.groups.as_deref(), args.preset)?;
    render_dendrogram(&dg, &labels, &groups, &args.out)?;
    let mut m = manifest("dendro", argv, &args)?;
    m.input(&args.tree)?.input(&args.labels)?;
    if let Some(g) = &args.groups {
        m.input(g)?;
    }
    m.output(&args.out);
    m.write()?;
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    if manifest.argv.get(1).map(String::as_str) == Some("replay") {
        return Err(Error::Config("refusing to replay a replay".into()));
    }
    match run(manifest.argv.clone()) {
        0 => Ok(()),
        code => Err(Error::Config(format!("replayed command exited with status {code}"))),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}
