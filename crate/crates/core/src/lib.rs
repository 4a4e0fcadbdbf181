//! Odor-map construction toolkit.
//!
//! The crate turns sensory rating tables and language-model similarity
//! judgments into comparable distance matrices, tests their agreement and
//! lays items out as low-dimensional maps:
//!
//! * [`data`]: item sets, profile and distance matrices, CSV I/O
//! * [`metrics`]: Euclidean, cosine and correlation distances
//! * [`harvest`]: cached pairwise similarity queries against chat endpoints
//! * [`stats`]: Mantel permutation tests and comparison grids
//! * [`embedding`]: SMACOF metric MDS and stress sweeps
//! * [`clustering`]: average-linkage dendrograms
//! * [`render`]: SVG odor maps and dendrograms
//!
//! The `odormap` binary exposes the same pipeline as subcommands; see
//! [`cli::run`].

pub mod cli;
pub mod clustering;
pub mod data;
pub mod embedding;
pub mod error;
pub mod harvest;
pub mod manifest;
pub mod metrics;
pub mod render;
pub mod sample;
pub mod stats;

pub use clustering::{average_linkage, cut_tree, ClusterMode, Dendrogram, Merge};
pub use data::{
    load_item_list, load_profile_csv, pair_count, DistanceMatrix, ItemSet, Orientation, PairIndex,
    ProfileMatrix,
};
pub use embedding::{guttman_step, raw_stress, smacof, stress_sweep, EmbeddingResult, MdsConfig, SweepRow};
pub use error::{Error, Result};
pub use harvest::{
    harvest, mock_provider, parse_similarity, render_prompt, similarity_to_distance, HarvestOptions,
    HarvestReport, ProviderConfig, SimilarityMatrix, SimilarityProvider, SimilarityRecord,
};
pub use metrics::{pairwise_distances, MetricKind, ProfileAxis};
pub use render::{render_dendrogram, render_map, GroupSpec};
pub use stats::{comparison_grid, mantel, significance_stars, Alternative, ComparisonGrid, MantelResult};
