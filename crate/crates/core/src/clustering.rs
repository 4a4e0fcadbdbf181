//! Average-linkage (UPGMA) agglomerative clustering.
//!
//! Leaves are numbered `0..n`; the cluster created by merge `i` gets id
//! `n + i`. The distance between clusters `P` and `Q` (with `P` the one with
//! the smaller id) is the sum of `d[p][q]` over members `p` of `P` in
//! ascending order and, for each, members `q` of `Q` in ascending order,
//! divided by `|P|·|Q|`. Ties go to the smallest `(left_id, right_id)`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{read_csv_rows, DistanceMatrix, ItemSet, ProfileMatrix};
use crate::error::{Error, Result};
use crate::metrics::{pairwise_distances, MetricKind, ProfileAxis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn root(&self) -> usize {
        self.n_leaves + self.merges.len() - 1
    }

    fn children(&self, node: usize) -> Option<(usize, usize)> {
        (node >= self.n_leaves).then(|| {
            let m = &self.merges[node - self.n_leaves];
            (m.left, m.right)
        })
    }

    /// Leaves in left-before-right depth-first order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n_leaves);
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            match self.children(node) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => order.push(node),
            }
        }
        order
    }

    /// Height of a node: 0 for leaves, the merge distance otherwise.
    pub fn height(&self, node: usize) -> f64 {
        if node < self.n_leaves {
            0.0
        } else {
            self.merges[node - self.n_leaves].distance
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        if n < 2 || self.merges.len() != n - 1 {
            return Err(Error::InvalidMatrix(format!(
                "dendrogram with {n} leaves needs {} merges, has {}",
                n.saturating_sub(1),
                self.merges.len()
            )));
        }
        let mut sizes = vec![1usize; n];
        let mut used = vec![false; 2 * n - 1];
        for (i, m) in self.merges.iter().enumerate() {
            let id = n + i;
            for child in [m.left, m.right] {
                if child >= id || used[child] {
                    return Err(Error::InvalidMatrix(format!(
                        "merge {i} references invalid or reused node {child}"
                    )));
                }
                used[child] = true;
            }
            if m.size != sizes[m.left] + sizes[m.right] || !m.distance.is_finite() {
                return Err(Error::InvalidMatrix(format!("merge {i} is inconsistent")));
            }
            sizes.push(m.size);
        }
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Conventional linkage-matrix CSV: `left,right,distance,size`.
    pub fn write_linkage_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(["left", "right", "distance", "size"])
            .map_err(|e| Error::csv(path, e))?;
        for m in &self.merges {
            w.write_record([
                m.left.to_string(),
                m.right.to_string(),
                m.distance.to_string(),
                m.size.to_string(),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.into_inner()
            .map_err(|e| Error::io(path, e.into_error()))?
            .flush()
            .map_err(|e| Error::io(path, e))
    }

    /// Loads JSON, or a linkage CSV when the extension is `.csv`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let dendrogram = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            let rows = read_csv_rows(path)?;
            let mut merges = Vec::new();
            for (r, row) in rows.iter().enumerate().skip(1) {
                let bad = || Error::format(path, format!("row {}: expected left,right,distance,size", r + 1));
                if row.len() != 4 {
                    return Err(bad());
                }
                merges.push(Merge {
                    left: row[0].parse().map_err(|_| bad())?,
                    right: row[1].parse().map_err(|_| bad())?,
                    distance: row[2].parse().map_err(|_| bad())?,
                    size: row[3].parse().map_err(|_| bad())?,
                });
            }
            Dendrogram {
                n_leaves: merges.len() + 1,
                merges,
            }
        } else {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)?
        };
        dendrogram.validate()?;
        Ok(dendrogram)
    }
}

/// Agglomerative clustering with unweighted average linkage.
pub fn average_linkage(d: &DistanceMatrix) -> Result<Dendrogram> {
    let n = d.len();
    if n < 2 {
        return Err(Error::TooFewItems { needed: 2, got: n });
    }
    let total = 2 * n - 1;
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    // Cluster-to-cluster averages indexed by id; only entries with
    // row < column are used.
    let mut avg = vec![vec![f64::NAN; total]; total];
    for (i, row) in avg.iter_mut().enumerate().take(n) {
        for (j, cell) in row.iter_mut().enumerate().take(n).skip(i + 1) {
            *cell = d.get(i, j);
        }
    }

    let mut merges = Vec::with_capacity(n - 1);
    while active.len() > 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for (x, &p) in active.iter().enumerate() {
            for &q in &active[x + 1..] {
                let v = avg[p][q];
                if best.is_none_or(|(_, _, b)| v < b) {
                    best = Some((p, q, v));
                }
            }
        }
        let (left, right, distance) = best.expect("two active clusters");
        let id = n + merges.len();
        let mut merged = Vec::with_capacity(members[left].len() + members[right].len());
        merged.extend_from_slice(&members[left]);
        merged.extend_from_slice(&members[right]);
        merged.sort_unstable();
        merges.push(Merge {
            left,
            right,
            distance,
            size: merged.len(),
        });
        active.retain(|&c| c != left && c != right);
        for &other in &active {
            avg[other][id] = cluster_average(d, &members[other], &merged);
        }
        members.push(merged);
        active.push(id);
    }
    Ok(Dendrogram { n_leaves: n, merges })
}

fn cluster_average(d: &DistanceMatrix, outer: &[usize], inner: &[usize]) -> f64 {
    let mut sum = 0.0;
    for &p in outer {
        for &q in inner {
            sum += d.get(p, q);
        }
    }
    sum / (outer.len() * inner.len()) as f64
}

/// Flat clusters from undoing the last `k − 1` merges. Clusters are numbered
/// by increasing smallest leaf id.
pub fn cut_tree(dg: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = dg.n_leaves;
    if k < 1 || k > n {
        return Err(Error::Config(format!("cluster count {k} outside 1..={n}")));
    }
    // Union the first n - k merges.
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, m) in dg.merges.iter().take(n - k).enumerate() {
        let id = n + i;
        parent[m.left] = id;
        parent[m.right] = id;
    }
    let mut labels = vec![usize::MAX; n];
    let mut root_label: Vec<Option<usize>> = vec![None; 2 * n - 1];
    let mut next = 0;
    for (leaf, label) in labels.iter_mut().enumerate() {
        let root = find(&mut parent, leaf);
        *label = *root_label[root].get_or_insert_with(|| {
            next += 1;
            next - 1
        });
    }
    Ok(labels)
}

/// What the clustering treats as input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMode {
    /// Each item's row of dissimilarities is a feature vector; clusters use
    /// Euclidean distances between those rows.
    #[default]
    RowsAsFeatures,
    /// Cluster the dissimilarities directly.
    Precomputed,
}

impl FromStr for ClusterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows-as-features" => Ok(ClusterMode::RowsAsFeatures),
            "precomputed" => Ok(ClusterMode::Precomputed),
            other => Err(Error::Config(format!("unknown cluster mode {other:?}"))),
        }
    }
}

/// Distances used for clustering `d` under `mode`.
pub fn clustering_input(d: &DistanceMatrix, mode: ClusterMode) -> Result<DistanceMatrix> {
    match mode {
        ClusterMode::Precomputed => Ok(d.clone()),
        ClusterMode::RowsAsFeatures => {
            let features = ItemSet::new(d.items().iter().map(|l| format!("to:{l}")))?;
            let profile = ProfileMatrix::new(d.items().clone(), features, d.values().clone())?;
            let rows = pairwise_distances(&profile, ProfileAxis::Items, MetricKind::Euclidean)?;
            let tag = format!("{}|rows-euclidean", d.metric_tag());
            Ok(rows.with_tag(tag))
        }
    }
}

pub fn cluster(d: &DistanceMatrix, mode: ClusterMode) -> Result<Dendrogram> {
    average_linkage(&clustering_input(d, mode)?)
}
