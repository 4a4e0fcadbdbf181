//! Mantel permutation test and all-pairs comparison grids.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DistanceMatrix, PairIndex};
use crate::error::{Error, Result};

pub const DEFAULT_PERMUTATIONS: usize = 999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    Greater,
    Less,
    #[default]
    TwoSided,
}

impl Alternative {
    pub fn as_str(self) -> &'static str {
        match self {
            Alternative::Greater => "greater",
            Alternative::Less => "less",
            Alternative::TwoSided => "two-sided",
        }
    }

    fn at_least_as_extreme(self, permuted: f64, observed: f64) -> bool {
        match self {
            Alternative::Greater => permuted >= observed,
            Alternative::Less => permuted <= observed,
            Alternative::TwoSided => permuted.abs() >= observed.abs(),
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            "two-sided" => Ok(Alternative::TwoSided),
            other => Err(Error::Config(format!("unknown alternative {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MantelResult {
    pub r: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub alternative: Alternative,
    pub n_items: usize,
}

impl MantelResult {
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

/// Mantel test between two distance matrices over the same items.
///
/// `r` is the Pearson correlation of the lower triangles. The null
/// distribution comes from `permutations` simultaneous row/column
/// permutations of `b`, drawn from a ChaCha8 stream seeded with `rng_seed`;
/// `p = (1 + #extreme) / (permutations + 1)`.
pub fn mantel(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    permutations: usize,
    alternative: Alternative,
    rng_seed: u64,
) -> Result<MantelResult> {
    a.items().ensure_same(b.items())?;
    let n = a.len();
    if n < 3 {
        return Err(Error::TooFewItems { needed: 3, got: n });
    }
    if permutations == 0 {
        return Err(Error::Config("permutations must be >= 1".into()));
    }

    let x = a.lower_triangle();
    let x_mean = mean(&x);
    let xc: Vec<f64> = x.iter().map(|v| v - x_mean).collect();
    let sxx: f64 = xc.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::ConstantMatrix(a.metric_tag().to_string()));
    }

    let y_mean = mean(&b.lower_triangle());
    let bc: Array2<f64> = b.values().mapv(|v| v - y_mean);
    let syy: f64 = PairIndex::iter(n).map(|p| bc[[p.j, p.i]].powi(2)).sum();
    if syy == 0.0 {
        return Err(Error::ConstantMatrix(b.metric_tag().to_string()));
    }
    let denom = (sxx * syy).sqrt();

    // The permuted statistic reuses the centred entries of `b`, so the
    // identity permutation reproduces the observed r bit for bit.
    let statistic = |order: &[usize]| -> f64 {
        let mut sxy = 0.0;
        let mut k = 0;
        for j in 1..n {
            let row = bc.row(order[j]);
            for i in 0..j {
                sxy += xc[k] * row[order[i]];
                k += 1;
            }
        }
        sxy / denom
    };

    let identity: Vec<usize> = (0..n).collect();
    let r = statistic(&identity);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut order = identity;
    let mut extreme = 0usize;
    for _ in 0..permutations {
        order.shuffle(&mut rng);
        if alternative.at_least_as_extreme(statistic(&order), r) {
            extreme += 1;
        }
    }
    Ok(MantelResult {
        r,
        p_value: (extreme + 1) as f64 / (permutations + 1) as f64,
        permutations,
        alternative,
        n_items: n,
    })
}

/// Runs [`mantel`] with the lexicographically smaller metric tag as the
/// first argument, so the result does not depend on argument order.
pub fn mantel_canonical(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    permutations: usize,
    alternative: Alternative,
    rng_seed: u64,
) -> Result<MantelResult> {
    if b.metric_tag() < a.metric_tag() {
        mantel(b, a, permutations, alternative, rng_seed)
    } else {
        mantel(a, b, permutations, alternative, rng_seed)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation of two equal-length samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// `***` for p ≤ 0.001, `**` for p ≤ 0.01, `*` for p ≤ 0.05, else `ns`.
pub fn significance_stars(p: f64) -> &'static str {
    if p <= 0.001 {
        "***"
    } else if p <= 0.01 {
        "**"
    } else if p <= 0.05 {
        "*"
    } else {
        "ns"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub tag_a: String,
    pub tag_b: String,
    pub result: MantelResult,
}

/// Mantel results for every unordered pair of a set of matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrid {
    pub metric_tags: Vec<String>,
    pub results: Vec<GridEntry>,
}

impl ComparisonGrid {
    /// Full symmetric correlation matrix in `metric_tags` order, unit diagonal.
    pub fn r_matrix(&self) -> Array2<f64> {
        let m = self.metric_tags.len();
        let mut out = Array2::from_elem((m, m), 1.0);
        let mut k = 0;
        for i in 0..m {
            for j in (i + 1)..m {
                let r = self.results[k].result.r;
                out[[i, j]] = r;
                out[[j, i]] = r;
                k += 1;
            }
        }
        out
    }

    /// CSV with columns `tag_a,tag_b,r,p,permutations,stars`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(["tag_a", "tag_b", "r", "p", "permutations", "stars"])
            .map_err(|e| Error::csv(path, e))?;
        for entry in &self.results {
            let res = &entry.result;
            w.write_record([
                entry.tag_a.as_str(),
                entry.tag_b.as_str(),
                &res.r.to_string(),
                &res.p_value.to_string(),
                &res.permutations.to_string(),
                res.stars(),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.into_inner()
            .map_err(|e| Error::io(path, e.into_error()))?
            .flush()
            .map_err(|e| Error::io(path, e))
    }
}

/// One [`mantel_canonical`] result per unordered pair, in input order
/// (`(0,1), (0,2), …, (1,2), …`). Every pair uses the same seed.
pub fn comparison_grid(
    matrices: &[DistanceMatrix],
    permutations: usize,
    alternative: Alternative,
    rng_seed: u64,
) -> Result<ComparisonGrid> {
    if matrices.len() < 2 {
        return Err(Error::TooFewItems {
            needed: 2,
            got: matrices.len(),
        });
    }
    for m in &matrices[1..] {
        matrices[0].items().ensure_same(m.items())?;
    }
    let mut results = Vec::with_capacity(matrices.len() * (matrices.len() - 1) / 2);
    for (i, a) in matrices.iter().enumerate() {
        for b in &matrices[i + 1..] {
            results.push(GridEntry {
                tag_a: a.metric_tag().to_string(),
                tag_b: b.metric_tag().to_string(),
                result: mantel_canonical(a, b, permutations, alternative, rng_seed)?,
            });
        }
    }
    Ok(ComparisonGrid {
        metric_tags: matrices.iter().map(|m| m.metric_tag().to_string()).collect(),
        results,
    })
}

/// Long-form pair table `item_a,item_b,<tag a>,<tag b>` for scatter plots
/// and histograms of two matrices.
pub fn write_paired_values(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    path: impl AsRef<Path>,
) -> Result<()> {
    a.items().ensure_same(b.items())?;
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["item_a", "item_b", a.metric_tag(), b.metric_tag()])
        .map_err(|e| Error::csv(path, e))?;
    let labels = a.items().labels();
    for p in PairIndex::iter(a.len()) {
        w.write_record([
            labels[p.i].as_str(),
            labels[p.j].as_str(),
            &a.get(p.i, p.j).to_string(),
            &b.get(p.i, p.j).to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}
