//! Metric multidimensional scaling by SMACOF stress majorization.
//!
//! Each restart starts from coordinates drawn uniformly from
//! `[-0.5, 0.5]^k` and repeatedly applies the Guttman transform
//! `X ← n⁻¹ B(X) X` until the relative decrease of raw stress drops below
//! `convergence_eps` or `max_iterations` is reached. The restart with the
//! lowest raw stress wins (ties go to the lower restart index).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{read_csv_rows, DistanceMatrix, ItemSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsConfig {
    pub n_components: usize,
    pub n_restarts: usize,
    pub max_iterations: usize,
    /// Stop once `(old − new) / old` raw stress falls below this.
    pub convergence_eps: f64,
    pub rng_seed: u64,
}

impl Default for MdsConfig {
    fn default() -> Self {
        MdsConfig {
            n_components: 2,
            n_restarts: 4,
            max_iterations: 300,
            convergence_eps: 1e-6,
            rng_seed: 0,
        }
    }
}

impl MdsConfig {
    pub fn with_components(n_components: usize) -> Self {
        MdsConfig {
            n_components,
            ..MdsConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_components < 1 {
            return Err(Error::Config("n_components must be >= 1".into()));
        }
        if self.n_restarts < 1 || self.max_iterations < 1 {
            return Err(Error::Config("n_restarts and max_iterations must be >= 1".into()));
        }
        if !(self.convergence_eps.is_finite() && self.convergence_eps >= 0.0) {
            return Err(Error::Config("convergence_eps must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    pub items: ItemSet,
    /// `n × k`, column-centred.
    pub coords: Array2<f64>,
    /// `Σ_{i<j} (d_ij − δ_ij)²`.
    pub raw_stress: f64,
    /// Kruskal stress-1, `sqrt(raw_stress / Σ_{i<j} δ_ij²)`.
    pub stress1: f64,
    pub n_components: usize,
    pub iterations_used: usize,
    /// Index of the winning start; `n_restarts` marks a warm start.
    pub restart_index: usize,
}

impl EmbeddingResult {
    /// CSV with header `label,x1,…,xk`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_coords_csv(path.as_ref(), &self.items, &self.coords)
    }
}

/// Raw stress of `coords` against the dissimilarities in `d`.
pub fn raw_stress(coords: &Array2<f64>, d: &DistanceMatrix) -> f64 {
    let problem = Problem::new(d);
    let x = flat(coords);
    let mut dist = vec![0.0; problem.n * problem.n];
    problem.distances(&x, coords.ncols(), &mut dist)
}

/// One Guttman transform `X ← n⁻¹ B(X) X`.
///
/// `b_ij = −δ_ij / dist_ij(X)` off the diagonal (0 for coincident points)
/// and `b_ii = −Σ_{j≠i} b_ij`, so row `i` of the update is
/// `n⁻¹ Σ_{j≠i} (δ_ij / dist_ij)(x_i − x_j)`.
pub fn guttman_step(coords: &Array2<f64>, d: &DistanceMatrix) -> Array2<f64> {
    let (n, k) = coords.dim();
    assert_eq!(n, d.len(), "coordinate rows must match matrix size");
    let problem = Problem::new(d);
    let x = flat(coords);
    let mut dist = vec![0.0; n * n];
    problem.distances(&x, k, &mut dist);
    let mut next = vec![0.0; n * k];
    problem.guttman(&x, k, &dist, &mut next);
    Array2::from_shape_vec((n, k), next).expect("shape")
}

fn flat(coords: &Array2<f64>) -> Vec<f64> {
    coords.iter().copied().collect()
}

/// Dissimilarities as a dense row-major buffer.
struct Problem {
    n: usize,
    delta: Vec<f64>,
}

impl Problem {
    fn new(d: &DistanceMatrix) -> Self {
        Problem {
            n: d.len(),
            delta: d.values().iter().copied().collect(),
        }
    }

    /// Fills `dist` (n × n) with embedded distances of the row-major
    /// `n × k` configuration `x` and returns the raw stress.
    fn distances(&self, x: &[f64], k: usize, dist: &mut [f64]) -> f64 {
        let n = self.n;
        let mut stress = 0.0;
        for i in 0..n {
            let xi = &x[i * k..(i + 1) * k];
            for j in (i + 1)..n {
                let xj = &x[j * k..(j + 1) * k];
                let mut sq = 0.0;
                for (a, b) in xi.iter().zip(xj) {
                    sq += (a - b) * (a - b);
                }
                let e = sq.sqrt();
                dist[i * n + j] = e;
                dist[j * n + i] = e;
                let diff = e - self.delta[i * n + j];
                stress += diff * diff;
            }
        }
        stress
    }

    fn guttman(&self, x: &[f64], k: usize, dist: &[f64], out: &mut [f64]) {
        let n = self.n;
        let inv_n = 1.0 / n as f64;
        for i in 0..n {
            let xi = &x[i * k..(i + 1) * k];
            let row = &mut out[i * k..(i + 1) * k];
            row.fill(0.0);
            for j in 0..n {
                let e = dist[i * n + j];
                if j == i || e <= 0.0 {
                    continue;
                }
                let ratio = self.delta[i * n + j] / e;
                if ratio == 0.0 {
                    continue;
                }
                let xj = &x[j * k..(j + 1) * k];
                for ((o, a), b) in row.iter_mut().zip(xi).zip(xj) {
                    *o += ratio * (a - b);
                }
            }
            for o in row.iter_mut() {
                *o *= inv_n;
            }
        }
    }
}

fn sum_squared_dissimilarities(d: &DistanceMatrix) -> f64 {
    d.lower_triangle().iter().map(|v| v * v).sum()
}

fn check_input(d: &DistanceMatrix) -> Result<f64> {
    if d.len() < 2 {
        return Err(Error::TooFewItems {
            needed: 2,
            got: d.len(),
        });
    }
    let total = sum_squared_dissimilarities(d);
    if total == 0.0 {
        return Err(Error::InvalidMatrix(format!(
            "all dissimilarities in {:?} are zero",
            d.metric_tag()
        )));
    }
    Ok(total)
}

/// Iterates Guttman transforms from `init` until convergence.
pub fn smacof_from(d: &DistanceMatrix, init: Array2<f64>, cfg: &MdsConfig) -> Result<EmbeddingResult> {
    cfg.validate()?;
    let total = check_input(d)?;
    if init.dim() != (d.len(), cfg.n_components) {
        return Err(Error::Config(format!(
            "initial configuration has shape {:?}, expected ({}, {})",
            init.dim(),
            d.len(),
            cfg.n_components
        )));
    }
    let (coords, stress, iterations) = iterate(d, init, cfg);
    Ok(finish(d, coords, stress, total, cfg.n_components, iterations, 0))
}

fn iterate(d: &DistanceMatrix, coords: Array2<f64>, cfg: &MdsConfig) -> (Array2<f64>, f64, usize) {
    let problem = Problem::new(d);
    let (n, k) = coords.dim();
    let mut x = flat(&coords);
    let mut next = vec![0.0; n * k];
    let mut dist = vec![0.0; n * n];
    let mut stress = problem.distances(&x, k, &mut dist);
    let mut iterations = 0;
    while iterations < cfg.max_iterations && stress > 0.0 {
        problem.guttman(&x, k, &dist, &mut next);
        std::mem::swap(&mut x, &mut next);
        let next_stress = problem.distances(&x, k, &mut dist);
        iterations += 1;
        let decrease = stress - next_stress;
        stress = next_stress;
        if decrease <= cfg.convergence_eps * (stress + decrease) {
            break;
        }
    }
    let coords = Array2::from_shape_vec((n, k), x).expect("shape");
    (coords, stress, iterations)
}

fn finish(
    d: &DistanceMatrix,
    mut coords: Array2<f64>,
    raw: f64,
    total: f64,
    k: usize,
    iterations_used: usize,
    restart_index: usize,
) -> EmbeddingResult {
    let means = coords.mean_axis(Axis(0)).expect("n >= 2");
    coords -= &means;
    EmbeddingResult {
        items: d.items().clone(),
        coords,
        raw_stress: raw,
        stress1: (raw / total).sqrt(),
        n_components: k,
        iterations_used,
        restart_index,
    }
}

fn random_init(n: usize, k: usize, seed: u64, restart: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let uniform = Uniform::new_inclusive(-0.5, 0.5);
    Array2::from_shape_simple_fn((n, k), || uniform.sample(&mut rng))
}

/// Metric MDS of `d` into `cfg.n_components` dimensions.
pub fn smacof(d: &DistanceMatrix, cfg: &MdsConfig) -> Result<EmbeddingResult> {
    smacof_with_candidates(d, cfg, None)
}

fn smacof_with_candidates(
    d: &DistanceMatrix,
    cfg: &MdsConfig,
    warm_start: Option<Array2<f64>>,
) -> Result<EmbeddingResult> {
    cfg.validate()?;
    let total = check_input(d)?;
    let (n, k) = (d.len(), cfg.n_components);
    if n < k + 1 {
        log::warn!("embedding {n} items into {k} dimensions; expect a degenerate fit");
    }
    let mut starts: Vec<(usize, Array2<f64>)> = (0..cfg.n_restarts)
        .map(|r| (r, random_init(n, k, cfg.rng_seed, r)))
        .collect();
    if let Some(init) = warm_start {
        starts.push((cfg.n_restarts, init));
    }
    let runs: Vec<_> = starts
        .into_par_iter()
        .map(|(r, init)| {
            let (coords, stress, iterations) = iterate(d, init, cfg);
            (r, coords, stress, iterations)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.2 < best.2 { run } else { best })
        .expect("at least one restart");
    Ok(finish(d, best.1, best.2, total, k, best.3, best.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub raw_stress: f64,
    pub stress1: f64,
}

/// Best-restart stress for `k = 1..=k_max`.
///
/// Besides the seeded restarts, each `k > 1` also runs from the previous
/// dimension's solution padded with a zero column. Guttman steps never
/// raise stress and keep a zero column at zero, so this candidate bounds the
/// result by the `k − 1` stress and the sweep is non-increasing in `k`.
pub fn stress_sweep(d: &DistanceMatrix, k_max: usize, cfg: &MdsConfig) -> Result<Vec<SweepRow>> {
    let n = d.len();
    if k_max < 1 || k_max + 1 > n {
        return Err(Error::Config(format!(
            "k_max must be in 1..={} for {n} items, got {k_max}",
            n.saturating_sub(1)
        )));
    }
    let mut rows = Vec::with_capacity(k_max);
    let mut previous: Option<Array2<f64>> = None;
    for k in 1..=k_max {
        let cfg_k = MdsConfig {
            n_components: k,
            ..cfg.clone()
        };
        let warm = previous.take().map(|prev| {
            let mut padded = Array2::zeros((n, k));
            padded.slice_mut(ndarray::s![.., ..k - 1]).assign(&prev);
            padded
        });
        let result = smacof_with_candidates(d, &cfg_k, warm)?;
        rows.push(SweepRow {
            k,
            raw_stress: result.raw_stress,
            stress1: result.stress1,
        });
        previous = Some(result.coords);
    }
    Ok(rows)
}

/// CSV with header `k,raw_stress,stress1`.
pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["k", "raw_stress", "stress1"])
        .map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.write_record([
            row.k.to_string(),
            row.raw_stress.to_string(),
            row.stress1.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

fn write_coords_csv(path: &Path, items: &ItemSet, coords: &Array2<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["label".to_string()];
    header.extend((1..=coords.ncols()).map(|c| format!("x{c}")));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for (label, row) in items.iter().zip(coords.outer_iter()) {
        let mut record = vec![label.to_string()];
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(|e| Error::csv(path, e))?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Reads a `label,x1,…,xk` coordinate table.
pub fn read_coords_csv(path: impl AsRef<Path>) -> Result<(ItemSet, Array2<f64>)> {
    let path = path.as_ref();
    let rows = read_csv_rows(path)?;
    let (header, body) = rows
        .split_first()
        .ok_or_else(|| Error::format(path, "empty file"))?;
    let k = header.len().saturating_sub(1);
    if k == 0 || body.is_empty() {
        return Err(Error::format(path, "expected label,x1..xk header and data rows"));
    }
    let items = ItemSet::new(body.iter().map(|r| r[0].as_str()))?;
    let mut coords = Array2::zeros((body.len(), k));
    for (r, row) in body.iter().enumerate() {
        if row.len() != k + 1 {
            return Err(Error::Ragged {
                path: path.into(),
                row: r + 2,
                expected: k + 1,
                found: row.len(),
            });
        }
        for (c, cell) in row[1..].iter().enumerate() {
            coords[[r, c]] = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumeric {
                    path: path.into(),
                    row: r + 2,
                    column: c + 2,
                    value: cell.clone(),
                })?;
        }
    }
    Ok((items, coords))
}
