//! Independent reference implementations and generators shared by the
//! integration tests. Nothing here calls into the library's numerics.

#![allow(dead_code)]

use ndarray::Array2;
use odormap::{DistanceMatrix, ItemSet, ProfileMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn labels(prefix: &str, n: usize) -> ItemSet {
    ItemSet::new((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

pub fn random_profile(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> ProfileMatrix {
    let values = Array2::from_shape_fn((n, dims), |_| rng.gen_range(-3.0..5.0));
    ProfileMatrix::new(labels("item", n), labels("attr", dims), values).unwrap()
}

pub fn oracle_euclidean(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..u.len() {
        s += (u[k] - v[k]) * (u[k] - v[k]);
    }
    s.sqrt()
}

pub fn oracle_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    1.0 - dot / (nu * nv)
}

/// One minus Pearson's r from explicitly centred deviations.
pub fn oracle_correlation(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut num, mut du2, mut dv2) = (0.0, 0.0, 0.0);
    for k in 0..u.len() {
        let (du, dv) = (u[k] - mu, v[k] - mv);
        num += du * dv;
        du2 += du * du;
        dv2 += dv * dv;
    }
    1.0 - num / du2.sqrt() / dv2.sqrt()
}

pub fn points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

pub fn point_distances(pts: &[Vec<f64>], tag: &str) -> DistanceMatrix {
    let n = pts.len();
    let values = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.0
        } else {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            oracle_euclidean(&pts[a], &pts[b])
        }
    });
    DistanceMatrix::new(labels("x", n), values, tag).unwrap()
}

/// Symmetric matrix with entries drawn from `draw`.
pub fn random_dissimilarities(
    n: usize,
    tag: &str,
    mut draw: impl FnMut() -> f64,
) -> DistanceMatrix {
    let mut values = Array2::zeros((n, n));
    for j in 1..n {
        for i in 0..j {
            let v = draw();
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    DistanceMatrix::new(labels("x", n), values, tag).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Raw stress straight from the definition.
pub fn oracle_raw_stress(coords: &Array2<f64>, d: &DistanceMatrix) -> f64 {
    let n = d.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = oracle_euclidean(&coords.row(i).to_vec(), &coords.row(j).to_vec());
            s += (e - d.get(i, j)).powi(2);
        }
    }
    s
}

/// `(left, right, distance, size)` per merge.
pub type OracleMerge = (usize, usize, f64, usize);

/// Brute-force UPGMA: every step recomputes each cluster-pair average from
/// the raw matrix. Pairs are compared with the id-smaller cluster first,
/// members summed in ascending order, ties to the smallest id pair.
pub fn oracle_upgma(d: &DistanceMatrix) -> Vec<OracleMerge> {
    let n = d.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    let mut next_id = n;
    while clusters.len() > 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for x in 0..clusters.len() {
            for y in 0..clusters.len() {
                let (ida, ma) = &clusters[x];
                let (idb, mb) = &clusters[y];
                if ida >= idb {
                    continue;
                }
                let mut sum = 0.0;
                for &p in ma {
                    for &q in mb {
                        sum += d.get(p, q);
                    }
                }
                let avg = sum / (ma.len() * mb.len()) as f64;
                let better = match best {
                    None => true,
                    Some((bx, by, bv)) => {
                        let (bi, bj) = (clusters[bx].0, clusters[by].0);
                        avg < bv || (avg == bv && (*ida, *idb) < (bi, bj))
                    }
                };
                if better {
                    best = Some((x, y, avg));
                }
            }
        }
        let (x, y, avg) = best.unwrap();
        let (ida, ma) = clusters[x].clone();
        let (idb, mb) = clusters[y].clone();
        let mut merged: Vec<usize> = ma.iter().chain(&mb).copied().collect();
        merged.sort();
        out.push((ida, idb, avg, merged.len()));
        clusters.retain(|(id, _)| *id != ida && *id != idb);
        clusters.push((next_id, merged));
        next_id += 1;
    }
    out
}
