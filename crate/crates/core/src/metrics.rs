//! Pairwise distances between profile vectors.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis as NdAxis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DistanceMatrix, ItemSet, ProfileMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Correlation,
    Cosine,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::Euclidean,
        MetricKind::Correlation,
        MetricKind::Cosine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Correlation => "correlation",
            MetricKind::Cosine => "cosine",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "correlation" => Ok(MetricKind::Correlation),
            "cosine" => Ok(MetricKind::Cosine),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

/// Which vectors of a profile are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileAxis {
    /// Rows: one vector per item over all attributes.
    Items,
    /// Columns: one vector per attribute over all items.
    Attributes,
}

impl ProfileAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileAxis::Items => "items",
            ProfileAxis::Attributes => "attributes",
        }
    }
}

impl fmt::Display for ProfileAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "items" => Ok(ProfileAxis::Items),
            "attributes" => Ok(ProfileAxis::Attributes),
            other => Err(Error::Config(format!("unknown axis {other:?}"))),
        }
    }
}

/// Distance matrix between the vectors along `axis`.
///
/// Euclidean is `sqrt(Σ(u−v)²)`, cosine is `1 − u·v/(‖u‖‖v‖)` and
/// correlation is `1 − r(u, v)` with Pearson `r`. Cosine and correlation
/// results are clamped to `[0, 2]` to absorb rounding at the extremes.
/// The tag is `"<metric>:<axis>"`.
pub fn pairwise_distances(
    profile: &ProfileMatrix,
    axis: ProfileAxis,
    metric: MetricKind,
) -> Result<DistanceMatrix> {
    let (labels, vectors): (&ItemSet, Array2<f64>) = match axis {
        ProfileAxis::Items => (profile.items(), profile.values().to_owned()),
        ProfileAxis::Attributes => (profile.attributes(), profile.values().t().to_owned()),
    };
    let n = vectors.nrows();
    let dim = vectors.ncols();
    if n < 2 {
        return Err(Error::TooFewItems { needed: 2, got: n });
    }
    let min_dim = if metric == MetricKind::Correlation { 2 } else { 1 };
    if dim < min_dim {
        return Err(Error::InvalidMatrix(format!(
            "{metric} distance needs vectors of length >= {min_dim}, got {dim}"
        )));
    }

    // Cosine on mean-centred vectors is the Pearson correlation.
    let prepared = match metric {
        MetricKind::Euclidean => vectors,
        MetricKind::Cosine => vectors,
        MetricKind::Correlation => {
            let means = vectors.mean_axis(NdAxis(1)).expect("dim >= 2");
            let mut centred = vectors;
            for (mut row, mean) in centred.outer_iter_mut().zip(means.iter()) {
                row.mapv_inplace(|v| v - mean);
            }
            centred
        }
    };
    let norms: Vec<f64> = prepared.outer_iter().map(|r| r.dot(&r).sqrt()).collect();
    if metric != MetricKind::Euclidean {
        if let Some(i) = norms.iter().position(|&nrm| nrm == 0.0) {
            let label = labels.labels()[i].clone();
            return Err(match metric {
                MetricKind::Cosine => Error::ZeroNorm(label),
                _ => Error::ZeroVariance(label),
            });
        }
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = prepared.row(i);
            ((i + 1)..n)
                .map(|j| {
                    let v = prepared.row(j);
                    match metric {
                        MetricKind::Euclidean => euclidean(u, v),
                        _ => (1.0 - u.dot(&v) / (norms[i] * norms[j])).clamp(0.0, 2.0),
                    }
                })
                .collect()
        })
        .collect();

    let tag = format!("{metric}:{axis}");
    DistanceMatrix::from_pairs(labels.clone(), tag, |i, j| rows[i][j - i - 1])
}

fn euclidean(u: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
    u.iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn profile(rows: Array2<f64>) -> ProfileMatrix {
        let items = ItemSet::new((0..rows.nrows()).map(|i| format!("i{i}"))).unwrap();
        let attrs = ItemSet::new((0..rows.ncols()).map(|i| format!("a{i}"))).unwrap();
        ProfileMatrix::new(items, attrs, rows).unwrap()
    }

    fn pair(u: [f64; 2], v: [f64; 2], m: MetricKind) -> f64 {
        pairwise_distances(&profile(array![[u[0], u[1]], [v[0], v[1]]]), ProfileAxis::Items, m)
            .unwrap()
            .get(0, 1)
    }

    #[test]
    fn fixed_cases() {
        assert_eq!(pair([0.0, 0.0], [3.0, 4.0], MetricKind::Euclidean), 5.0);
        let cos = pair([1.0, 1.0], [1.0, 0.0], MetricKind::Cosine);
        assert!((cos - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!((cos - 0.2928932).abs() < 1e-7);
        let p = profile(array![[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [3.0, 2.0, 1.0]]);
        let d = pairwise_distances(&p, ProfileAxis::Items, MetricKind::Correlation).unwrap();
        assert!(d.get(0, 1).abs() < 1e-15);
        assert!((d.get(0, 2) - 2.0).abs() < 1e-15);
        assert_eq!(d.metric_tag(), "correlation:items");
    }

    #[test]
    fn attributes_axis_uses_columns() {
        let p = profile(array![[0.0, 3.0], [0.0, 4.0]]);
        let d = pairwise_distances(&p, ProfileAxis::Attributes, MetricKind::Euclidean).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.items().labels(), ["a0", "a1"]);
    }

    #[test]
    fn degenerate_vectors_are_errors() {
        let p = profile(array![[0.0, 0.0], [1.0, 2.0]]);
        assert!(matches!(
            pairwise_distances(&p, ProfileAxis::Items, MetricKind::Cosine),
            Err(Error::ZeroNorm(l)) if l == "i0"
        ));
        let p = profile(array![[1.0, 2.0], [3.0, 3.0]]);
        assert!(matches!(
            pairwise_distances(&p, ProfileAxis::Items, MetricKind::Correlation),
            Err(Error::ZeroVariance(l)) if l == "i1"
        ));
        let p = profile(array![[1.0], [2.0]]);
        assert!(pairwise_distances(&p, ProfileAxis::Items, MetricKind::Correlation).is_err());
        assert!(pairwise_distances(&p, ProfileAxis::Attributes, MetricKind::Euclidean).is_err());
    }

    #[test]
    fn metric_tokens_round_trip() {
        for m in MetricKind::ALL {
            assert_eq!(m.as_str().parse::<MetricKind>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("Cosine".parse::<MetricKind>().is_err());
    }
}
