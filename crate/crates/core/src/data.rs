//! Shared data model: item sets, profile matrices, distance matrices and
//! their CSV representations.
//!
//! All CSV files are UTF-8, comma-separated, with a header row and `.` as the
//! decimal separator. Square matrices carry labels on both axes; the top-left
//! cell holds the matrix tag (for distance matrices, the producing metric).

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance (scaled by magnitude) for accepting slightly
/// asymmetric matrices read from disk. Pairs within it are averaged.
pub const LOAD_SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Ordered, duplicate-free list of item labels.
///
/// Labels are trimmed on construction and compared case-sensitively. The
/// order defines row and column order of every matrix built from the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ItemSet {
    labels: Vec<String>,
}

impl ItemSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let labels: Vec<String> = labels
            .into_iter()
            .map(|l| l.as_ref().trim().to_string())
            .collect();
        if labels.is_empty() {
            return Err(Error::EmptyItems);
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if label.is_empty() {
                return Err(Error::InvalidMatrix("empty label".into()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(ItemSet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    /// Fails unless `other` has the same labels in the same order.
    pub fn ensure_same(&self, other: &ItemSet) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LabelMismatch(format!(
                "{} items vs {} items",
                self.len(),
                other.len()
            )));
        }
        if let Some((i, (a, b))) = self
            .labels
            .iter()
            .zip(&other.labels)
            .enumerate()
            .find(|(_, (a, b))| a != b)
        {
            return Err(Error::LabelMismatch(format!(
                "position {i}: {a:?} vs {b:?}"
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<String>> for ItemSet {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        ItemSet::new(labels)
    }
}

impl From<ItemSet> for Vec<String> {
    fn from(items: ItemSet) -> Self {
        items.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// First column holds item labels, header row holds attribute labels.
    #[default]
    ItemsAsRows,
    /// Header row holds item labels, first column holds attribute labels.
    ItemsAsColumns,
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "items-as-rows" | "rows" => Ok(Orientation::ItemsAsRows),
            "items-as-columns" | "columns" => Ok(Orientation::ItemsAsColumns),
            other => Err(Error::Config(format!("unknown orientation {other:?}"))),
        }
    }
}

/// Items × attributes rating matrix, e.g. odorants × descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix {
    items: ItemSet,
    attributes: ItemSet,
    values: Array2<f64>,
}

impl ProfileMatrix {
    pub fn new(items: ItemSet, attributes: ItemSet, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (items.len(), attributes.len()) {
            return Err(Error::InvalidMatrix(format!(
                "shape {:?} does not match {} items x {} attributes",
                values.dim(),
                items.len(),
                attributes.len()
            )));
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value {v} at ({}, {})",
                items.labels[i], attributes.labels[j]
            )));
        }
        Ok(ProfileMatrix {
            items,
            attributes,
            values,
        })
    }

    pub fn items(&self) -> &ItemSet {
        &self.items
    }

    pub fn attributes(&self) -> &ItemSet {
        &self.attributes
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Swaps the roles of items and attributes.
    pub fn transpose(&self) -> ProfileMatrix {
        ProfileMatrix {
            items: self.attributes.clone(),
            attributes: self.items.clone(),
            values: self.values.t().to_owned(),
        }
    }
}

/// Symmetric, zero-diagonal, non-negative dissimilarity matrix.
///
/// The invariants are checked exactly on construction; there is no way to
/// obtain a `DistanceMatrix` that violates them.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    items: ItemSet,
    values: Array2<f64>,
    metric_tag: String,
}

impl DistanceMatrix {
    pub fn new(items: ItemSet, values: Array2<f64>, metric_tag: impl Into<String>) -> Result<Self> {
        let n = items.len();
        if values.dim() != (n, n) {
            return Err(Error::InvalidMatrix(format!(
                "shape {:?} for {n} items",
                values.dim()
            )));
        }
        for i in 0..n {
            if values[[i, i]] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "non-zero diagonal {} at {}",
                    values[[i, i]],
                    items.labels[i]
                )));
            }
            for j in (i + 1)..n {
                let (upper, lower) = (values[[i, j]], values[[j, i]]);
                if !upper.is_finite() || upper < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {upper} is not a finite non-negative number"
                    )));
                }
                if upper != lower {
                    return Err(Error::Asymmetric { i, j, upper, lower });
                }
            }
        }
        Ok(DistanceMatrix {
            items,
            values,
            metric_tag: metric_tag.into(),
        })
    }

    /// Builds a matrix from a function evaluated once per unordered pair
    /// `i < j` and mirrored.
    pub fn from_pairs<F>(items: ItemSet, metric_tag: impl Into<String>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let n = items.len();
        let mut values = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[[i, j]] = v;
                values[[j, i]] = v;
            }
        }
        DistanceMatrix::new(items, values, metric_tag)
    }

    pub fn items(&self) -> &ItemSet {
        &self.items
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn metric_tag(&self) -> &str {
        &self.metric_tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.metric_tag = tag.into();
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    /// Lower-triangle vectorization in [`PairIndex`] order.
    pub fn lower_triangle(&self) -> Vec<f64> {
        PairIndex::iter(self.len())
            .map(|p| self.values[[p.j, p.i]])
            .collect()
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        save_square_csv(path.as_ref(), &self.metric_tag, &self.items, &self.values)
    }

    /// Reads a square CSV written by [`DistanceMatrix::save_csv`].
    ///
    /// Entries that differ from their mirror by at most
    /// [`LOAD_SYMMETRY_TOLERANCE`] are averaged; the diagonal is forced to 0.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let square = read_square_csv(path)?;
        let mut values = symmetrize(square.values)?;
        for i in 0..square.items.len() {
            values[[i, i]] = 0.0;
        }
        let tag = square.tag.unwrap_or_else(|| file_stem(path));
        DistanceMatrix::new(square.items, values, tag)
    }
}

/// An unordered pair `i < j` and its position in the lower-triangle
/// vectorization (row-major over rows `1..n`, columns `0..row`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
    pub linear_index: usize,
}

impl PairIndex {
    pub fn new(i: usize, j: usize) -> Self {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(i != j, "a pair needs two distinct indices");
        PairIndex {
            i,
            j,
            linear_index: j * (j - 1) / 2 + i,
        }
    }

    pub fn from_linear(linear_index: usize) -> Self {
        // Largest j with j(j-1)/2 <= linear_index.
        let mut j = ((1.0 + (1.0 + 8.0 * linear_index as f64).sqrt()) / 2.0) as usize;
        while j * (j - 1) / 2 > linear_index {
            j -= 1;
        }
        while (j + 1) * j / 2 <= linear_index {
            j += 1;
        }
        PairIndex {
            i: linear_index - j * (j - 1) / 2,
            j,
            linear_index,
        }
    }

    /// All pairs for `n` items in linear order.
    pub fn iter(n: usize) -> impl Iterator<Item = PairIndex> {
        (1..n).flat_map(|j| (0..j).map(move |i| PairIndex::new(i, j)))
    }
}

/// Number of unordered pairs among `n` items.
pub fn pair_count(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::TooFewItems { needed: 2, got: n });
    }
    Ok(n * (n - 1) / 2)
}

pub fn load_profile_csv(path: impl AsRef<Path>, orientation: Orientation) -> Result<ProfileMatrix> {
    let path = path.as_ref();
    let rows = read_csv_rows(path)?;
    let (header, body) = rows
        .split_first()
        .ok_or_else(|| Error::format(path, "empty file"))?;
    if header.len() < 2 {
        return Err(Error::format(path, "header needs a label column and at least one value column"));
    }
    if body.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    let columns = ItemSet::new(&header[1..])?;
    let rows_labels = ItemSet::new(body.iter().map(|r| r[0].as_str()))?;
    let mut values = Array2::zeros((body.len(), columns.len()));
    for (r, row) in body.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Ragged {
                path: path.into(),
                row: r + 2,
                expected: header.len(),
                found: row.len(),
            });
        }
        for (c, cell) in row[1..].iter().enumerate() {
            values[[r, c]] = parse_cell(path, cell, r + 2, c + 2)?;
        }
    }
    match orientation {
        Orientation::ItemsAsRows => ProfileMatrix::new(rows_labels, columns, values),
        Orientation::ItemsAsColumns => {
            ProfileMatrix::new(columns, rows_labels, values.t().to_owned())
        }
    }
}

/// Reads an item list: one label per line, or for `.csv` files the first
/// column below a header row. Blank lines are skipped.
pub fn load_item_list(path: impl AsRef<Path>) -> Result<ItemSet> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let labels: Vec<String> = if is_csv {
        read_csv_rows(path)?
            .into_iter()
            .skip(1)
            .filter_map(|r| r.into_iter().next())
            .filter(|l| !l.is_empty())
            .collect()
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.trim_start_matches('\u{feff}')
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect()
    };
    ItemSet::new(labels)
}

pub(crate) struct SquareCsv {
    pub tag: Option<String>,
    pub items: ItemSet,
    pub values: Array2<f64>,
}

pub(crate) fn read_square_csv(path: &Path) -> Result<SquareCsv> {
    let rows = read_csv_rows(path)?;
    let (header, body) = rows
        .split_first()
        .ok_or_else(|| Error::format(path, "empty file"))?;
    let n = header.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::format(path, "header has no labels"));
    }
    if body.len() != n {
        return Err(Error::format(
            path,
            format!("not square: {n} column labels but {} rows", body.len()),
        ));
    }
    let items = ItemSet::new(&header[1..])?;
    let mut values = Array2::zeros((n, n));
    for (r, row) in body.iter().enumerate() {
        if row.len() != n + 1 {
            return Err(Error::Ragged {
                path: path.into(),
                row: r + 2,
                expected: n + 1,
                found: row.len(),
            });
        }
        if row[0] != items.labels()[r] {
            return Err(Error::LabelMismatch(format!(
                "{}: row {} label {:?} does not match column label {:?}",
                path.display(),
                r + 2,
                row[0],
                items.labels()[r]
            )));
        }
        for (c, cell) in row[1..].iter().enumerate() {
            values[[r, c]] = parse_cell(path, cell, r + 2, c + 2)?;
        }
    }
    let tag = Some(header[0].clone()).filter(|t| !t.is_empty());
    Ok(SquareCsv { tag, items, values })
}

/// Averages mirrored entries, rejecting pairs further apart than
/// [`LOAD_SYMMETRY_TOLERANCE`].
pub(crate) fn symmetrize(mut values: Array2<f64>) -> Result<Array2<f64>> {
    let n = values.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (upper, lower) = (values[[i, j]], values[[j, i]]);
            let scale = upper.abs().max(lower.abs()).max(1.0);
            if (upper - lower).abs() > LOAD_SYMMETRY_TOLERANCE * scale {
                return Err(Error::Asymmetric { i, j, upper, lower });
            }
            let mean = if upper == lower {
                upper
            } else {
                0.5 * (upper + lower)
            };
            values[[i, j]] = mean;
            values[[j, i]] = mean;
        }
    }
    Ok(values)
}

pub(crate) fn save_square_csv(
    path: &Path,
    tag: &str,
    items: &ItemSet,
    values: &Array2<f64>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let mut record = Vec::with_capacity(items.len() + 1);
    record.push(tag.to_string());
    record.extend(items.labels().iter().cloned());
    writer.write_record(&record).map_err(|e| Error::csv(path, e))?;
    for (i, label) in items.iter().enumerate() {
        record.clear();
        record.push(label.to_string());
        record.extend(values.row(i).iter().map(|v| format_f64(*v)));
        writer.write_record(&record).map_err(|e| Error::csv(path, e))?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn read_csv_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let row: Vec<String> = record
            .iter()
            .map(|f| f.trim_start_matches('\u{feff}').trim().to_string())
            .collect();
        if row.iter().all(String::is_empty) {
            continue;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_cell(path: &Path, cell: &str, row: usize, column: usize) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::NonNumeric {
            path: path.into(),
            row,
            column,
            value: cell.to_string(),
        })
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels.join(", "))
    }
}
