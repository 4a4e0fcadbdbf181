//! Pairwise similarity elicitation from chat-completion models.
//!
//! [`harvest`] queries every unordered item pair once, appends each parsed
//! response to a JSON-lines cache and assembles a [`SimilarityMatrix`] once
//! all pairs are present. Re-running against a warm cache issues no
//! requests, and an interrupted run resumes where it stopped.

mod cache;
mod parse;
mod prompt;
mod provider;

use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use chrono::Utc;
use ndarray::Array2;
use serde::Serialize;

pub use cache::{load_cache, CacheKey, CacheWriter, SimilarityRecord};
pub use parse::{parse_similarity, ParsedSimilarity};
pub use prompt::{
    prompt_hash, render_prompt, validate_template, DEFAULT_TEMPLATE, ITEM_A_PLACEHOLDER,
    ITEM_B_PLACEHOLDER,
};
pub use provider::{
    mock_provider, HttpProvider, MockProvider, PairRequest, ProviderConfig, SimilarityProvider,
    DEFAULT_API_KEY_ENV,
};

use crate::data::{
    file_stem, read_square_csv, save_square_csv, symmetrize, DistanceMatrix, ItemSet, PairIndex,
};
use crate::error::{Error, Result};

/// Symmetric similarity matrix with unit diagonal and entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    items: ItemSet,
    values: Array2<f64>,
    model_name: String,
}

impl SimilarityMatrix {
    pub fn new(items: ItemSet, values: Array2<f64>, model_name: impl Into<String>) -> Result<Self> {
        let n = items.len();
        if values.dim() != (n, n) {
            return Err(Error::InvalidMatrix(format!("shape {:?} for {n} items", values.dim())));
        }
        for i in 0..n {
            if values[[i, i]] != 1.0 {
                return Err(Error::InvalidMatrix(format!(
                    "similarity diagonal {} != 1 at {}",
                    values[[i, i]],
                    items.labels()[i]
                )));
            }
            for j in (i + 1)..n {
                let (upper, lower) = (values[[i, j]], values[[j, i]]);
                if !(0.0..=1.0).contains(&upper) {
                    return Err(Error::InvalidMatrix(format!(
                        "similarity ({i}, {j}) = {upper} outside [0, 1]"
                    )));
                }
                if upper != lower {
                    return Err(Error::Asymmetric { i, j, upper, lower });
                }
            }
        }
        Ok(SimilarityMatrix {
            items,
            values,
            model_name: model_name.into(),
        })
    }

    pub fn items(&self) -> &ItemSet {
        &self.items
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        save_square_csv(path.as_ref(), &self.model_name, &self.items, &self.values)
    }

    /// Reads a square similarity CSV. Near-symmetric entries are averaged
    /// and the diagonal is set to 1.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let square = read_square_csv(path)?;
        let mut values = symmetrize(square.values)?;
        for i in 0..square.items.len() {
            values[[i, i]] = 1.0;
        }
        let tag = square.tag.unwrap_or_else(|| file_stem(path));
        SimilarityMatrix::new(square.items, values, tag)
    }
}

/// `d = 1 − s` with a zero diagonal, tagged with the model name.
pub fn similarity_to_distance(s: &SimilarityMatrix) -> DistanceMatrix {
    let values = s.values.mapv(|v| 1.0 - v);
    DistanceMatrix::new(s.items.clone(), values, s.model_name.clone())
        .expect("1 - s preserves the distance invariants")
}

#[derive(Debug, Clone)]
pub struct HarvestOptions {
    pub max_parallel: usize,
    pub max_retries: u32,
    /// Delay before the first retry; doubles on each further attempt.
    pub retry_base_delay: Duration,
}

impl Default for HarvestOptions {
    fn default() -> Self {
        HarvestOptions {
            max_parallel: 4,
            max_retries: 3,
            retry_base_delay: Duration::from_millis(500),
        }
    }
}

impl From<&ProviderConfig> for HarvestOptions {
    fn from(config: &ProviderConfig) -> Self {
        HarvestOptions {
            max_parallel: config.max_parallel,
            max_retries: config.max_retries,
            ..HarvestOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedPair {
    pub item_a: String,
    pub item_b: String,
    pub reason: String,
    /// Present when the model answered but the answer could not be parsed.
    pub raw_response: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarvestReport {
    pub model_name: String,
    pub prompt_template_hash: String,
    pub total_pairs: usize,
    pub cached_pairs: usize,
    /// Pairs that needed at least one request in this run.
    pub requested_pairs: usize,
    /// Provider calls including retries.
    pub attempts: usize,
    pub new_records: usize,
    pub failures: Vec<FailedPair>,
    pub warnings: Vec<String>,
    /// Assembled only when every pair has a cached record.
    #[serde(skip)]
    pub matrix: Option<SimilarityMatrix>,
}

impl HarvestReport {
    pub fn is_complete(&self) -> bool {
        self.matrix.is_some()
    }

    pub fn into_matrix(self) -> Result<SimilarityMatrix> {
        let failed = self.failures.len();
        let total = self.total_pairs;
        self.matrix
            .ok_or(Error::HarvestIncomplete { failed, total })
    }
}

struct PendingPair {
    item_a: String,
    item_b: String,
    prompt: String,
    prompt_hash: String,
}

enum Outcome {
    Record(SimilarityRecord, Option<String>),
    Failed(FailedPair),
}

/// Collects a similarity for every unordered pair of `items`.
///
/// Each pair is keyed by its lexicographically ordered labels, the model
/// name and the hash of the rendered prompt; keys already in `cache` are
/// not requested again. Transient provider errors are retried with
/// exponential backoff; pairs that still fail, or whose responses cannot
/// be parsed, are listed in the report and the matrix is left unassembled.
pub fn harvest(
    items: &ItemSet,
    provider: &dyn SimilarityProvider,
    cache: &Path,
    template: &str,
    options: &HarvestOptions,
) -> Result<HarvestReport> {
    let total_pairs = crate::data::pair_count(items.len())?;
    validate_template(template)?;
    if options.max_parallel == 0 {
        return Err(Error::Config("max_parallel must be >= 1".into()));
    }
    let model_name = provider.model_name().to_string();
    let mut records = load_cache(cache)?;

    let mut pending = Vec::new();
    let mut keys = Vec::with_capacity(total_pairs);
    for pair in PairIndex::iter(items.len()) {
        let (x, y) = (&items.labels()[pair.i], &items.labels()[pair.j]);
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        let prompt = render_prompt(a, b, template)?;
        let hash = prompt_hash(&prompt);
        let key = CacheKey {
            item_a: a.clone(),
            item_b: b.clone(),
            model_name: model_name.clone(),
            prompt_hash: hash.clone(),
        };
        if !records.contains_key(&key) {
            pending.push(PendingPair {
                item_a: a.clone(),
                item_b: b.clone(),
                prompt,
                prompt_hash: hash,
            });
        }
        keys.push((pair, key));
    }

    let mut report = HarvestReport {
        model_name: model_name.clone(),
        prompt_template_hash: prompt_hash(template),
        total_pairs,
        cached_pairs: total_pairs - pending.len(),
        requested_pairs: pending.len(),
        attempts: 0,
        new_records: 0,
        failures: Vec::new(),
        warnings: Vec::new(),
        matrix: None,
    };

    if !pending.is_empty() {
        let mut writer = CacheWriter::open(cache)?;
        let next = AtomicUsize::new(0);
        let attempts = AtomicUsize::new(0);
        let abort = AtomicBool::new(false);
        let workers = options.max_parallel.min(pending.len());
        let (tx, rx) = mpsc::channel::<Outcome>();
        let mut write_error = None;

        thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let (next, attempts, abort, pending) = (&next, &attempts, &abort, &pending);
                let model_name = &model_name;
                scope.spawn(move || loop {
                    if abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let k = next.fetch_add(1, Ordering::SeqCst);
                    let Some(pair) = pending.get(k) else { break };
                    let outcome = query_pair(provider, pair, model_name, options, attempts);
                    if tx.send(outcome).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for outcome in rx {
                match outcome {
                    Outcome::Record(record, warning) => {
                        if write_error.is_some() {
                            continue;
                        }
                        if let Err(e) = writer.append(&record) {
                            abort.store(true, Ordering::SeqCst);
                            write_error = Some(e);
                            continue;
                        }
                        if let Some(w) = warning {
                            report
                                .warnings
                                .push(format!("{} / {}: {w}", record.item_a, record.item_b));
                        }
                        report.new_records += 1;
                        records.entry(record.key()).or_insert(record);
                    }
                    Outcome::Failed(failure) => report.failures.push(failure),
                }
            }
        });
        if let Some(e) = write_error {
            return Err(e);
        }
        report.attempts = attempts.into_inner();
        report
            .failures
            .sort_by(|x, y| (&x.item_a, &x.item_b).cmp(&(&y.item_a, &y.item_b)));
        report.warnings.sort();
    }

    if report.failures.is_empty() {
        let n = items.len();
        let mut values = Array2::from_elem((n, n), 1.0);
        for (pair, key) in &keys {
            let s = records[key].similarity;
            values[[pair.i, pair.j]] = s;
            values[[pair.j, pair.i]] = s;
        }
        report.matrix = Some(SimilarityMatrix::new(items.clone(), values, model_name)?);
    }
    Ok(report)
}

fn query_pair(
    provider: &dyn SimilarityProvider,
    pair: &PendingPair,
    model_name: &str,
    options: &HarvestOptions,
    attempts: &AtomicUsize,
) -> Outcome {
    let request = PairRequest {
        item_a: &pair.item_a,
        item_b: &pair.item_b,
        prompt: &pair.prompt,
    };
    let failed = |reason: String, raw_response: Option<String>| {
        Outcome::Failed(FailedPair {
            item_a: pair.item_a.clone(),
            item_b: pair.item_b.clone(),
            reason,
            raw_response,
        })
    };
    let mut last_error = String::new();
    for attempt in 0..=options.max_retries {
        if attempt > 0 {
            let factor = 1u32.checked_shl(attempt - 1).unwrap_or(u32::MAX);
            thread::sleep(options.retry_base_delay.saturating_mul(factor));
        }
        attempts.fetch_add(1, Ordering::SeqCst);
        match provider.complete(&request) {
            Ok(raw) => {
                return match parse_similarity(&raw) {
                    Ok(parsed) => Outcome::Record(
                        SimilarityRecord {
                            item_a: pair.item_a.clone(),
                            item_b: pair.item_b.clone(),
                            model_name: model_name.to_string(),
                            prompt_hash: pair.prompt_hash.clone(),
                            raw_response: raw,
                            similarity: parsed.value,
                            timestamp: Utc::now(),
                        },
                        parsed.warning,
                    ),
                    Err(e) => failed(e.to_string(), Some(raw)),
                };
            }
            Err(e) => {
                log::debug!("{} / {} attempt {}: {e}", pair.item_a, pair.item_b, attempt + 1);
                last_error = e.to_string();
            }
        }
    }
    failed(
        format!("gave up after {} attempts: {last_error}", options.max_retries + 1),
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn similarity_to_distance_is_affine() {
        let items = ItemSet::new(["a", "b", "c"]).unwrap();
        let s = SimilarityMatrix::new(
            items,
            array![[1.0, 0.3, 0.0], [0.3, 1.0, 1.0], [0.0, 1.0, 1.0]],
            "gpt-4o-mini",
        )
        .unwrap();
        let d = similarity_to_distance(&s);
        assert_eq!(d.get(0, 1), 0.7);
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(1, 2), 0.0);
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.metric_tag(), "gpt-4o-mini");
    }

    #[test]
    fn similarity_matrix_invariants() {
        let items = ItemSet::new(["a", "b"]).unwrap();
        assert!(SimilarityMatrix::new(items.clone(), array![[1.0, 1.2], [1.2, 1.0]], "m").is_err());
        assert!(SimilarityMatrix::new(items.clone(), array![[0.9, 0.2], [0.2, 1.0]], "m").is_err());
        assert!(SimilarityMatrix::new(items, array![[1.0, 0.2], [0.3, 1.0]], "m").is_err());
    }
}
