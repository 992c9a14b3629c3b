//! The eight original item fairness measures, kept exactly as published,
//! including their known quirks: the entropy measure is undefined whenever
//! any catalog item has zero count, and the per-(user, item) divergence is
//! constant across single-round runs of the same shape. The corrected
//! variants live in [`crate::bounds`].

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exposure::{ExposureTable, UserItemExposure};

/// Whether larger values of a measure mean a fairer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsFairer,
    LowerIsFairer,
}

/// A measure score plus its reading direction and a definedness flag.
///
/// `defined == false` means the measure has no meaningful value for this
/// input (the value field is NaN and must not be compared).
#[derive(Debug, Clone, Copy)]
pub struct MeasureResult {
    value: f64,
    direction: Direction,
    defined: bool,
}

impl MeasureResult {
    fn defined(value: f64, direction: Direction) -> Self {
        MeasureResult {
            value,
            direction,
            defined: true,
        }
    }

    fn undefined(direction: Direction) -> Self {
        MeasureResult {
            value: f64::NAN,
            direction,
            defined: false,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_defined(&self) -> bool {
        self.defined
    }
}

/// Jain's fairness index over appearance counts: with s = k * m * rounds
/// total slots, s^2 / (n * sum of squared counts). 1 means perfectly even
/// counts; k/n is the floor reached when the same k items fill every list.
pub fn jain_index(exposure: &ExposureTable) -> MeasureResult {
    let slots = exposure.slots() as u128;
    let sum_sq: u128 = exposure
        .counts()
        .iter()
        .map(|&c| (c as u128) * (c as u128))
        .sum();
    let n = exposure.item_count() as u128;
    let value = (slots * slots) as f64 / (n * sum_sq) as f64;
    MeasureResult::defined(value, Direction::HigherIsFairer)
}

/// Fraction of the catalog recommended at least once. Insensitive to how
/// often each covered item appears.
pub fn coverage_fraction(exposure: &ExposureTable) -> MeasureResult {
    let value = exposure.recommended_count() as f64 / exposure.item_count() as f64;
    MeasureResult::defined(value, Direction::HigherIsFairer)
}

/// Shannon entropy of the recommendation frequency distribution over the
/// whole catalog, in the given logarithm base.
///
/// Undefined (NaN) as soon as any catalog item has zero count, because
/// p * log p has no value at p = 0 under this definition; see
/// [`crate::bounds::recommended_entropy_nats`] for the always-finite
/// restriction to recommended items.
pub fn exposure_entropy(exposure: &ExposureTable, log_base: f64) -> MeasureResult {
    assert!(
        log_base > 0.0 && log_base != 1.0,
        "logarithm base must be positive and not 1, got {log_base}"
    );
    if exposure.counts().contains(&0) {
        return MeasureResult::undefined(Direction::HigherIsFairer);
    }
    let slots = exposure.slots() as f64;
    let nats: f64 = exposure
        .counts()
        .iter()
        .map(|&c| {
            let p = c as f64 / slots;
            -p * p.ln()
        })
        .sum();
    // A point-mass distribution has zero entropy in any base; dividing by
    // ln(base) would turn 0 into 0/0 for a single-item catalog.
    let value = if nats == 0.0 {
        0.0
    } else {
        nats / log_base.ln()
    };
    MeasureResult::defined(value, Direction::HigherIsFairer)
}

/// Gini coefficient of the weighted exposure distribution over the whole
/// catalog (zero-count items included): 0 is perfect equality.
///
/// Computed from the ascending sort: sum over positions j (1-based) of
/// (2j - n - 1) * x_(j), divided by n * sum(x). Ties in x make the factor
/// ambiguous but not the total, so tie order does not matter.
pub fn gini_index(exposure: &ExposureTable) -> MeasureResult {
    gini_of(exposure.weighted())
}

fn gini_of(values: &[f64]) -> MeasureResult {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return MeasureResult::undefined(Direction::LowerIsFairer);
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("exposures are finite"));
    let weighted_sum: f64 = sorted
        .iter()
        .enumerate()
        .map(|(idx, &x)| (2.0 * (idx + 1) as f64 - n as f64 - 1.0) * x)
        .sum();
    MeasureResult::defined(weighted_sum / (n as f64 * total), Direction::LowerIsFairer)
}

/// The Gini coefficient written as a mean absolute pairwise difference:
/// sum over all ordered pairs of |x_i - x_j|, divided by 2 * n^2 * mean(x).
/// Algebraically identical to [`gini_index`]; kept as an independent route
/// for cross-checking.
pub fn gini_index_pairwise(exposure: &ExposureTable) -> f64 {
    let values = exposure.weighted();
    let n = values.len() as f64;
    let total: f64 = values.iter().sum();
    let mut abs_diff = 0.0;
    for &a in values {
        for &b in values {
            abs_diff += (a - b).abs();
        }
    }
    abs_diff / (2.0 * n * total)
}

/// Fraction of items reaching the even-split share floor(slots / n).
///
/// When slots < n the share is zero and every item trivially satisfies it,
/// so the measure is 1 for every run of that shape.
pub fn satisfaction_fraction(exposure: &ExposureTable) -> MeasureResult {
    let share = exposure.slots() / exposure.item_count() as u64;
    let satisfied = exposure.counts().iter().filter(|&&c| c >= share).count();
    let value = satisfied as f64 / exposure.item_count() as f64;
    MeasureResult::defined(value, Direction::HigherIsFairer)
}

/// Item vectors used to decide which recommended items count as similar.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<usize, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        Ok(EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        })
    }

    /// Registers an item vector, enforcing a consistent dimension and a
    /// non-zero norm (cosine similarity needs one).
    pub fn insert(&mut self, item: usize, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "embedding for item {item} has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "embedding for item {item} contains a non-finite component"
            )));
        }
        let norm_sq: f64 = vector.iter().map(|v| v * v).sum();
        if norm_sq == 0.0 {
            return Err(Error::invalid(format!(
                "embedding for item {item} is the zero vector"
            )));
        }
        if self.vectors.insert(item, vector).is_some() {
            return Err(Error::invalid(format!(
                "duplicate embedding for item {item}"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Cosine distance 1 - cos(a, b) in [0, 2], or None if either item has
    /// no vector.
    pub fn cosine_distance(&self, a: usize, b: usize) -> Option<f64> {
        let va = self.vectors.get(&a)?;
        let vb = self.vectors.get(&b)?;
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some(1.0 - dot / (na * nb))
    }
}

#[derive(Debug, Clone)]
enum SimilarityKind {
    /// Every pair of recommended items counts as similar, equivalent to the
    /// loosest possible distance threshold.
    All,
    Embeddings(EmbeddingTable),
}

/// Decides which recommended item pairs are compared by the coverage
/// disparity measure, and carries its two tolerances: `alpha`, the cosine
/// distance below which two items count as similar, and `beta`, the
/// disparity level tolerated before a pair counts as a violation.
#[derive(Debug, Clone)]
pub struct SimilarityProvider {
    kind: SimilarityKind,
    alpha: f64,
    beta: f64,
}

impl SimilarityProvider {
    /// Treats all recommended pairs as similar (distance threshold 2, the
    /// maximum cosine distance).
    pub fn all_similar(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(SimilarityProvider {
            kind: SimilarityKind::All,
            alpha: 2.0,
            beta,
        })
    }

    /// Similarity by cosine distance over item embeddings: a pair is
    /// similar when its distance is at most `alpha` (inclusive).
    pub fn with_embeddings(embeddings: EmbeddingTable, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "distance threshold must lie in [0, 2], got {alpha}"
            )));
        }
        check_beta(beta)?;
        Ok(SimilarityProvider {
            kind: SimilarityKind::Embeddings(embeddings),
            alpha,
            beta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn is_similar(&self, a: usize, b: usize) -> Result<bool> {
        match &self.kind {
            SimilarityKind::All => Ok(true),
            SimilarityKind::Embeddings(table) => match table.cosine_distance(a, b) {
                Some(d) => Ok(d <= self.alpha),
                None => Err(Error::invalid(format!(
                    "no embedding for recommended item index {}",
                    if table.cosine_distance(a, a).is_none() {
                        a
                    } else {
                        b
                    }
                ))),
            },
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid(format!(
            "disparity tolerance must lie in [0, 1), got {beta}"
        )));
    }
    Ok(())
}

/// Coverage disparity between two items with counts `a` and `b`:
/// |a - b| / max(a, b), in [0, 1).
fn coverage_disparity(a: u64, b: u64) -> f64 {
    let diff = a.abs_diff(b) as f64;
    diff / a.max(b) as f64
}

/// Mean violation of the allowed coverage disparity over all similar pairs
/// of recommended items: average of max(disparity - beta, 0).
///
/// Errors with [`Error::NoSimilarPairs`] when no pair qualifies, either
/// because fewer than two items were recommended or because the similarity
/// threshold admits no pair.
pub fn disparity_violation(
    exposure: &ExposureTable,
    similarity: &SimilarityProvider,
) -> Result<MeasureResult> {
    let recommended: Vec<usize> = exposure.recommended().collect();
    if recommended.len() < 2 {
        return Err(Error::NoSimilarPairs);
    }
    let beta = similarity.beta();
    let counts = exposure.counts();
    match &similarity.kind {
        SimilarityKind::All => {
            // Every pair is similar, and the disparity of a pair depends
            // only on the two counts, so group equal counts and aggregate
            // per distinct-count pair. Same-count pairs contribute zero
            // violation but still enlarge the averaging set.
            let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
            for &item in &recommended {
                *groups.entry(counts[item]).or_insert(0) += 1;
            }
            let r = recommended.len() as u64;
            let pair_count = r * (r - 1) / 2;
            let grouped: Vec<(u64, u64)> = groups.into_iter().collect();
            let mut violation_sum = 0.0;
            for (i, &(count_a, size_a)) in grouped.iter().enumerate() {
                for &(count_b, size_b) in &grouped[i + 1..] {
                    let violation = (coverage_disparity(count_a, count_b) - beta).max(0.0);
                    violation_sum += (size_a * size_b) as f64 * violation;
                }
            }
            Ok(MeasureResult::defined(
                violation_sum / pair_count as f64,
                Direction::LowerIsFairer,
            ))
        }
        SimilarityKind::Embeddings(_) => {
            let mut pair_count = 0u64;
            let mut violation_sum = 0.0;
            for (i, &a) in recommended.iter().enumerate() {
                for &b in &recommended[i + 1..] {
                    if similarity.is_similar(a, b)? {
                        pair_count += 1;
                        violation_sum += (coverage_disparity(counts[a], counts[b]) - beta).max(0.0);
                    }
                }
            }
            if pair_count == 0 {
                return Err(Error::NoSimilarPairs);
            }
            Ok(MeasureResult::defined(
                violation_sum / pair_count as f64,
                Direction::LowerIsFairer,
            ))
        }
    }
}

/// Mean squared gap between each (user, item) exposure and the
/// uniform-random target, over all m * n pairs.
///
/// For single-round runs every user contributes the same multiset of
/// exposure values (one per rank, zeros elsewhere), so the result depends
/// only on (k, n, gamma), not on which items were recommended.
pub fn user_item_divergence(uie: &UserItemExposure) -> MeasureResult {
    let target = uie.target();
    let n = uie.item_count();
    let mut total = 0.0;
    for user in 0..uie.user_count() {
        let row = uie.row(user);
        let mut user_sum = 0.0;
        for &(_, e) in row {
            user_sum += (e - target) * (e - target);
        }
        user_sum += (n - row.len()) as f64 * target * target;
        total += user_sum;
    }
    let pairs = (uie.user_count() * n) as f64;
    MeasureResult::defined(total / pairs, Direction::LowerIsFairer)
}

/// Mean squared gap between each item's user-averaged exposure and the
/// user-averaged random target, over all n items.
///
/// The random target is the same for every user, so its per-item mean is
/// just the target again; the mean is still computed literally and the
/// simplification is asserted in tests.
pub fn item_mean_divergence(uie: &UserItemExposure) -> MeasureResult {
    let m = uie.user_count() as f64;
    let n = uie.item_count();
    let mut item_sums = vec![0.0f64; n];
    for user in 0..uie.user_count() {
        for &(item, e) in uie.row(user) {
            item_sums[item] += e;
        }
    }
    let target_mean = (0..uie.user_count()).map(|_| uie.target()).sum::<f64>() / m;
    let total: f64 = item_sums
        .iter()
        .map(|&s| {
            let mean = s / m;
            (mean - target_mean) * (mean - target_mean)
        })
        .sum();
    MeasureResult::defined(total / n as f64, Direction::LowerIsFairer)
}
