//! Brute-force enumeration of every possible run at a tiny shape.
//!
//! For small (k, m, n, rounds) the full space of runs is all ordered
//! k-selections per (user, round) slot, (n(n-1)...(n-k+1))^(m * rounds)
//! in total. Enumerating it gives exact empirical minima and maxima of any
//! measure, which is how the closed-form bounds are verified: two
//! independent routes to the same extreme.
//!
//! Enumeration is lexicographic and deterministic, with no pruning or
//! symmetry reduction; correctness over speed at desk scale.

use crate::bounds::recommended_entropy_nats;
use crate::error::{Error, Result};
use crate::exam::ExaminationFunction;
use crate::exposure::{build_exposure, build_user_item_exposure};
use crate::measures::{
    coverage_fraction, disparity_violation, gini_index, item_mean_divergence, jain_index,
    satisfaction_fraction, user_item_divergence, MeasureResult, SimilarityProvider,
};
use crate::model::{ItemCatalog, TopKRun};

/// Default ceiling on the number of runs an enumeration may visit.
pub const DEFAULT_CAP: u128 = 10_000_000;

/// Measures the oracle can extremize. Weighted variants carry their own
/// parameters so a spec is self-contained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMeasure {
    Jain,
    Coverage,
    /// Exposure entropy restricted to recommended items (in nats), the
    /// always-defined variant.
    RecommendedEntropy,
    Gini,
    WeightedGini,
    Satisfaction,
    DisparityViolation {
        beta: f64,
    },
    UserItemDivergence {
        gamma: f64,
    },
    ItemMeanDivergence {
        gamma: f64,
    },
}

impl OracleMeasure {
    /// Stable identifier used by the CLI and in reports.
    pub fn id(&self) -> &'static str {
        match self {
            Self::Jain => "jain",
            Self::Coverage => "qf",
            Self::RecommendedEntropy => "ent-def",
            Self::Gini => "gini",
            Self::WeightedGini => "gini-w",
            Self::Satisfaction => "fsat",
            Self::DisparityViolation { .. } => "vocd",
            Self::UserItemDivergence { .. } => "iid",
            Self::ItemMeanDivergence { .. } => "aid",
        }
    }

    /// Resolves an identifier, attaching the given parameters where the
    /// measure needs them.
    pub fn from_id(id: &str, beta: f64, gamma: f64) -> Result<Self> {
        Ok(match id {
            "jain" => Self::Jain,
            "qf" => Self::Coverage,
            "ent-def" => Self::RecommendedEntropy,
            "gini" => Self::Gini,
            "gini-w" => Self::WeightedGini,
            "fsat" => Self::Satisfaction,
            "vocd" => Self::DisparityViolation { beta },
            "iid" => Self::UserItemDivergence { gamma },
            "aid" => Self::ItemMeanDivergence { gamma },
            other => {
                return Err(Error::invalid(format!(
                    "unknown measure {other:?}; expected one of \
                     jain, qf, ent-def, gini, gini-w, fsat, vocd, iid, aid"
                )))
            }
        })
    }

    /// Scores one run, `None` when the measure is undefined there (a
    /// disparity evaluation without a similar pair).
    pub fn evaluate(&self, run: &TopKRun, catalog: &ItemCatalog) -> Result<Option<f64>> {
        let result = match *self {
            Self::Jain => jain_index(&build_exposure(run, catalog, ExaminationFunction::Uniform)?),
            Self::Coverage => {
                coverage_fraction(&build_exposure(run, catalog, ExaminationFunction::Uniform)?)
            }
            Self::RecommendedEntropy => {
                let exposure = build_exposure(run, catalog, ExaminationFunction::Uniform)?;
                return Ok(Some(recommended_entropy_nats(&exposure)));
            }
            Self::Gini => gini_index(&build_exposure(run, catalog, ExaminationFunction::Uniform)?),
            Self::WeightedGini => {
                gini_index(&build_exposure(run, catalog, ExaminationFunction::Dcg)?)
            }
            Self::Satisfaction => {
                satisfaction_fraction(&build_exposure(run, catalog, ExaminationFunction::Uniform)?)
            }
            Self::DisparityViolation { beta } => {
                let exposure = build_exposure(run, catalog, ExaminationFunction::Uniform)?;
                let similarity = SimilarityProvider::all_similar(beta)?;
                match disparity_violation(&exposure, &similarity) {
                    Ok(result) => result,
                    Err(Error::NoSimilarPairs) => return Ok(None),
                    Err(other) => return Err(other),
                }
            }
            Self::UserItemDivergence { gamma } => {
                user_item_divergence(&build_user_item_exposure(run, catalog, gamma)?)
            }
            Self::ItemMeanDivergence { gamma } => {
                item_mean_divergence(&build_user_item_exposure(run, catalog, gamma)?)
            }
        };
        Ok(defined_value(result))
    }
}

fn defined_value(result: MeasureResult) -> Option<f64> {
    result.is_defined().then(|| result.value())
}

/// What to enumerate: a shape, a measure, and a budget.
#[derive(Debug, Clone)]
pub struct EnumerationSpec {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub rounds: usize,
    pub measure: OracleMeasure,
    pub cap: u128,
}

impl EnumerationSpec {
    pub fn new(k: usize, m: usize, n: usize, rounds: usize, measure: OracleMeasure) -> Self {
        Self {
            k,
            m,
            n,
            rounds,
            measure,
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.n == 0 || self.rounds == 0 {
            return Err(Error::invalid("k, m, n, and rounds must all be at least 1"));
        }
        if self.k > self.n {
            return Err(Error::invalid(format!(
                "cutoff k={} cannot exceed catalog size n={}",
                self.k, self.n
            )));
        }
        Ok(())
    }
}

/// Exact extremes over the whole space, with the first run (in enumeration
/// order) attaining each one as a witness.
#[derive(Debug, Clone)]
pub struct ExtremeResult {
    pub min_value: f64,
    pub max_value: f64,
    pub argmin: TopKRun,
    pub argmax: TopKRun,
    /// Runs where the measure was defined.
    pub evaluated: u128,
    /// Runs skipped because the measure was undefined there.
    pub skipped: u128,
}

/// All ordered k-selections out of 0..n, in lexicographic order.
fn k_permutations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(
        n: usize,
        k: usize,
        current: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for item in 0..n {
            if !used[item] {
                used[item] = true;
                current.push(item);
                extend(n, k, current, used, out);
                current.pop();
                used[item] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(
        n,
        k,
        &mut Vec::with_capacity(k),
        &mut vec![false; n],
        &mut out,
    );
    out
}

fn space_size(choices: usize, slots: usize, cap: u128) -> Result<u128> {
    let size = (choices as u128)
        .checked_pow(slots as u32)
        .unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::SpaceTooLarge { size, cap });
    }
    Ok(size)
}

fn run_at(
    indices: &[usize],
    perms: &[Vec<usize>],
    spec: &EnumerationSpec,
    catalog: &ItemCatalog,
) -> Result<TopKRun> {
    let lists: Vec<Vec<usize>> = indices.iter().map(|&i| perms[i].clone()).collect();
    TopKRun::from_lists(spec.k, spec.m, spec.rounds, lists, catalog)
}

/// Walks every run of the shape and returns the measure's exact extremes.
///
/// Errors with [`Error::SpaceTooLarge`] before touching anything when the
/// space exceeds the cap, and with a validation error when the measure is
/// undefined on every single run.
pub fn enumerate_extremes(spec: &EnumerationSpec) -> Result<ExtremeResult> {
    spec.validate()?;
    let perms = k_permutations(spec.n, spec.k);
    let slots = spec.m * spec.rounds;
    space_size(perms.len(), slots, spec.cap)?;
    let catalog = ItemCatalog::numbered(spec.n);

    let mut indices = vec![0usize; slots];
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let mut min_indices: Option<Vec<usize>> = None;
    let mut max_indices: Option<Vec<usize>> = None;
    let mut evaluated: u128 = 0;
    let mut skipped: u128 = 0;

    'runs: loop {
        let run = run_at(&indices, &perms, spec, &catalog)?;
        match spec.measure.evaluate(&run, &catalog)? {
            Some(value) => {
                evaluated += 1;
                if value < min_value {
                    min_value = value;
                    min_indices = Some(indices.clone());
                }
                if value > max_value {
                    max_value = value;
                    max_indices = Some(indices.clone());
                }
            }
            None => skipped += 1,
        }
        let mut pos = slots;
        while pos > 0 {
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < perms.len() {
                continue 'runs;
            }
            indices[pos] = 0;
        }
        break;
    }

    let (min_indices, max_indices) = match (min_indices, max_indices) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::invalid(format!(
                "{} is undefined on every run at k={}, m={}, n={}, rounds={}",
                spec.measure.id(),
                spec.k,
                spec.m,
                spec.n,
                spec.rounds
            )))
        }
    };
    Ok(ExtremeResult {
        min_value,
        max_value,
        argmin: run_at(&min_indices, &perms, spec, &catalog)?,
        argmax: run_at(&max_indices, &perms, spec, &catalog)?,
        evaluated,
        skipped,
    })
}

/// Which end of an enumeration to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

/// True iff the enumerated extreme agrees with a closed-form value within
/// the tolerance.
pub fn verify_bound(
    spec: &EnumerationSpec,
    closed_form: f64,
    which: Extreme,
    tol: f64,
) -> Result<bool> {
    let result = enumerate_extremes(spec)?;
    let enumerated = match which {
        Extreme::Min => result.min_value,
        Extreme::Max => result.max_value,
    };
    Ok((enumerated - closed_form).abs() <= tol)
}

/// Upper bound on the number of similar pairs a sweep will expand into
/// subsets; 2^16 subsets per run is already generous for desk shapes.
const MAX_SWEEP_PAIRS: usize = 16;

/// Maximum disparity violation over every run of the shape and every
/// nonempty subset of its recommended-item pairs taken as the similar set.
///
/// This is the exhaustive check behind the violation ceiling
/// (m-1)/m - beta: no run and no choice of similar pairs exceeds it.
pub fn disparity_violation_sweep(
    k: usize,
    m: usize,
    n: usize,
    beta: f64,
    cap: u128,
) -> Result<f64> {
    let spec =
        EnumerationSpec::new(k, m, n, 1, OracleMeasure::DisparityViolation { beta }).with_cap(cap);
    spec.validate()?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid(format!(
            "disparity tolerance must lie in [0, 1), got {beta}"
        )));
    }
    let perms = k_permutations(n, k);
    space_size(perms.len(), m, cap)?;
    let catalog = ItemCatalog::numbered(n);

    let mut indices = vec![0usize; m];
    let mut best = f64::NEG_INFINITY;
    let mut any_pair = false;
    'runs: loop {
        let run = run_at(&indices, &perms, &spec, &catalog)?;
        let exposure = build_exposure(&run, &catalog, ExaminationFunction::Uniform)?;
        let recommended: Vec<usize> = exposure.recommended().collect();
        let counts = exposure.counts();
        let mut violations = Vec::new();
        for (idx, &a) in recommended.iter().enumerate() {
            for &b in &recommended[idx + 1..] {
                let disparity =
                    counts[a].abs_diff(counts[b]) as f64 / counts[a].max(counts[b]) as f64;
                violations.push((disparity - beta).max(0.0));
            }
        }
        if !violations.is_empty() {
            if violations.len() > MAX_SWEEP_PAIRS {
                return Err(Error::invalid(format!(
                    "similarity sweep would expand {} pairs into subsets; shape too large",
                    violations.len()
                )));
            }
            any_pair = true;
            for mask in 1u32..(1 << violations.len()) {
                let mut sum = 0.0;
                let mut picked = 0u32;
                for (bit, &v) in violations.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        sum += v;
                        picked += 1;
                    }
                }
                let mean = sum / picked as f64;
                if mean > best {
                    best = mean;
                }
            }
        }
        let mut pos = m;
        while pos > 0 {
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < perms.len() {
                continue 'runs;
            }
            indices[pos] = 0;
        }
        break;
    }
    if !any_pair {
        return Err(Error::NoSimilarPairs);
    }
    Ok(best)
}
