//! Synthetic experiment procedures: extreme-run generators, sliding-window
//! evaluation, and the item-insertion sweep.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::eval::{evaluate_fairness, EvalParams, FairnessSummary};
use crate::model::{ItemCatalog, RelevanceJudgments, TopKRun, UserSet};
use crate::relevance::{evaluate_relevance, RelevanceSummary};

/// Whether a generator may recommend items a user has already consumed.
///
/// Repeatable generators ignore consumption history entirely;
/// nonrepeatable ones must avoid each user's excluded items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorMode {
    Repeatable,
    NonRepeatable,
}

/// Per-user sets of items that must not be recommended to that user
/// (typically their train/validation interactions).
#[derive(Debug, Clone)]
pub struct ExclusionSets {
    per_user: Vec<HashSet<usize>>,
}

impl ExclusionSets {
    /// No exclusions for any of the `user_count` users.
    pub fn none(user_count: usize) -> Self {
        Self {
            per_user: vec![HashSet::new(); user_count],
        }
    }

    pub fn add(&mut self, user: usize, item: usize) {
        self.per_user[user].insert(item);
    }

    pub fn user_count(&self) -> usize {
        self.per_user.len()
    }

    pub fn is_excluded(&self, user: usize, item: usize) -> bool {
        self.per_user[user].contains(&item)
    }

    pub fn excluded_count(&self, user: usize) -> usize {
        self.per_user[user].len()
    }

    fn is_empty_everywhere(&self) -> bool {
        self.per_user.iter().all(HashSet::is_empty)
    }
}

fn check_generator_inputs(
    k: usize,
    users: &UserSet,
    catalog: &ItemCatalog,
    mode: GeneratorMode,
    exclusions: &ExclusionSets,
) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("cutoff k must be at least 1"));
    }
    if k > catalog.len() {
        return Err(Error::invalid(format!(
            "cutoff k={k} cannot exceed catalog size n={}",
            catalog.len()
        )));
    }
    if exclusions.user_count() != users.len() {
        return Err(Error::invalid(format!(
            "exclusion sets cover {} users but the user set has {}",
            exclusions.user_count(),
            users.len()
        )));
    }
    match mode {
        GeneratorMode::Repeatable => {
            if !exclusions.is_empty_everywhere() {
                return Err(Error::invalid(
                    "repeatable generators ignore history; pass empty exclusion sets",
                ));
            }
        }
        GeneratorMode::NonRepeatable => {
            for user in 0..users.len() {
                let pool = catalog.len() - exclusions.excluded_count(user);
                if pool < k {
                    return Err(Error::invalid(format!(
                        "user {:?} has only {pool} recommendable items, fewer than k={k}",
                        users.id(user)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The fairest run a recommender could produce: exposure spread as evenly
/// as the shape allows.
///
/// Repeatable mode walks the catalog cyclically, k slots per user, which
/// lands every item count at floor(km/n) or floor(km/n)+1 exactly.
/// Nonrepeatable mode fills each slot greedily with the least recommended
/// item still allowed for that user, ties broken in catalog order.
pub fn most_fair(
    k: usize,
    users: &UserSet,
    catalog: &ItemCatalog,
    mode: GeneratorMode,
    exclusions: &ExclusionSets,
) -> Result<TopKRun> {
    check_generator_inputs(k, users, catalog, mode, exclusions)?;
    let n = catalog.len();
    let m = users.len();
    let lists: Vec<Vec<usize>> = match mode {
        GeneratorMode::Repeatable => (0..m)
            .map(|user| (0..k).map(|j| (user * k + j) % n).collect())
            .collect(),
        GeneratorMode::NonRepeatable => {
            let mut counts = vec![0u64; n];
            let mut lists = Vec::with_capacity(m);
            for user in 0..m {
                let mut in_list = vec![false; n];
                let mut list = Vec::with_capacity(k);
                for _ in 0..k {
                    let pick = (0..n)
                        .filter(|&item| !in_list[item] && !exclusions.is_excluded(user, item))
                        .min_by_key(|&item| counts[item])
                        .expect("pool size was checked against k");
                    in_list[pick] = true;
                    counts[pick] += 1;
                    list.push(pick);
                }
                lists.push(list);
            }
            lists
        }
    };
    TopKRun::single_round(k, lists, catalog)
}

/// The most concentrated run a recommender could produce.
///
/// Repeatable mode hands the first k catalog items to every user in the
/// same order. Nonrepeatable mode starts from that list and, per user,
/// replaces each excluded item with the currently most recommended item
/// still allowed, ties broken in catalog order.
pub fn most_unfair(
    k: usize,
    users: &UserSet,
    catalog: &ItemCatalog,
    mode: GeneratorMode,
    exclusions: &ExclusionSets,
) -> Result<TopKRun> {
    check_generator_inputs(k, users, catalog, mode, exclusions)?;
    let n = catalog.len();
    let m = users.len();
    let base: Vec<usize> = (0..k).collect();
    let lists: Vec<Vec<usize>> = match mode {
        GeneratorMode::Repeatable => vec![base; m],
        GeneratorMode::NonRepeatable => {
            let mut counts = vec![0u64; n];
            let mut lists = Vec::with_capacity(m);
            for user in 0..m {
                let mut list = base.clone();
                let mut in_list = vec![false; n];
                for &item in &list {
                    in_list[item] = true;
                }
                for pos in 0..k {
                    if !exclusions.is_excluded(user, list[pos]) {
                        continue;
                    }
                    in_list[list[pos]] = false;
                    let mut pick = None;
                    for item in 0..n {
                        if in_list[item] || exclusions.is_excluded(user, item) {
                            continue;
                        }
                        match pick {
                            Some(best) if counts[item] <= counts[best] => {}
                            _ => pick = Some(item),
                        }
                    }
                    let pick = pick.expect("pool size was checked against k");
                    in_list[pick] = true;
                    list[pos] = pick;
                }
                for &item in &list {
                    counts[item] += 1;
                }
                lists.push(list);
            }
            lists
        }
    };
    TopKRun::single_round(k, lists, catalog)
}

/// Re-evaluates a deep run through a window of rank positions: rank
/// `start` (1-based) through `start + width - 1` become the new list.
pub fn sliding_window(deep: &TopKRun, start: usize, width: usize) -> Result<TopKRun> {
    deep.rank_window(start, width)
}

/// Which kind of item the insertion sweep pushes into the lists step by
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionMode {
    /// Start from everyone seeing the same k items; insert, from the
    /// bottom rank up, items that are unexposed elsewhere and relevant to
    /// the receiving user. Fairness and relevance rise together.
    LowExposureRelevant,
    /// Start from the fully spread run; insert, from the top rank down,
    /// the globally over-exposed items, which are irrelevant to the
    /// receiving user. Fairness and relevance fall together.
    MaxExposureIrrelevant,
}

/// A full insertion experiment: one run per step t = 0..=k, plus the
/// judgments that make the inserted items relevant.
#[derive(Debug, Clone)]
pub struct InsertionSeries {
    pub catalog: ItemCatalog,
    pub users: UserSet,
    pub judgments: RelevanceJudgments,
    pub k: usize,
    pub mode: InsertionMode,
    /// `steps[t]` has t inserted ranks per list (fraction t/k).
    pub steps: Vec<TopKRun>,
}

/// Builds the insertion experiment for m users and an n = k * m catalog.
///
/// The first user always keeps the base list (the first k catalog items,
/// relevant to them alone); every other user u owns a private block of k
/// "fresh" items which are their relevant items. At step t, mode decides
/// which t ranks of each list have been replaced by fresh items (from the
/// bottom) or by base items (from the top).
pub fn insertion_series(
    m: usize,
    n: usize,
    k: usize,
    mode: InsertionMode,
) -> Result<InsertionSeries> {
    if k == 0 {
        return Err(Error::invalid("cutoff k must be at least 1"));
    }
    if m < 2 {
        return Err(Error::invalid(
            "insertion experiments need at least two users",
        ));
    }
    if n != k * m {
        return Err(Error::invalid(format!(
            "insertion experiments need n = k * m (got n={n}, k={k}, m={m})"
        )));
    }
    let catalog = ItemCatalog::numbered(n);
    let users = UserSet::numbered(m);
    // User u's private block: items k*u .. k*u + k. User 0's block is the
    // shared base list.
    let fresh = |user: usize, rank: usize| k * user + rank;
    let base: Vec<usize> = (0..k).collect();

    let mut judgments = RelevanceJudgments::new(m);
    for item in &base {
        judgments.add(0, *item);
    }
    for user in 1..m {
        for rank in 0..k {
            judgments.add(user, fresh(user, rank));
        }
    }

    let mut steps = Vec::with_capacity(k + 1);
    for t in 0..=k {
        let mut lists = Vec::with_capacity(m);
        lists.push(base.clone());
        for user in 1..m {
            let list: Vec<usize> = (0..k)
                .map(|rank| match mode {
                    InsertionMode::LowExposureRelevant => {
                        if rank < k - t {
                            base[rank]
                        } else {
                            fresh(user, rank)
                        }
                    }
                    InsertionMode::MaxExposureIrrelevant => {
                        if rank < t {
                            base[rank]
                        } else {
                            fresh(user, rank)
                        }
                    }
                })
                .collect();
            lists.push(list);
        }
        steps.push(TopKRun::single_round(k, lists, &catalog)?);
    }
    Ok(InsertionSeries {
        catalog,
        users,
        judgments,
        k,
        mode,
        steps,
    })
}

/// One evaluated step of an insertion sweep.
#[derive(Debug, Clone)]
pub struct InsertionPoint {
    pub step: usize,
    pub inserted_fraction: f64,
    pub fairness: FairnessSummary,
    pub relevance: RelevanceSummary,
}

/// Runs the insertion experiment end to end: builds the series and scores
/// every step for fairness and relevance.
pub fn insertion_sweep(
    m: usize,
    n: usize,
    k: usize,
    mode: InsertionMode,
    params: &EvalParams,
) -> Result<Vec<InsertionPoint>> {
    let series = insertion_series(m, n, k, mode)?;
    series
        .steps
        .iter()
        .enumerate()
        .map(|(step, run)| {
            Ok(InsertionPoint {
                step,
                inserted_fraction: step as f64 / k as f64,
                fairness: evaluate_fairness(run, &series.catalog, params)?,
                relevance: evaluate_relevance(run, &series.judgments)?,
            })
        })
        .collect()
}
