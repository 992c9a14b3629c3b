//! Core data model: item catalog, user set, top-k runs, and relevance
//! judgments.
//!
//! Runs store catalog indices rather than id strings, so every measure works
//! on dense integer data. Id resolution happens once, at construction or
//! parse time.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// An ordered collection of unique id strings with O(1) lookup.
#[derive(Debug, Clone)]
struct IndexedIds {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IndexedIds {
    fn new(ids: Vec<String>, what: &str) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::invalid(format!("{what} set must not be empty")));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (pos, id) in ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::invalid(format!("empty {what} id at position {pos}")));
            }
            if index.insert(id.clone(), pos).is_some() {
                return Err(Error::invalid(format!("duplicate {what} id {id:?}")));
            }
        }
        Ok(IndexedIds { ids, index })
    }

    fn numbered(prefix: &str, count: usize) -> Self {
        let ids = (1..=count).map(|i| format!("{prefix}{i}")).collect();
        IndexedIds::new(ids, prefix).expect("generated ids are unique and non-empty")
    }
}

/// The full item universe, including items never recommended by any run.
///
/// Its size `n` is a denominator in most fairness measures, so the catalog
/// must list everything, not just items observed in a run.
#[derive(Debug, Clone)]
pub struct ItemCatalog(IndexedIds);

impl ItemCatalog {
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        IndexedIds::new(ids.into_iter().map(Into::into).collect(), "item").map(ItemCatalog)
    }

    /// A synthetic catalog `i1, i2, ..., i<count>`, used by generators and
    /// the enumeration oracle.
    pub fn numbered(count: usize) -> Self {
        ItemCatalog(IndexedIds::numbered("i", count))
    }

    pub fn len(&self) -> usize {
        self.0.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.ids.is_empty()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.0.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.0.index.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.ids.iter().map(String::as_str)
    }
}

/// The users a run covers, in a deterministic order.
#[derive(Debug, Clone)]
pub struct UserSet(IndexedIds);

impl UserSet {
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        IndexedIds::new(ids.into_iter().map(Into::into).collect(), "user").map(UserSet)
    }

    /// A synthetic user set `u1, u2, ..., u<count>`.
    pub fn numbered(count: usize) -> Self {
        UserSet(IndexedIds::numbered("u", count))
    }

    pub fn len(&self) -> usize {
        self.0.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.ids.is_empty()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.0.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.0.index.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.ids.iter().map(String::as_str)
    }
}

/// A validated top-k recommendation run: one ordered list of `k` distinct
/// catalog indices per (user, round).
///
/// Lists are stored flat, indexed by `user * rounds + round`. The catalog
/// size is captured at construction so downstream code can detect a
/// mismatched catalog being passed later.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKRun {
    k: usize,
    user_count: usize,
    rounds: usize,
    catalog_size: usize,
    lists: Vec<Vec<usize>>,
}

impl TopKRun {
    /// Builds a multi-round run from per-(user, round) lists of catalog
    /// indices. `lists[user * rounds + round]` holds the list for that pair,
    /// ordered by rank.
    pub fn from_lists(
        k: usize,
        user_count: usize,
        rounds: usize,
        lists: Vec<Vec<usize>>,
        catalog: &ItemCatalog,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("cutoff k must be at least 1"));
        }
        if user_count == 0 {
            return Err(Error::invalid("a run needs at least one user"));
        }
        if rounds == 0 {
            return Err(Error::invalid("a run needs at least one round"));
        }
        if lists.len() != user_count * rounds {
            return Err(Error::invalid(format!(
                "expected {} lists ({} users x {} rounds), got {}",
                user_count * rounds,
                user_count,
                rounds,
                lists.len()
            )));
        }
        let n = catalog.len();
        let mut seen = HashSet::with_capacity(k);
        for (flat, list) in lists.iter().enumerate() {
            let (user, round) = (flat / rounds, flat % rounds);
            if list.len() != k {
                return Err(Error::invalid(format!(
                    "user {} round {} has {} items, expected k = {}",
                    user + 1,
                    round + 1,
                    list.len(),
                    k
                )));
            }
            seen.clear();
            for &item in list {
                if item >= n {
                    return Err(Error::invalid(format!(
                        "item index {item} out of range for catalog of {n}"
                    )));
                }
                if !seen.insert(item) {
                    return Err(Error::invalid(format!(
                        "user {} round {} recommends {:?} more than once",
                        user + 1,
                        round + 1,
                        catalog.id(item)
                    )));
                }
            }
        }
        Ok(TopKRun {
            k,
            user_count,
            rounds,
            catalog_size: n,
            lists,
        })
    }

    /// Convenience constructor for the common single-round case, with one
    /// list per user.
    pub fn single_round(k: usize, lists: Vec<Vec<usize>>, catalog: &ItemCatalog) -> Result<Self> {
        let user_count = lists.len();
        TopKRun::from_lists(k, user_count, 1, lists, catalog)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Size of the catalog this run was validated against.
    pub fn catalog_size(&self) -> usize {
        self.catalog_size
    }

    /// Total recommendation slots, k * m * rounds.
    pub fn slots(&self) -> u64 {
        self.k as u64 * self.user_count as u64 * self.rounds as u64
    }

    /// The ranked list for one (user, round), 0-based on both.
    pub fn list(&self, user: usize, round: usize) -> &[usize] {
        &self.lists[user * self.rounds + round]
    }

    /// All lists with their (user, round) coordinates, in user-major order.
    pub fn iter_lists(&self) -> impl Iterator<Item = (usize, usize, &[usize])> {
        self.lists
            .iter()
            .enumerate()
            .map(move |(flat, list)| (flat / self.rounds, flat % self.rounds, list.as_slice()))
    }

    /// A new run keeping only ranks `start ..= start + width - 1` of every
    /// list (`start` is 1-based), re-ranked from 1. Slices of valid lists
    /// stay valid, so no catalog is needed.
    pub fn rank_window(&self, start: usize, width: usize) -> Result<TopKRun> {
        if start == 0 || width == 0 {
            return Err(Error::invalid("window start and width must be at least 1"));
        }
        let end = start + width - 1;
        if end > self.k {
            return Err(Error::invalid(format!(
                "window [{start}, {end}] exceeds the run depth k = {}",
                self.k
            )));
        }
        let lists = self
            .lists
            .iter()
            .map(|list| list[start - 1..end].to_vec())
            .collect();
        Ok(TopKRun {
            k: width,
            user_count: self.user_count,
            rounds: self.rounds,
            catalog_size: self.catalog_size,
            lists,
        })
    }
}

/// Binary relevance judgments: which items each user considers relevant.
/// Absent pairs mean "not relevant".
#[derive(Debug, Clone)]
pub struct RelevanceJudgments {
    per_user: Vec<HashSet<usize>>,
}

impl RelevanceJudgments {
    pub fn new(user_count: usize) -> Self {
        RelevanceJudgments {
            per_user: vec![HashSet::new(); user_count],
        }
    }

    /// Builds judgments from (user index, item index) pairs, validating
    /// bounds against the given user set and catalog.
    pub fn from_pairs<I>(users: &UserSet, catalog: &ItemCatalog, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut judgments = RelevanceJudgments::new(users.len());
        for (user, item) in pairs {
            if user >= users.len() {
                return Err(Error::invalid(format!(
                    "user index {user} out of range for {} users",
                    users.len()
                )));
            }
            if item >= catalog.len() {
                return Err(Error::invalid(format!(
                    "item index {item} out of range for catalog of {}",
                    catalog.len()
                )));
            }
            judgments.per_user[user].insert(item);
        }
        Ok(judgments)
    }

    /// Marks (user, item) as relevant. Indices are trusted here; use
    /// [`RelevanceJudgments::from_pairs`] for validated construction.
    pub fn add(&mut self, user: usize, item: usize) {
        self.per_user[user].insert(item);
    }

    pub fn user_count(&self) -> usize {
        self.per_user.len()
    }

    pub fn is_relevant(&self, user: usize, item: usize) -> bool {
        self.per_user[user].contains(&item)
    }

    pub fn relevant_count(&self, user: usize) -> usize {
        self.per_user[user].len()
    }
}
