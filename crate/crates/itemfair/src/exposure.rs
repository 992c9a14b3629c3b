//! Exposure bookkeeping: how often (and how prominently) each item appears
//! in a run.

use crate::error::{Error, Result};
use crate::exam::ExaminationFunction;
use crate::model::{ItemCatalog, TopKRun};

/// Per-item exposure aggregated over every (user, round) list of a run.
///
/// `counts[i]` is the number of appearances of catalog item `i`;
/// `weighted[i]` applies the examination weight of each appearance's rank.
/// Items never recommended keep explicit zero entries, because several
/// measures range over the whole catalog.
#[derive(Debug, Clone)]
pub struct ExposureTable {
    k: usize,
    user_count: usize,
    rounds: usize,
    counts: Vec<u64>,
    weighted: Vec<f64>,
}

/// Accumulates the exposure table for a run.
///
/// Accumulation iterates lists in user-major order and ranks top-down, so
/// the floating-point result is deterministic for identical inputs.
pub fn build_exposure(
    run: &TopKRun,
    catalog: &ItemCatalog,
    exam: ExaminationFunction,
) -> Result<ExposureTable> {
    let n = catalog.len();
    if run.catalog_size() != n {
        return Err(Error::invalid(format!(
            "run was validated against a catalog of {}, got one of {n}",
            run.catalog_size()
        )));
    }
    let mut counts = vec![0u64; n];
    let mut weighted = vec![0f64; n];
    for (_, _, list) in run.iter_lists() {
        for (pos, &item) in list.iter().enumerate() {
            counts[item] += 1;
            weighted[item] += exam.weight(pos + 1);
        }
    }
    Ok(ExposureTable {
        k: run.k(),
        user_count: run.user_count(),
        rounds: run.rounds(),
        counts,
        weighted,
    })
}

impl ExposureTable {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn item_count(&self) -> usize {
        self.counts.len()
    }

    /// Total recommendation slots, k * m * rounds; equals the sum of counts.
    pub fn slots(&self) -> u64 {
        self.k as u64 * self.user_count as u64 * self.rounds as u64
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn weighted(&self) -> &[f64] {
        &self.weighted
    }

    /// Number of distinct items recommended at least once.
    pub fn recommended_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Catalog indices of items recommended at least once, ascending.
    pub fn recommended(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
    }
}

/// Per-(user, item) geometric-discount exposure averaged over rounds, plus
/// the uniform-random target every comparison is made against.
///
/// Rows are stored sparsely: only items a user actually saw appear, in
/// order of first appearance (rank order within a single round). That makes
/// the divergence sums below bit-reproducible across runs that share a
/// shape, which is exactly the effect the constant-divergence property
/// tests rely on.
#[derive(Debug, Clone)]
pub struct UserItemExposure {
    user_count: usize,
    item_count: usize,
    gamma: f64,
    target: f64,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Builds the per-(user, item) exposure matrix for a run.
///
/// Each appearance of an item at rank z contributes gamma^(z-1) / rounds;
/// the target is the exposure every item would get under a uniformly random
/// policy: (1 - gamma^k) / (n * (1 - gamma)).
pub fn build_user_item_exposure(
    run: &TopKRun,
    catalog: &ItemCatalog,
    gamma: f64,
) -> Result<UserItemExposure> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!(
            "persistence parameter must lie in (0, 1), got {gamma}"
        )));
    }
    let n = catalog.len();
    if run.catalog_size() != n {
        return Err(Error::invalid(format!(
            "run was validated against a catalog of {}, got one of {n}",
            run.catalog_size()
        )));
    }
    let rounds = run.rounds() as f64;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); run.user_count()];
    for (user, _, list) in run.iter_lists() {
        let row = &mut rows[user];
        for (pos, &item) in list.iter().enumerate() {
            let share = gamma.powi(pos as i32) / rounds;
            match row.iter_mut().find(|(i, _)| *i == item) {
                Some((_, e)) => *e += share,
                None => row.push((item, share)),
            }
        }
    }
    let target = (1.0 - gamma.powi(run.k() as i32)) / (n as f64 * (1.0 - gamma));
    Ok(UserItemExposure {
        user_count: run.user_count(),
        item_count: n,
        gamma,
        target,
        rows,
    })
}

impl UserItemExposure {
    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The uniform-random exposure target shared by all (user, item) pairs.
    pub fn target(&self) -> f64 {
        self.target
    }

    /// Sparse exposure row for one user: (item index, mean exposure) pairs
    /// in first-appearance order. Items absent from the row have exposure 0.
    pub fn row(&self, user: usize) -> &[(usize, f64)] {
        &self.rows[user]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn counts_include_zero_entries() {
        let c = ItemCatalog::numbered(10);
        let run = TopKRun::single_round(3, vec![vec![0, 1, 2], vec![3, 4, 5]], &c).unwrap();
        let exp = build_exposure(&run, &c, ExaminationFunction::Uniform).unwrap();
        assert_eq!(exp.counts(), &[1, 1, 1, 1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(exp.recommended_count(), 6);
        assert_eq!(exp.counts().iter().sum::<u64>(), exp.slots());
    }

    #[test]
    fn uniform_weights_equal_counts() {
        let c = ItemCatalog::numbered(4);
        let run = TopKRun::single_round(2, vec![vec![0, 1], vec![0, 2]], &c).unwrap();
        let exp = build_exposure(&run, &c, ExaminationFunction::Uniform).unwrap();
        for (i, &count) in exp.counts().iter().enumerate() {
            assert_eq!(exp.weighted()[i], count as f64);
        }
    }

    #[test]
    fn log_discount_weights_by_rank() {
        let c = ItemCatalog::numbered(2);
        let run = TopKRun::single_round(2, vec![vec![0, 1]], &c).unwrap();
        let exp = build_exposure(&run, &c, ExaminationFunction::Dcg).unwrap();
        assert_eq!(exp.weighted()[0], 1.0);
        assert_relative_eq!(exp.weighted()[1], 1.0 / 3f64.log2(), max_relative = 1e-15);
    }

    #[test]
    fn catalog_mismatch_is_rejected() {
        let c = ItemCatalog::numbered(3);
        let run = TopKRun::single_round(1, vec![vec![0]], &c).unwrap();
        let other = ItemCatalog::numbered(4);
        assert!(build_exposure(&run, &other, ExaminationFunction::Uniform).is_err());
        assert!(build_user_item_exposure(&run, &other, 0.8).is_err());
    }

    #[test]
    fn user_item_exposure_single_round() {
        let c = ItemCatalog::numbered(3);
        let run = TopKRun::single_round(1, vec![vec![1], vec![1]], &c).unwrap();
        let uie = build_user_item_exposure(&run, &c, 0.8).unwrap();
        assert_relative_eq!(uie.target(), 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(uie.row(0), &[(1, 1.0)]);
        assert_eq!(uie.row(1), &[(1, 1.0)]);
    }

    #[test]
    fn user_item_exposure_averages_rounds() {
        let c = ItemCatalog::numbered(2);
        // Item 0 at rank 1 in round 1, absent in round 2: mean exposure 0.5.
        let run = TopKRun::from_lists(1, 1, 2, vec![vec![0], vec![1]], &c).unwrap();
        let uie = build_user_item_exposure(&run, &c, 0.8).unwrap();
        assert_eq!(uie.row(0), &[(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn lastfm_shape_target_matches_arithmetic() {
        let c = ItemCatalog::numbered(2823);
        let lists = vec![(0..10).collect::<Vec<_>>()];
        let run = TopKRun::single_round(10, lists, &c).unwrap();
        let uie = build_user_item_exposure(&run, &c, 0.8).unwrap();
        let expected = (1.0 - 0.8f64.powi(10)) / (2823.0 * 0.2);
        assert_relative_eq!(uie.target(), expected, max_relative = 1e-15);
        assert!((uie.target() - 1.581e-3).abs() < 1e-6);
    }

    #[test]
    fn persistence_parameter_validated() {
        let c = ItemCatalog::numbered(2);
        let run = TopKRun::single_round(1, vec![vec![0]], &c).unwrap();
        assert!(build_user_item_exposure(&run, &c, 1.0).is_err());
        assert!(build_user_item_exposure(&run, &c, 0.0).is_err());
    }
}
