//! Closed-form most-fair / most-unfair scores achievable at a given
//! (k, m, n) shape, and the corrected measures that min-max normalize the
//! originals between those two endpoints.
//!
//! The bounds come from the structure of a valid run: every one of the m
//! lists holds exactly k distinct items, so the most even count histogram
//! puts floor(km/n) or floor(km/n)+1 appearances on every item, and the
//! most concentrated one puts m appearances on the same k items. Each bound
//! is verified against the brute-force oracle in the test suites.
//!
//! Multi-round runs have the same combinatorial structure with m * rounds
//! lists, so callers evaluating a multi-round run should pass that product
//! as `m`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exposure::ExposureTable;
use crate::measures::Direction;

/// Min-max normalization of `x` between two achievable endpoints.
///
/// Errors when the endpoints coincide, which happens exactly for the shapes
/// where every run scores the same (most prominently k = n). The result is
/// deliberately not clamped: it must stay an affine map of the original so
/// corrected scores rank runs exactly as the original does, and a score
/// outside [0, 1] is a signal that the nominal endpoint is not attainable
/// at this shape.
pub fn normalize(x: f64, lo: f64, hi: f64) -> Result<f64> {
    if hi == lo {
        return Err(Error::degenerate(format!("both endpoints equal {lo}")));
    }
    Ok((x - lo) / (hi - lo))
}

fn shape_context(measure: &str, k: usize, m: usize, n: usize) -> String {
    format!("{measure} at k={k}, m={m}, n={n}")
}

/// Jain index of the most concentrated run: the same k items in every list.
pub fn jain_most_unfair(k: usize, n: usize) -> f64 {
    k as f64 / n as f64
}

/// Jain index of the most even run achievable at this shape.
///
/// With q = floor(km/n) and r = km mod n, the most even histogram has r
/// items at q+1 and n-r items at q, giving (km)^2 / (n(nq^2 + r(2q+1))).
/// Reduces to km/n when km < n and to 1 when n divides km.
pub fn jain_most_fair(k: usize, m: usize, n: usize) -> f64 {
    let slots = (k * m) as u128;
    let n = n as u128;
    let q = slots / n;
    let r = slots % n;
    let sum_sq = n * q * q + r * (2 * q + 1);
    (slots * slots) as f64 / (n * sum_sq) as f64
}

/// Corrected Jain index: 0 at the most concentrated run, 1 at the most
/// even achievable one.
pub fn corrected_jain(jain: f64, k: usize, m: usize, n: usize) -> Result<f64> {
    normalize(jain, jain_most_unfair(k, n), jain_most_fair(k, m, n))
        .map_err(|_| Error::degenerate(shape_context("jain", k, m, n)))
}

/// Smallest achievable coverage: one list's worth of items, k of n.
pub fn coverage_most_unfair(k: usize, n: usize) -> f64 {
    k as f64 / n as f64
}

/// Largest achievable coverage: all n items once km >= n, otherwise km
/// distinct items.
pub fn coverage_most_fair(k: usize, m: usize, n: usize) -> f64 {
    ((k * m).min(n)) as f64 / n as f64
}

/// Corrected coverage, normalized by recommended-item counts: from k items
/// (every list identical) up to min(km, n).
pub fn corrected_coverage(recommended: usize, k: usize, m: usize, n: usize) -> Result<f64> {
    normalize(recommended as f64, k as f64, (k * m).min(n) as f64)
        .map_err(|_| Error::degenerate(shape_context("qf", k, m, n)))
}

/// Entropy (natural log) of the count distribution restricted to
/// recommended items only. Always finite for a valid run, unlike the
/// whole-catalog entropy, which is undefined as soon as one item has count
/// zero.
pub fn recommended_entropy_nats(exposure: &ExposureTable) -> f64 {
    let slots = exposure.slots() as f64;
    exposure
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / slots;
            -p * p.ln()
        })
        .sum()
}

/// Entropy (natural log) of the most concentrated run: k items sharing the
/// slots evenly, so ln k.
pub fn entropy_most_unfair_nats(k: usize) -> f64 {
    (k as f64).ln()
}

/// Entropy (natural log) of the most even achievable count histogram,
/// q = floor(km/n) and r = km mod n items as in [`jain_most_fair`]:
/// -(n-r) * (q/km) ln(q/km) - r * ((q+1)/km) ln((q+1)/km).
/// Reduces to ln(km) when km < n and ln(n) when n divides km.
pub fn entropy_most_fair_nats(k: usize, m: usize, n: usize) -> f64 {
    let slots = (k * m) as f64;
    let q = (k * m / n) as f64;
    let r = (k * m % n) as f64;
    let mut nats = 0.0;
    if q > 0.0 {
        let p = q / slots;
        nats -= (n as f64 - r) * p * p.ln();
    }
    if r > 0.0 {
        let p = (q + 1.0) / slots;
        nats -= r * p * p.ln();
    }
    nats
}

/// [`entropy_most_unfair_nats`] converted to an arbitrary base.
pub fn entropy_most_unfair(k: usize, log_base: f64) -> f64 {
    convert_base(entropy_most_unfair_nats(k), log_base)
}

/// [`entropy_most_fair_nats`] converted to an arbitrary base.
pub fn entropy_most_fair(k: usize, m: usize, n: usize, log_base: f64) -> f64 {
    convert_base(entropy_most_fair_nats(k, m, n), log_base)
}

fn convert_base(nats: f64, log_base: f64) -> f64 {
    assert!(
        log_base > 0.0 && log_base != 1.0,
        "logarithm base must be positive and not 1, got {log_base}"
    );
    if nats == 0.0 {
        0.0
    } else {
        nats / log_base.ln()
    }
}

/// Corrected entropy, computed from the recommended-items entropy so it
/// stays finite even where the whole-catalog entropy is undefined. The
/// normalization is a ratio of same-base logarithms, so the result is
/// independent of the base.
pub fn corrected_entropy(
    recommended_entropy_nats: f64,
    k: usize,
    m: usize,
    n: usize,
) -> Result<f64> {
    normalize(
        recommended_entropy_nats,
        entropy_most_unfair_nats(k),
        entropy_most_fair_nats(k, m, n),
    )
    .map_err(|_| Error::degenerate(shape_context("ent", k, m, n)))
}

/// Gini of the most concentrated run: k items at count m, the rest at zero.
pub fn gini_most_unfair(k: usize, n: usize) -> f64 {
    1.0 - k as f64 / n as f64
}

/// Gini of the most even achievable count histogram, with r = km mod n
/// items one count above the rest: (n - r) * r / (kmn). Zero exactly when n
/// divides km.
pub fn gini_most_fair(k: usize, m: usize, n: usize) -> f64 {
    let r = (k * m % n) as f64;
    (n as f64 - r) * r / ((k * m * n) as f64)
}

/// Corrected Gini: 0 at the most even achievable run, 1 at the most
/// concentrated one. Still lower-is-fairer.
pub fn corrected_gini(gini: f64, k: usize, m: usize, n: usize) -> Result<f64> {
    normalize(gini, gini_most_fair(k, m, n), gini_most_unfair(k, n))
        .map_err(|_| Error::degenerate(shape_context("gini", k, m, n)))
}

fn rank_weight(rank: usize) -> f64 {
    // log_{rank+1}(2), the log-discount weight of that rank.
    2f64.ln() / ((rank + 1) as f64).ln()
}

/// Rank-weighted Gini of the most even run, available in closed form only
/// while km <= n: each rank's weight goes to m distinct items and all km
/// recommended items are distinct.
///
/// The ascending order of the weighted exposures is then: n - km zeros,
/// m items at the rank-k weight, m at rank k-1, and so on up to rank 1.
pub fn weighted_gini_most_fair(k: usize, m: usize, n: usize) -> Result<f64> {
    if k * m > n {
        return Err(Error::invalid(format!(
            "no closed-form most-fair rank-weighted Gini when km > n (k={k}, m={m}, n={n})"
        )));
    }
    let total_weight: f64 = (1..=k).map(rank_weight).sum();
    let mut numerator = 0.0;
    for rank in 1..=k {
        // Items carrying the rank-`rank` weight occupy ascending positions
        // n - rank*m + 1 ..= n - rank*m + m.
        let base = n - rank * m;
        for offset in 1..=m {
            let position = (base + offset) as f64;
            numerator += (2.0 * position - n as f64 - 1.0) * rank_weight(rank);
        }
    }
    Ok(numerator / ((m * n) as f64 * total_weight))
}

/// Rank-weighted Gini of the most concentrated run: the same k items in
/// the same order in every list, so item at rank r carries m times the
/// rank-r weight and the other n - k items carry zero.
pub fn weighted_gini_most_unfair(k: usize, n: usize) -> f64 {
    let total_weight: f64 = (1..=k).map(rank_weight).sum();
    let numerator: f64 = (1..=k)
        .map(|rank| (n as f64 - 2.0 * rank as f64 + 1.0) * rank_weight(rank))
        .sum();
    numerator / (n as f64 * total_weight)
}

/// Corrected rank-weighted Gini. While km <= n this is a full min-max
/// normalization; beyond that no closed-form most-fair score exists, so the
/// value is divided by the most-unfair score only and 0 becomes
/// unreachable.
pub fn corrected_weighted_gini(value: f64, k: usize, m: usize, n: usize) -> Result<f64> {
    let hi = weighted_gini_most_unfair(k, n);
    if k * m <= n {
        let lo = weighted_gini_most_fair(k, m, n)?;
        normalize(value, lo, hi).map_err(|_| Error::degenerate(shape_context("gini_w", k, m, n)))
    } else {
        if hi == 0.0 {
            return Err(Error::degenerate(shape_context("gini_w", k, m, n)));
        }
        Ok(value / hi)
    }
}

/// Satisfaction fraction of the most concentrated run. When km < n the
/// even-split share is zero and every run scores 1; otherwise only the k
/// repeated items reach the share.
pub fn satisfaction_most_unfair(k: usize, m: usize, n: usize) -> f64 {
    if k * m < n {
        1.0
    } else {
        k as f64 / n as f64
    }
}

/// Corrected satisfaction fraction, normalized between k/n and 1.
///
/// The k/n endpoint is the nominal most-unfair score; for km < n shapes it
/// is unreachable (every run scores 1, so the corrected value is 1 too).
pub fn corrected_satisfaction(value: f64, k: usize, n: usize) -> Result<f64> {
    normalize(value, k as f64 / n as f64, 1.0)
        .map_err(|_| Error::degenerate(format!("fsat at k={k}, n={n}")))
}

/// Proven ceiling for the coverage-disparity violation: (m-1)/m - beta,
/// reached by a single similar pair recommended once and m times. No run
/// and no similarity set can exceed it.
pub fn disparity_violation_ceiling(m: usize, beta: f64) -> f64 {
    (m as f64 - 1.0) / m as f64 - beta
}

/// One row of a bounds table: the achievable extremes for one measure at a
/// fixed shape. `None` endpoints mean no closed form exists for that side.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub measure: String,
    pub direction: Direction,
    pub most_unfair: Option<f64>,
    pub most_fair: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Closed-form bounds for every measure that has them, at one shape.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub log_base: f64,
    pub beta: f64,
    pub rows: Vec<BoundsRow>,
}

/// Builds the bounds table for a shape. `log_base` scales the entropy rows
/// and `beta` enters the disparity ceiling.
pub fn bounds_report(
    k: usize,
    m: usize,
    n: usize,
    log_base: f64,
    beta: f64,
) -> Result<BoundsReport> {
    if k == 0 || m == 0 || n == 0 {
        return Err(Error::invalid("k, m, and n must all be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "cutoff k={k} cannot exceed catalog size n={n}"
        )));
    }
    if !(log_base > 0.0 && log_base != 1.0) {
        return Err(Error::invalid(format!(
            "logarithm base must be positive and not 1, got {log_base}"
        )));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid(format!(
            "disparity tolerance must lie in [0, 1), got {beta}"
        )));
    }
    let km_under_n = k * m < n;
    let mut rows = vec![
        BoundsRow {
            measure: "jain".into(),
            direction: Direction::HigherIsFairer,
            most_unfair: Some(jain_most_unfair(k, n)),
            most_fair: Some(jain_most_fair(k, m, n)),
            note: None,
        },
        BoundsRow {
            measure: "qf".into(),
            direction: Direction::HigherIsFairer,
            most_unfair: Some(coverage_most_unfair(k, n)),
            most_fair: Some(coverage_most_fair(k, m, n)),
            note: None,
        },
        BoundsRow {
            measure: "ent".into(),
            direction: Direction::HigherIsFairer,
            most_unfair: Some(entropy_most_unfair(k, log_base)),
            most_fair: Some(entropy_most_fair(k, m, n, log_base)),
            note: None,
        },
        BoundsRow {
            measure: "gini".into(),
            direction: Direction::LowerIsFairer,
            most_unfair: Some(gini_most_unfair(k, n)),
            most_fair: Some(gini_most_fair(k, m, n)),
            note: None,
        },
        BoundsRow {
            measure: "gini_w".into(),
            direction: Direction::LowerIsFairer,
            most_unfair: Some(weighted_gini_most_unfair(k, n)),
            most_fair: weighted_gini_most_fair(k, m, n).ok(),
            note: if k * m > n {
                Some("no closed-form most-fair score when km > n".into())
            } else {
                None
            },
        },
        BoundsRow {
            measure: "fsat".into(),
            direction: Direction::HigherIsFairer,
            most_unfair: Some(satisfaction_most_unfair(k, m, n)),
            most_fair: Some(1.0),
            note: if km_under_n {
                Some("km < n: every run scores 1".into())
            } else {
                None
            },
        },
        BoundsRow {
            measure: "vocd".into(),
            direction: Direction::LowerIsFairer,
            most_unfair: Some(disparity_violation_ceiling(m, beta)),
            most_fair: Some(0.0),
            note: Some("most-unfair side is a ceiling; attainability depends on similarity".into()),
        },
    ];
    for row in &mut rows {
        if let (Some(a), Some(b)) = (row.most_unfair, row.most_fair) {
            if a == b && row.note.is_none() {
                row.note = Some("endpoints coincide: normalization degenerate".into());
            }
        }
    }
    Ok(BoundsReport {
        k,
        m,
        n,
        log_base,
        beta,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exam::ExaminationFunction;
    use crate::exposure::build_exposure;
    use crate::model::{ItemCatalog, TopKRun};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn normalize_basics() {
        assert_eq!(normalize(0.5, 0.0, 1.0).unwrap(), 0.5);
        assert_eq!(normalize(0.3, 0.3, 0.6).unwrap(), 0.0);
        assert_eq!(normalize(0.6, 0.3, 0.6).unwrap(), 1.0);
        assert!(matches!(
            normalize(1.0, 1.0, 1.0),
            Err(Error::DegenerateNormalization { .. })
        ));
    }

    #[test]
    fn jain_bound_closed_forms() {
        assert_relative_eq!(jain_most_fair(2, 2, 3), 16.0 / 18.0, max_relative = 1e-15);
        // n divides km: perfectly even counts are achievable.
        assert_eq!(jain_most_fair(2, 3, 3), 1.0);
        // km < n: the bound collapses to km/n.
        assert_relative_eq!(jain_most_fair(3, 2, 10), 0.6, max_relative = 1e-15);
    }

    #[test]
    fn corrected_jain_hits_endpoints() {
        assert_abs_diff_eq!(
            corrected_jain(jain_most_unfair(2, 3), 2, 2, 3).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            corrected_jain(jain_most_fair(2, 2, 3), 2, 2, 3).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        // km < n: a run with km distinct items reaches the top.
        assert_abs_diff_eq!(corrected_jain(0.6, 3, 2, 10).unwrap(), 1.0, epsilon = 1e-15);
        // k = n: every run has the same Jain value.
        assert!(matches!(
            corrected_jain(1.0, 3, 2, 3),
            Err(Error::DegenerateNormalization { .. })
        ));
    }

    #[test]
    fn corrected_coverage_branches() {
        // Worst case: every list identical.
        assert_eq!(corrected_coverage(2, 2, 3, 3).unwrap(), 0.0);
        // km >= n with full coverage.
        assert_eq!(corrected_coverage(3, 2, 3, 3).unwrap(), 1.0);
        // km < n with all distinct items: (km - k) / (k(m - 1)).
        assert_eq!(corrected_coverage(6, 3, 2, 10).unwrap(), 1.0);
        assert_eq!(corrected_coverage(4, 3, 2, 10).unwrap(), 1.0 / 3.0);
        // Single user with km < n: only one coverage value exists.
        assert!(corrected_coverage(3, 3, 1, 10).is_err());
    }

    #[test]
    fn entropy_bounds_match_hand_arithmetic() {
        // Counts (2, 1, 1) over 4 slots in base 2: 1.5 bits.
        assert_relative_eq!(entropy_most_fair(2, 2, 3, 2.0), 1.5, max_relative = 1e-12);
        assert_relative_eq!(entropy_most_unfair(2, 2.0), 1.0, max_relative = 1e-12);
        // km < n: ln(km).
        assert_relative_eq!(
            entropy_most_fair_nats(3, 2, 10),
            6f64.ln(),
            max_relative = 1e-12
        );
        // n divides km: ln(n).
        assert_relative_eq!(
            entropy_most_fair_nats(2, 3, 3),
            3f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn corrected_entropy_is_base_free_and_bounded() {
        let catalog = ItemCatalog::numbered(3);
        let run = TopKRun::single_round(2, vec![vec![0, 1], vec![0, 2]], &catalog).unwrap();
        let exposure = build_exposure(&run, &catalog, ExaminationFunction::Uniform).unwrap();
        let nats = recommended_entropy_nats(&exposure);
        let corrected = corrected_entropy(nats, 2, 2, 3).unwrap();
        assert!((0.0..=1.0).contains(&corrected));
        // Same computation scaled to another base cancels out: feeding
        // base-agnostic nats is all that is ever needed.
        let counts_check = -(0.5f64 * 0.5f64.ln() + 2.0 * 0.25 * 0.25f64.ln());
        assert_relative_eq!(nats, counts_check, max_relative = 1e-12);
    }

    #[test]
    fn gini_bound_closed_forms() {
        assert_relative_eq!(gini_most_fair(2, 2, 3), 1.0 / 6.0, max_relative = 1e-15);
        assert_eq!(gini_most_fair(2, 3, 3), 0.0);
        assert_relative_eq!(gini_most_unfair(2, 3), 1.0 / 3.0, max_relative = 1e-15);
        assert_abs_diff_eq!(
            corrected_gini(gini_most_unfair(2, 3), 2, 2, 3).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            corrected_gini(gini_most_fair(2, 2, 3), 2, 2, 3).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn weighted_gini_bounds() {
        // Two single-item lists on a 3-item catalog: ascending exposures
        // (0, 1, 1) give 1/3.
        assert_relative_eq!(
            weighted_gini_most_fair(1, 2, 3).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-12
        );
        assert!(weighted_gini_most_fair(2, 2, 3).is_err());
        assert_relative_eq!(
            weighted_gini_most_unfair(3, 3),
            0.1564262420075855,
            max_relative = 1e-9
        );
    }

    #[test]
    fn corrected_weighted_gini_branches() {
        // km <= n: full normalization.
        let lo = weighted_gini_most_fair(1, 2, 3).unwrap();
        let hi = weighted_gini_most_unfair(1, 3);
        assert_abs_diff_eq!(
            corrected_weighted_gini(lo, 1, 2, 3).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            corrected_weighted_gini(hi, 1, 2, 3).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // km > n: scaled by the most-unfair score only.
        let hi = weighted_gini_most_unfair(2, 3);
        assert_abs_diff_eq!(
            corrected_weighted_gini(hi, 2, 2, 3).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(corrected_weighted_gini(hi / 2.0, 2, 2, 3).unwrap() > 0.0);
        // km <= n with m = 1: single achievable value.
        assert!(corrected_weighted_gini(0.5, 2, 1, 4).is_err());
    }

    #[test]
    fn satisfaction_correction() {
        assert_eq!(corrected_satisfaction(2.0 / 3.0, 2, 3).unwrap(), 0.0);
        assert_eq!(corrected_satisfaction(1.0, 2, 3).unwrap(), 1.0);
        assert_relative_eq!(
            corrected_satisfaction(5.0 / 6.0, 1, 6).unwrap(),
            0.8,
            max_relative = 1e-12
        );
        assert!(corrected_satisfaction(1.0, 3, 3).is_err());
        assert_eq!(satisfaction_most_unfair(2, 1, 5), 1.0);
        assert_relative_eq!(
            satisfaction_most_unfair(2, 3, 3),
            2.0 / 3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn disparity_ceiling_values() {
        assert_relative_eq!(
            disparity_violation_ceiling(3, 0.0),
            2.0 / 3.0,
            max_relative = 1e-15
        );
        assert!(disparity_violation_ceiling(1, 0.1) <= 0.0);
        assert_relative_eq!(
            disparity_violation_ceiling(4, 0.25),
            0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn bounds_report_rows_and_validation() {
        let report = bounds_report(10, 1859, 2823, 2823.0, 0.0).unwrap();
        let ids: Vec<&str> = report.rows.iter().map(|r| r.measure.as_str()).collect();
        assert_eq!(ids, ["jain", "qf", "ent", "gini", "gini_w", "fsat", "vocd"]);
        let giniw = report.rows.iter().find(|r| r.measure == "gini_w").unwrap();
        assert!(giniw.most_fair.is_none());
        assert!(giniw.note.is_some());
        assert!(bounds_report(5, 2, 4, 4.0, 0.0).is_err());
        assert!(bounds_report(2, 2, 4, 1.0, 0.0).is_err());
        assert!(bounds_report(2, 2, 4, 4.0, 1.0).is_err());
    }
}
