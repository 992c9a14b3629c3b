//! Rank agreement between measures: Kendall's tau over system scores,
//! significance, and multiple-testing corrections.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::measures::Direction;

fn oriented(value: f64, direction: Direction) -> f64 {
    match direction {
        Direction::HigherIsFairer => value,
        Direction::LowerIsFairer => -value,
    }
}

/// Tie-adjusted Kendall's tau (the tau-b variant) between two score lists.
///
/// Each list is oriented by its direction first, so a lower-is-fairer
/// measure that orders systems the same way as a higher-is-fairer one
/// correlates at +1, not -1.
///
/// Errors when either list is entirely tied: the ranking carries no
/// information and tau is undefined.
pub fn kendall_tau(
    a: &[f64],
    a_direction: Direction,
    b: &[f64],
    b_direction: Direction,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "score lists differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid("need at least two systems to correlate"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "score lists must be finite; drop undefined measures first",
        ));
    }
    let n = a.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut tied_a = 0i64;
    let mut tied_b = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let da = oriented(a[j], a_direction) - oriented(a[i], a_direction);
            let db = oriented(b[j], b_direction) - oriented(b[i], b_direction);
            if da == 0.0 {
                tied_a += 1;
            }
            if db == 0.0 {
                tied_b += 1;
            }
            if da == 0.0 || db == 0.0 {
                continue;
            }
            if (da > 0.0) == (db > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    if tied_a == pairs || tied_b == pairs {
        return Err(Error::CorrelationUndefined(
            "a score list is entirely tied".into(),
        ));
    }
    let denominator = (((pairs - tied_a) as f64) * ((pairs - tied_b) as f64)).sqrt();
    Ok((concordant - discordant) as f64 / denominator)
}

/// Number of permutations of `n` elements with each possible inversion
/// count, built by the classic convolution recurrence. Sums to n!.
fn inversion_counts(n: usize) -> Vec<f64> {
    let mut counts = vec![1.0f64];
    for width in 2..=n {
        let len = counts.len() + width - 1;
        let mut next = vec![0.0; len];
        let mut window = 0.0;
        for j in 0..len {
            if j < counts.len() {
                window += counts[j];
            }
            if j >= width {
                window -= counts[j - width];
            }
            next[j] = window;
        }
        counts = next;
    }
    counts
}

/// Longest list for which the tau null distribution is enumerated exactly.
pub const EXACT_PVALUE_MAX_LEN: usize = 8;

/// Two-sided p-value for an observed Kendall's tau over `len` systems
/// under the null of a uniformly random ranking.
///
/// For `len` up to [`EXACT_PVALUE_MAX_LEN`] the permutation null is
/// enumerated exactly; beyond that the usual normal approximation of the
/// tau statistic is used.
pub fn tau_pvalue(tau: f64, len: usize) -> Result<f64> {
    if len < 2 {
        return Err(Error::invalid("need at least two systems for a p-value"));
    }
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::invalid(format!(
            "tau must lie in [-1, 1], got {tau}"
        )));
    }
    let pairs = (len * (len - 1) / 2) as i64;
    if len <= EXACT_PVALUE_MAX_LEN {
        // S = concordant - discordant = pairs - 2 * inversions under the
        // null, so tail mass comes straight off the inversion counts.
        let observed = (tau * pairs as f64).round().abs() as i64;
        let counts = inversion_counts(len);
        let total: f64 = counts.iter().sum();
        let extreme: f64 = counts
            .iter()
            .enumerate()
            .filter(|(j, _)| (pairs - 2 * *j as i64).abs() >= observed)
            .map(|(_, c)| c)
            .sum();
        Ok(extreme / total)
    } else {
        let n = len as f64;
        let z = 3.0 * tau * (n * (n - 1.0)).sqrt() / (2.0 * (2.0 * n + 5.0)).sqrt();
        Ok(erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0))
    }
}

/// How a family of p-values is adjusted before flagging significance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMethod {
    BenjaminiHochberg,
    Bonferroni,
    Holm,
}

fn sorted_order(pvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&i, &j| pvalues[i].total_cmp(&pvalues[j]));
    order
}

/// Benjamini-Hochberg step-up: find the largest rank i with
/// p_(i) <= (i / M) * alpha and flag everything at or below it.
pub fn benjamini_hochberg(pvalues: &[f64], alpha: f64) -> Vec<bool> {
    let m = pvalues.len();
    let order = sorted_order(pvalues);
    let mut cutoff_rank = 0;
    for (rank, &idx) in order.iter().enumerate() {
        if pvalues[idx] <= (rank + 1) as f64 * alpha / m as f64 {
            cutoff_rank = rank + 1;
        }
    }
    let mut flags = vec![false; m];
    for &idx in order.iter().take(cutoff_rank) {
        flags[idx] = true;
    }
    flags
}

/// Bonferroni: flag p <= alpha / M.
pub fn bonferroni(pvalues: &[f64], alpha: f64) -> Vec<bool> {
    let m = pvalues.len() as f64;
    pvalues.iter().map(|&p| p <= alpha / m).collect()
}

/// Holm step-down: walk the sorted p-values, rejecting while
/// p_(i) <= alpha / (M - i + 1), and stop at the first failure.
pub fn holm(pvalues: &[f64], alpha: f64) -> Vec<bool> {
    let m = pvalues.len();
    let order = sorted_order(pvalues);
    let mut flags = vec![false; m];
    for (rank, &idx) in order.iter().enumerate() {
        if pvalues[idx] <= alpha / (m - rank) as f64 {
            flags[idx] = true;
        } else {
            break;
        }
    }
    flags
}

fn apply_correction(pvalues: &[f64], alpha: f64, method: CorrectionMethod) -> Vec<bool> {
    match method {
        CorrectionMethod::BenjaminiHochberg => benjamini_hochberg(pvalues, alpha),
        CorrectionMethod::Bonferroni => bonferroni(pvalues, alpha),
        CorrectionMethod::Holm => holm(pvalues, alpha),
    }
}

/// One measure's scores across a fixed set of systems.
#[derive(Debug, Clone)]
pub struct ScoreRow {
    pub measure: String,
    pub direction: Direction,
    pub values: Vec<f64>,
}

/// Scores of several measures over the same systems: rows are measures,
/// columns are systems.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    systems: Vec<String>,
    rows: Vec<ScoreRow>,
}

impl ScoreMatrix {
    pub fn new(systems: Vec<String>) -> Result<Self> {
        if systems.len() < 2 {
            return Err(Error::invalid("need at least two systems to correlate"));
        }
        for (i, name) in systems.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::invalid("system names must be non-empty"));
            }
            if systems[..i].contains(name) {
                return Err(Error::invalid(format!("duplicate system name {name:?}")));
            }
        }
        Ok(Self {
            systems,
            rows: Vec::new(),
        })
    }

    pub fn push_row(
        &mut self,
        measure: &str,
        direction: Direction,
        values: Vec<f64>,
    ) -> Result<()> {
        if values.len() != self.systems.len() {
            return Err(Error::invalid(format!(
                "row {measure:?} has {} scores for {} systems",
                values.len(),
                self.systems.len()
            )));
        }
        if self.rows.iter().any(|r| r.measure == measure) {
            return Err(Error::invalid(format!("duplicate measure row {measure:?}")));
        }
        self.rows.push(ScoreRow {
            measure: measure.to_owned(),
            direction,
            values,
        });
        Ok(())
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }
}

/// One pairwise comparison in a correlation matrix. `tau` is absent when
/// the correlation is undefined (an entirely tied score list); the
/// p-value is absent on the diagonal and wherever tau is.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrelationCell {
    pub tau: Option<f64>,
    pub p_value: Option<f64>,
    pub significant: bool,
}

/// Symmetric measure-by-measure Kendall's tau matrix with corrected
/// significance flags. Rows with non-finite scores never enter and are
/// listed in `dropped`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationMatrix {
    pub measures: Vec<String>,
    pub dropped: Vec<String>,
    pub alpha: f64,
    pub method: CorrectionMethod,
    pub cells: Vec<Vec<CorrelationCell>>,
}

/// Correlates every pair of measure rows, dropping rows with undefined
/// scores first, and flags significance after correcting the family of
/// off-diagonal p-values.
pub fn correlation_matrix(
    scores: &ScoreMatrix,
    alpha: f64,
    method: CorrectionMethod,
) -> Result<CorrelationMatrix> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let mut kept: Vec<&ScoreRow> = Vec::new();
    let mut dropped = Vec::new();
    for row in scores.rows() {
        if row.values.iter().all(|v| v.is_finite()) {
            kept.push(row);
        } else {
            dropped.push(row.measure.clone());
        }
    }
    if kept.is_empty() {
        return Err(Error::invalid(
            "every measure row has undefined scores; nothing to correlate",
        ));
    }
    let r = kept.len();
    let len = scores.systems().len();
    let mut cells = vec![
        vec![
            CorrelationCell {
                tau: None,
                p_value: None,
                significant: false,
            };
            r
        ];
        r
    ];
    let mut family = Vec::new();
    for i in 0..r {
        cells[i][i].tau = Some(1.0);
        for j in (i + 1)..r {
            match kendall_tau(
                &kept[i].values,
                kept[i].direction,
                &kept[j].values,
                kept[j].direction,
            ) {
                Ok(tau) => {
                    let p = tau_pvalue(tau, len)?;
                    cells[i][j].tau = Some(tau);
                    cells[i][j].p_value = Some(p);
                    family.push((i, j, p));
                }
                Err(Error::CorrelationUndefined(_)) => {}
                Err(other) => return Err(other),
            }
        }
    }
    let pvalues: Vec<f64> = family.iter().map(|&(_, _, p)| p).collect();
    if !pvalues.is_empty() {
        let flags = apply_correction(&pvalues, alpha, method);
        for (&(i, j, _), flag) in family.iter().zip(flags) {
            cells[i][j].significant = flag;
        }
    }
    for i in 0..r {
        let (above, rest) = cells.split_at_mut(i);
        let row = &mut rest[0];
        for (j, prior) in above.iter().enumerate() {
            row[j] = prior[i];
        }
    }
    Ok(CorrelationMatrix {
        measures: kept.iter().map(|r| r.measure.clone()).collect(),
        dropped,
        alpha,
        method,
        cells,
    })
}
