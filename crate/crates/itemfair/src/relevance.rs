//! Binary relevance scores at cutoff k for single-round runs.
//!
//! Users without a single relevant item in the judgments are skipped, not
//! scored as zero: with binary judgments their ideal score is undefined.
//! Averages are taken over the evaluated users only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{RelevanceJudgments, TopKRun};

/// Per-user relevance scores at the run's cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelevanceScores {
    pub hit_rate: f64,
    pub reciprocal_rank: f64,
    pub precision: f64,
    pub recall: f64,
    pub average_precision: f64,
    pub ndcg: f64,
}

/// Relevance scores for one run: per-user rows plus the mean over the
/// users that could be evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct RelevanceSummary {
    pub evaluated: usize,
    pub skipped: usize,
    pub mean: RelevanceScores,
    /// One entry per user; `None` marks users with no relevant items.
    pub per_user: Vec<Option<RelevanceScores>>,
}

fn dcg_weight(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

fn score_user(
    list: &[usize],
    relevant_total: usize,
    is_relevant: impl Fn(usize) -> bool,
) -> RelevanceScores {
    let k = list.len();
    let mut hits = 0usize;
    let mut reciprocal_rank = 0.0;
    let mut precision_sum = 0.0;
    let mut dcg = 0.0;
    for (pos, &item) in list.iter().enumerate() {
        if is_relevant(item) {
            let rank = pos + 1;
            hits += 1;
            if hits == 1 {
                reciprocal_rank = 1.0 / rank as f64;
            }
            precision_sum += hits as f64 / rank as f64;
            dcg += dcg_weight(rank);
        }
    }
    // The ideal list front-loads min(k, #relevant) relevant items.
    let ideal_hits = k.min(relevant_total);
    let idcg: f64 = (1..=ideal_hits).map(dcg_weight).sum();
    RelevanceScores {
        hit_rate: if hits > 0 { 1.0 } else { 0.0 },
        reciprocal_rank,
        precision: hits as f64 / k as f64,
        recall: hits as f64 / relevant_total as f64,
        average_precision: precision_sum / ideal_hits as f64,
        ndcg: dcg / idcg,
    }
}

/// Scores a single-round run against binary judgments.
///
/// Errors on multi-round runs (per-round relevance is not defined here) and
/// when no user has any relevant item.
pub fn evaluate_relevance(
    run: &TopKRun,
    judgments: &RelevanceJudgments,
) -> Result<RelevanceSummary> {
    if run.rounds() != 1 {
        return Err(Error::invalid(format!(
            "relevance scoring expects a single-round run, got {} rounds",
            run.rounds()
        )));
    }
    if judgments.user_count() != run.user_count() {
        return Err(Error::invalid(format!(
            "judgments cover {} users but the run has {}",
            judgments.user_count(),
            run.user_count()
        )));
    }
    let mut per_user = Vec::with_capacity(run.user_count());
    let mut totals = RelevanceScores {
        hit_rate: 0.0,
        reciprocal_rank: 0.0,
        precision: 0.0,
        recall: 0.0,
        average_precision: 0.0,
        ndcg: 0.0,
    };
    let mut evaluated = 0usize;
    for user in 0..run.user_count() {
        let relevant_total = judgments.relevant_count(user);
        if relevant_total == 0 {
            per_user.push(None);
            continue;
        }
        let scores = score_user(run.list(user, 0), relevant_total, |item| {
            judgments.is_relevant(user, item)
        });
        totals.hit_rate += scores.hit_rate;
        totals.reciprocal_rank += scores.reciprocal_rank;
        totals.precision += scores.precision;
        totals.recall += scores.recall;
        totals.average_precision += scores.average_precision;
        totals.ndcg += scores.ndcg;
        per_user.push(Some(scores));
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::invalid(
            "no user has a relevant item; relevance scores are undefined",
        ));
    }
    let d = evaluated as f64;
    Ok(RelevanceSummary {
        evaluated,
        skipped: run.user_count() - evaluated,
        mean: RelevanceScores {
            hit_rate: totals.hit_rate / d,
            reciprocal_rank: totals.reciprocal_rank / d,
            precision: totals.precision / d,
            recall: totals.recall / d,
            average_precision: totals.average_precision / d,
            ndcg: totals.ndcg / d,
        },
        per_user,
    })
}
