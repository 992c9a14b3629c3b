//! One-call fairness evaluation: every measure of a run next to its
//! achievable bounds and its corrected (min-max normalized) variant.

use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::exam::ExaminationFunction;
use crate::exposure::{build_exposure, build_user_item_exposure};
use crate::measures::{
    coverage_fraction, disparity_violation, exposure_entropy, gini_index, item_mean_divergence,
    jain_index, satisfaction_fraction, user_item_divergence, Direction, MeasureResult,
    SimilarityProvider,
};
use crate::model::{ItemCatalog, TopKRun};

/// Base of the exposure-entropy logarithm. The catalog-size base keeps the
/// most even full-coverage run at entropy 1 regardless of n.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LogBase {
    #[default]
    CatalogSize,
    Fixed(f64),
}

impl LogBase {
    /// The concrete base for a catalog of `n` items.
    pub fn resolve(&self, n: usize) -> Result<f64> {
        let base = match *self {
            LogBase::CatalogSize => n as f64,
            LogBase::Fixed(base) => base,
        };
        if !(base > 0.0 && base != 1.0) {
            return Err(Error::invalid(format!(
                "logarithm base must be positive and not 1, got {base} \
                 (a single-item catalog needs an explicit base)"
            )));
        }
        Ok(base)
    }
}

/// Evaluation parameters: the patience of the rank-biased examination
/// model, the entropy base, and what counts as a similar item pair.
#[derive(Debug, Clone)]
pub struct EvalParams {
    pub gamma: f64,
    pub log_base: LogBase,
    pub similarity: SimilarityProvider,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            gamma: 0.8,
            log_base: LogBase::default(),
            similarity: SimilarityProvider::all_similar(0.0)
                .expect("zero tolerance is always valid"),
        }
    }
}

/// One measure of one run: the original value, the closed-form bounds at
/// this shape, and the corrected variant. Any part that does not exist is
/// `None`, with the reason in `note`.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureSummary {
    pub id: &'static str,
    pub direction: Direction,
    pub value: Option<f64>,
    pub most_unfair: Option<f64>,
    pub most_fair: Option<f64>,
    pub corrected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// All fairness measures of one run, in a fixed order.
#[derive(Debug, Clone, Serialize)]
pub struct FairnessSummary {
    pub entries: Vec<MeasureSummary>,
}

impl FairnessSummary {
    pub fn entry(&self, id: &str) -> Option<&MeasureSummary> {
        self.entries.iter().find(|e| e.id == id)
    }
}

fn value_of(result: &MeasureResult) -> Option<f64> {
    result.is_defined().then(|| result.value())
}

/// Splits a corrected-measure computation into the `corrected` column and
/// a note for the degenerate shapes where no normalization exists.
fn corrected_or_note(result: Result<f64>, note: &mut Option<String>) -> Result<Option<f64>> {
    match result {
        Ok(value) => Ok(Some(value)),
        Err(Error::DegenerateNormalization { .. }) => {
            *note = Some("bounds coincide at this shape: no corrected score".into());
            Ok(None)
        }
        Err(other) => Err(other),
    }
}

/// Evaluates every fairness measure of a run against its catalog.
///
/// Multi-round runs are corrected with the effective user count
/// m * rounds, since the count structure of m users over W rounds is that
/// of m * W single-round users. Measures that are undefined for this run
/// or have no corrected variant at this shape come back with `None` in
/// the respective column and a note saying why; only genuine input errors
/// fail the whole evaluation.
pub fn evaluate_fairness(
    run: &TopKRun,
    catalog: &ItemCatalog,
    params: &EvalParams,
) -> Result<FairnessSummary> {
    let k = run.k();
    let n = catalog.len();
    let m_eff = run.user_count() * run.rounds();
    let log_base = params.log_base.resolve(n)?;
    let uniform = build_exposure(run, catalog, ExaminationFunction::Uniform)?;
    let discounted = build_exposure(run, catalog, ExaminationFunction::Dcg)?;
    let per_user = build_user_item_exposure(run, catalog, params.gamma)?;

    let mut entries = Vec::with_capacity(9);

    {
        let jain = jain_index(&uniform);
        let mut note = None;
        let corrected =
            corrected_or_note(bounds::corrected_jain(jain.value(), k, m_eff, n), &mut note)?;
        entries.push(MeasureSummary {
            id: "jain",
            direction: jain.direction(),
            value: value_of(&jain),
            most_unfair: Some(bounds::jain_most_unfair(k, n)),
            most_fair: Some(bounds::jain_most_fair(k, m_eff, n)),
            corrected,
            note,
        });
    }

    {
        let qf = coverage_fraction(&uniform);
        let mut note = None;
        let corrected = corrected_or_note(
            bounds::corrected_coverage(uniform.recommended_count(), k, m_eff, n),
            &mut note,
        )?;
        entries.push(MeasureSummary {
            id: "qf",
            direction: qf.direction(),
            value: value_of(&qf),
            most_unfair: Some(bounds::coverage_most_unfair(k, n)),
            most_fair: Some(bounds::coverage_most_fair(k, m_eff, n)),
            corrected,
            note,
        });
    }

    {
        let ent = exposure_entropy(&uniform, log_base);
        let mut note = None;
        if !ent.is_defined() {
            note = Some("undefined: some item was never recommended".into());
        }
        let nats = bounds::recommended_entropy_nats(&uniform);
        let corrected = corrected_or_note(bounds::corrected_entropy(nats, k, m_eff, n), &mut note)?;
        entries.push(MeasureSummary {
            id: "ent",
            direction: ent.direction(),
            value: value_of(&ent),
            most_unfair: Some(bounds::entropy_most_unfair(k, log_base)),
            most_fair: Some(bounds::entropy_most_fair(k, m_eff, n, log_base)),
            corrected,
            note,
        });
    }

    {
        let gini = gini_index(&uniform);
        let mut note = None;
        let corrected =
            corrected_or_note(bounds::corrected_gini(gini.value(), k, m_eff, n), &mut note)?;
        entries.push(MeasureSummary {
            id: "gini",
            direction: gini.direction(),
            value: value_of(&gini),
            most_unfair: Some(bounds::gini_most_unfair(k, n)),
            most_fair: Some(bounds::gini_most_fair(k, m_eff, n)),
            corrected,
            note,
        });
    }

    {
        let gini_w = gini_index(&discounted);
        let mut note = None;
        let corrected = corrected_or_note(
            bounds::corrected_weighted_gini(gini_w.value(), k, m_eff, n),
            &mut note,
        )?;
        if note.is_none() && k * m_eff > n {
            note = Some("km > n: scaled by the most-unfair score; 0 is unreachable".into());
        }
        entries.push(MeasureSummary {
            id: "gini_w",
            direction: gini_w.direction(),
            value: value_of(&gini_w),
            most_unfair: Some(bounds::weighted_gini_most_unfair(k, n)),
            most_fair: bounds::weighted_gini_most_fair(k, m_eff, n).ok(),
            corrected,
            note,
        });
    }

    {
        let fsat = satisfaction_fraction(&uniform);
        let mut note = None;
        let corrected = corrected_or_note(
            bounds::corrected_satisfaction(fsat.value(), k, n),
            &mut note,
        )?;
        if note.is_none() && k * m_eff < n {
            note = Some("km < n: every run scores 1 at this shape".into());
        }
        entries.push(MeasureSummary {
            id: "fsat",
            direction: fsat.direction(),
            value: value_of(&fsat),
            most_unfair: Some(bounds::satisfaction_most_unfair(k, m_eff, n)),
            most_fair: Some(1.0),
            corrected,
            note,
        });
    }

    {
        let mut note = None;
        let value = match disparity_violation(&uniform, &params.similarity) {
            Ok(result) => value_of(&result),
            Err(Error::NoSimilarPairs) => {
                note = Some("no similar pair among recommended items".into());
                None
            }
            Err(other) => return Err(other),
        };
        if note.is_none() {
            note = Some("most-unfair side is a ceiling, not always attainable".into());
        }
        entries.push(MeasureSummary {
            id: "vocd",
            direction: Direction::LowerIsFairer,
            value,
            most_unfair: Some(bounds::disparity_violation_ceiling(
                m_eff,
                params.similarity.beta(),
            )),
            most_fair: Some(0.0),
            corrected: None,
            note,
        });
    }

    {
        let iid = user_item_divergence(&per_user);
        entries.push(MeasureSummary {
            id: "iid",
            direction: iid.direction(),
            value: value_of(&iid),
            most_unfair: None,
            most_fair: None,
            corrected: None,
            note: Some("no closed-form bounds".into()),
        });
    }

    {
        let aid = item_mean_divergence(&per_user);
        entries.push(MeasureSummary {
            id: "aid",
            direction: aid.direction(),
            value: value_of(&aid),
            most_unfair: None,
            most_fair: None,
            corrected: None,
            note: Some("no closed-form bounds".into()),
        });
    }

    Ok(FairnessSummary { entries })
}
