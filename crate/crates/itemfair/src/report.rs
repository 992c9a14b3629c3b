//! Machine-readable output: JSON and CSV renderings of evaluations,
//! bounds tables, correlation matrices, insertion sweeps, and oracle
//! results. Output is deterministic: identical inputs produce identical
//! bytes.

use serde::Serialize;

use crate::analysis::CorrelationMatrix;
use crate::bounds::BoundsReport;
use crate::error::Result;
use crate::eval::{EvalParams, FairnessSummary};
use crate::experiments::InsertionPoint;
use crate::measures::Direction;
use crate::model::{ItemCatalog, TopKRun, UserSet};
use crate::oracle::{EnumerationSpec, ExtremeResult};
use crate::relevance::{RelevanceScores, RelevanceSummary};
use crate::tsv::run_to_tsv;

/// The shape and parameters an evaluation ran under.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub rounds: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub log_base: f64,
}

/// Mean relevance scores over the evaluated users.
#[derive(Debug, Clone, Serialize)]
pub struct RelevanceReport {
    pub evaluated_users: usize,
    pub skipped_users: usize,
    pub mean: RelevanceScores,
}

/// A full evaluation of one run: metadata, every fairness measure with
/// bounds and corrected values, and (when judgments were given) the mean
/// relevance scores.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub meta: RunMeta,
    pub fairness: FairnessSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relevance: Option<RelevanceReport>,
}

impl Report {
    pub fn build(
        run: &TopKRun,
        params: &EvalParams,
        fairness: FairnessSummary,
        relevance: Option<&RelevanceSummary>,
    ) -> Result<Report> {
        let meta = RunMeta {
            k: run.k(),
            m: run.user_count(),
            n: run.catalog_size(),
            rounds: run.rounds(),
            gamma: params.gamma,
            alpha: params.similarity.alpha(),
            beta: params.similarity.beta(),
            log_base: params.log_base.resolve(run.catalog_size())?,
        };
        Ok(Report {
            meta,
            fairness,
            relevance: relevance.map(|summary| RelevanceReport {
                evaluated_users: summary.evaluated,
                skipped_users: summary.skipped,
                mean: summary.mean,
            }),
        })
    }
}

/// Pretty JSON with a trailing newline. Report types never hold
/// non-finite numbers (undefined values are `None`), so serialization
/// cannot fail.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report values are finite");
    out.push('\n');
    out
}

fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_owned()
    }
}

fn csv_row(fields: &[String]) -> String {
    let mut row = fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",");
    row.push('\n');
    row
}

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn direction_str(direction: Direction) -> &'static str {
    match direction {
        Direction::HigherIsFairer => "higher",
        Direction::LowerIsFairer => "lower",
    }
}

/// The evaluation report in long CSV form: one row per metadatum,
/// fairness measure, and mean relevance score.
pub fn report_to_csv(report: &Report) -> String {
    let mut out =
        String::from("section,measure,value,direction,most_unfair,most_fair,corrected,note\n");
    let meta = &report.meta;
    let meta_rows: [(&str, String); 8] = [
        ("k", meta.k.to_string()),
        ("m", meta.m.to_string()),
        ("n", meta.n.to_string()),
        ("rounds", meta.rounds.to_string()),
        ("gamma", meta.gamma.to_string()),
        ("alpha", meta.alpha.to_string()),
        ("beta", meta.beta.to_string()),
        ("log_base", meta.log_base.to_string()),
    ];
    for (name, value) in meta_rows {
        out.push_str(&csv_row(&[
            "meta".into(),
            name.into(),
            value,
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]));
    }
    for entry in &report.fairness.entries {
        out.push_str(&csv_row(&[
            "fairness".into(),
            entry.id.into(),
            opt(entry.value),
            direction_str(entry.direction).into(),
            opt(entry.most_unfair),
            opt(entry.most_fair),
            opt(entry.corrected),
            entry.note.clone().unwrap_or_default(),
        ]));
    }
    if let Some(relevance) = &report.relevance {
        let mean = &relevance.mean;
        let rows: [(&str, f64); 6] = [
            ("hit_rate", mean.hit_rate),
            ("mrr", mean.reciprocal_rank),
            ("precision", mean.precision),
            ("recall", mean.recall),
            ("map", mean.average_precision),
            ("ndcg", mean.ndcg),
        ];
        for (name, value) in rows {
            out.push_str(&csv_row(&[
                "relevance".into(),
                name.into(),
                value.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]));
        }
    }
    out
}

/// A bounds table as CSV: one row per measure.
pub fn bounds_to_csv(report: &BoundsReport) -> String {
    let mut out = String::from("measure,direction,most_unfair,most_fair,note\n");
    for row in &report.rows {
        out.push_str(&csv_row(&[
            row.measure.clone(),
            direction_str(row.direction).into(),
            opt(row.most_unfair),
            opt(row.most_fair),
            row.note.clone().unwrap_or_default(),
        ]));
    }
    out
}

/// A correlation matrix in long CSV form: one row per unordered measure
/// pair, diagonal included.
pub fn correlation_to_csv(matrix: &CorrelationMatrix) -> String {
    let mut out = String::from("measure_a,measure_b,tau,p_value,significant\n");
    for i in 0..matrix.measures.len() {
        for j in i..matrix.measures.len() {
            let cell = matrix.cells[i][j];
            out.push_str(&csv_row(&[
                matrix.measures[i].clone(),
                matrix.measures[j].clone(),
                opt(cell.tau),
                opt(cell.p_value),
                cell.significant.to_string(),
            ]));
        }
    }
    out
}

/// One serializable step of an insertion sweep.
#[derive(Debug, Clone, Serialize)]
pub struct InsertionStepReport<'a> {
    pub step: usize,
    pub inserted_fraction: f64,
    pub fairness: &'a FairnessSummary,
    pub relevance_mean: &'a RelevanceScores,
}

/// The insertion sweep as a JSON array of steps.
pub fn insertion_to_json(points: &[InsertionPoint]) -> String {
    let steps: Vec<InsertionStepReport> = points
        .iter()
        .map(|p| InsertionStepReport {
            step: p.step,
            inserted_fraction: p.inserted_fraction,
            fairness: &p.fairness,
            relevance_mean: &p.relevance.mean,
        })
        .collect();
    to_json(&steps)
}

/// The insertion sweep as a wide CSV: per step, every measure's original
/// and corrected value plus the mean relevance scores.
pub fn insertion_to_csv(points: &[InsertionPoint]) -> String {
    let mut header = vec!["step".to_owned(), "inserted_fraction".to_owned()];
    if let Some(first) = points.first() {
        for entry in &first.fairness.entries {
            header.push(format!("{}_value", entry.id));
            header.push(format!("{}_corrected", entry.id));
        }
    }
    for name in ["hit_rate", "mrr", "precision", "recall", "map", "ndcg"] {
        header.push(name.to_owned());
    }
    let mut out = csv_row(&header);
    for point in points {
        let mut row = vec![point.step.to_string(), point.inserted_fraction.to_string()];
        for entry in &point.fairness.entries {
            row.push(opt(entry.value));
            row.push(opt(entry.corrected));
        }
        let mean = &point.relevance.mean;
        for value in [
            mean.hit_rate,
            mean.reciprocal_rank,
            mean.precision,
            mean.recall,
            mean.average_precision,
            mean.ndcg,
        ] {
            row.push(value.to_string());
        }
        out.push_str(&csv_row(&row));
    }
    out
}

/// An enumeration outcome with its witnesses serialized as run files.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub measure: String,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub rounds: usize,
    pub min_value: f64,
    pub max_value: f64,
    pub evaluated: u128,
    pub skipped: u128,
    pub argmin_run: String,
    pub argmax_run: String,
}

/// Packages an enumeration result for output, rendering the witness runs
/// in the standard run-file format with numbered ids.
pub fn oracle_report(spec: &EnumerationSpec, result: &ExtremeResult) -> OracleReport {
    let catalog = ItemCatalog::numbered(spec.n);
    let users = UserSet::numbered(spec.m);
    OracleReport {
        measure: spec.measure.id().to_owned(),
        k: spec.k,
        m: spec.m,
        n: spec.n,
        rounds: spec.rounds,
        min_value: result.min_value,
        max_value: result.max_value,
        evaluated: result.evaluated,
        skipped: result.skipped,
        argmin_run: run_to_tsv(&result.argmin, &users, &catalog),
        argmax_run: run_to_tsv(&result.argmax, &users, &catalog),
    }
}

/// The oracle outcome as a single CSV row (witness runs omitted).
pub fn oracle_to_csv(report: &OracleReport) -> String {
    let mut out = String::from("measure,k,m,n,rounds,min,max,evaluated,skipped\n");
    out.push_str(&csv_row(&[
        report.measure.clone(),
        report.k.to_string(),
        report.m.to_string(),
        report.n.to_string(),
        report.rounds.to_string(),
        report.min_value.to_string(),
        report.max_value.to_string(),
        report.evaluated.to_string(),
        report.skipped.to_string(),
    ]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::evaluate_fairness;
    use crate::model::RelevanceJudgments;
    use crate::oracle::{enumerate_extremes, OracleMeasure};
    use crate::relevance::evaluate_relevance;
    use crate::tsv::parse_run_str;

    fn sample_report() -> Report {
        let catalog = ItemCatalog::numbered(10);
        let run = TopKRun::single_round(3, vec![vec![0, 1, 2], vec![3, 4, 5]], &catalog).unwrap();
        let params = EvalParams::default();
        let fairness = evaluate_fairness(&run, &catalog, &params).unwrap();
        let mut judgments = RelevanceJudgments::new(2);
        judgments.add(0, 0);
        judgments.add(1, 9);
        let relevance = evaluate_relevance(&run, &judgments).unwrap();
        Report::build(&run, &params, fairness, Some(&relevance)).unwrap()
    }

    #[test]
    fn json_report_is_deterministic_and_complete() {
        let a = to_json(&sample_report());
        let b = to_json(&sample_report());
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        let value: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(value["meta"]["k"], 3);
        assert_eq!(value["meta"]["n"], 10);
        assert_eq!(value["meta"]["log_base"], 10.0);
        let entries = value["fairness"]["entries"].as_array().unwrap();
        assert_eq!(entries.len(), 9);
        assert_eq!(entries[0]["id"], "jain");
        assert_eq!(entries[0]["value"], 0.6);
        // Undefined values appear as explicit nulls, never NaN.
        assert!(entries[2]["value"].is_null());
        assert_eq!(value["relevance"]["evaluated_users"], 2);
    }

    #[test]
    fn csv_report_has_all_sections_and_quotes_notes() {
        let csv = report_to_csv(&sample_report());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "section,measure,value,direction,most_unfair,most_fair,corrected,note"
        );
        // 8 meta + 9 fairness + 6 relevance rows.
        assert_eq!(lines.len(), 1 + 8 + 9 + 6);
        assert!(lines.iter().any(|l| l.starts_with("meta,k,3")));
        assert!(lines
            .iter()
            .any(|l| l.starts_with("fairness,jain,0.6,higher")));
        assert!(lines.iter().any(|l| l.starts_with("relevance,mrr,")));
        // The vocd ceiling note contains a comma and must be quoted.
        let vocd = lines
            .iter()
            .find(|l| l.starts_with("fairness,vocd"))
            .unwrap();
        assert!(vocd.contains("\"most-unfair side is a ceiling, not always attainable\""));
    }

    #[test]
    fn bounds_and_oracle_renderings() {
        let bounds = crate::bounds::bounds_report(2, 2, 3, 2.0, 0.0).unwrap();
        let csv = bounds_to_csv(&bounds);
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.contains("jain,higher,"));

        let spec = EnumerationSpec::new(2, 2, 3, 1, OracleMeasure::Jain);
        let result = enumerate_extremes(&spec).unwrap();
        let report = oracle_report(&spec, &result);
        let catalog = ItemCatalog::numbered(3);
        let (_, reparsed) = parse_run_str(&report.argmax_run, "witness", &catalog, 2).unwrap();
        assert_eq!(reparsed, result.argmax);
        let csv = oracle_to_csv(&report);
        assert!(csv.lines().nth(1).unwrap().starts_with("jain,2,2,3,1,"));
        let json = to_json(&report);
        assert!(json.contains("\"evaluated\": 36"));
    }

    #[test]
    fn csv_field_escaping() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
