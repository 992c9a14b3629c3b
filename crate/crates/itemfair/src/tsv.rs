//! Tab-separated text formats for runs, catalogs, judgments, exclusions,
//! embeddings, and score matrices.
//!
//! Every parse error names the origin (file name), the line, and the
//! violated rule. Catalog files are bare lists with no header; run files
//! require their header; the remaining formats tolerate their canonical
//! header line so exported tables can be read back.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::analysis::ScoreMatrix;
use crate::error::{Error, Result};
use crate::experiments::ExclusionSets;
use crate::measures::{Direction, EmbeddingTable};
use crate::model::{ItemCatalog, RelevanceJudgments, TopKRun, UserSet};

const RUN_HEADER: &str = "user_id\titem_id\trank";
const RUN_HEADER_ROUNDS: &str = "user_id\titem_id\trank\tround";
const QRELS_HEADER: &str = "user_id\titem_id\trel";
const EXCLUSIONS_HEADER: &str = "user_id\titem_id";

/// Nonempty lines with their 1-based numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line))
        .filter(|(_, line)| !line.is_empty())
}

/// Parses a catalog file: one item id per line, no header.
pub fn parse_catalog_str(text: &str, origin: &str) -> Result<ItemCatalog> {
    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    for (line_no, line) in numbered_lines(text) {
        if line.contains('\t') {
            return Err(Error::parse(
                origin,
                line_no,
                "catalog lines hold a single item id, no tabs",
            ));
        }
        if !seen.insert(line.to_owned()) {
            return Err(Error::parse(
                origin,
                line_no,
                format!("duplicate item id {line:?}"),
            ));
        }
        ids.push(line.to_owned());
    }
    if ids.is_empty() {
        return Err(Error::invalid(format!("{origin}: catalog file is empty")));
    }
    ItemCatalog::new(ids)
}

fn parse_positive(origin: &str, line_no: usize, what: &str, field: &str) -> Result<usize> {
    match field.parse::<usize>() {
        Ok(value) if value >= 1 => Ok(value),
        _ => Err(Error::parse(
            origin,
            line_no,
            format!("{what} must be a positive integer, got {field:?}"),
        )),
    }
}

/// Parses a run file against a catalog and an expected cutoff k.
///
/// The header is mandatory; the `round` column is optional and defaults
/// to a single round. Users are numbered in order of first appearance.
/// Each (user, round) must hold ranks 1..=k exactly once, and rounds must
/// be contiguous from 1 for every user.
pub fn parse_run_str(
    text: &str,
    origin: &str,
    catalog: &ItemCatalog,
    k: usize,
) -> Result<(UserSet, TopKRun)> {
    if k == 0 {
        return Err(Error::invalid("cutoff k must be at least 1"));
    }
    let mut lines = numbered_lines(text);
    let columns = match lines.next() {
        Some((_, line)) if line == RUN_HEADER => 3,
        Some((_, line)) if line == RUN_HEADER_ROUNDS => 4,
        Some((line_no, _)) => {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected header {RUN_HEADER:?} or {RUN_HEADER_ROUNDS:?}"),
            ))
        }
        None => return Err(Error::invalid(format!("{origin}: run file is empty"))),
    };

    let mut user_ids: Vec<String> = Vec::new();
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut slots: HashMap<(usize, usize), Vec<Option<usize>>> = HashMap::new();
    let mut max_round = 0usize;
    let mut any_row = false;

    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "expected {columns} tab-separated fields, got {}",
                    fields.len()
                ),
            ));
        }
        any_row = true;
        let item = catalog.index_of(fields[1]).ok_or_else(|| {
            Error::parse(origin, line_no, format!("unknown item id {:?}", fields[1]))
        })?;
        let rank = parse_positive(origin, line_no, "rank", fields[2])?;
        if rank > k {
            return Err(Error::parse(
                origin,
                line_no,
                format!("rank {rank} out of range for k = {k}"),
            ));
        }
        let round = if columns == 4 {
            parse_positive(origin, line_no, "round", fields[3])?
        } else {
            1
        };
        max_round = max_round.max(round);

        let next_user = user_ids.len();
        let user = *user_index.entry(fields[0].to_owned()).or_insert_with(|| {
            user_ids.push(fields[0].to_owned());
            next_user
        });
        let list = slots
            .entry((user, round - 1))
            .or_insert_with(|| vec![None; k]);
        if list[rank - 1].is_some() {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "user {:?} round {round} already has an item at rank {rank}",
                    fields[0]
                ),
            ));
        }
        if list.contains(&Some(item)) {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "user {:?} round {round} lists item {:?} more than once",
                    fields[0], fields[1]
                ),
            ));
        }
        list[rank - 1] = Some(item);
    }
    if !any_row {
        return Err(Error::invalid(format!(
            "{origin}: run file has no data rows"
        )));
    }

    let user_count = user_ids.len();
    let mut assembled = Vec::with_capacity(user_count * max_round);
    for (user, user_id) in user_ids.iter().enumerate() {
        for round in 0..max_round {
            let ranks = slots.remove(&(user, round)).ok_or_else(|| {
                Error::invalid(format!(
                    "{origin}: user {user_id:?} has no round {} (rounds must be contiguous from 1)",
                    round + 1
                ))
            })?;
            let mut list = Vec::with_capacity(k);
            for (pos, slot) in ranks.into_iter().enumerate() {
                list.push(slot.ok_or_else(|| {
                    Error::invalid(format!(
                        "{origin}: user {user_id:?} round {} is missing rank {}",
                        round + 1,
                        pos + 1
                    ))
                })?);
            }
            assembled.push(list);
        }
    }
    let users = UserSet::new(user_ids)?;
    let run = TopKRun::from_lists(k, user_count, max_round, assembled, catalog)?;
    Ok((users, run))
}

/// Parses binary judgments. Rows must reference users and items known to
/// the run and catalog; duplicate (user, item) rows are rejected even
/// when they agree.
pub fn parse_qrels_str(
    text: &str,
    origin: &str,
    users: &UserSet,
    catalog: &ItemCatalog,
) -> Result<RelevanceJudgments> {
    let mut judgments = RelevanceJudgments::new(users.len());
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (line_no, line) in numbered_lines(text) {
        if line_no == 1 && line == QRELS_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let user = users.index_of(fields[0]).ok_or_else(|| {
            Error::parse(
                origin,
                line_no,
                format!("unknown user id {:?} (not in the run)", fields[0]),
            )
        })?;
        let item = catalog.index_of(fields[1]).ok_or_else(|| {
            Error::parse(origin, line_no, format!("unknown item id {:?}", fields[1]))
        })?;
        let rel = match fields[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("relevance must be 0 or 1, got {other:?}"),
                ))
            }
        };
        if !seen.insert((user, item)) {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "duplicate judgment for user {:?}, item {:?}",
                    fields[0], fields[1]
                ),
            ));
        }
        if rel {
            judgments.add(user, item);
        }
    }
    Ok(judgments)
}

/// Parses per-user exclusion sets (`user_id<TAB>item_id` rows). Repeated
/// rows are harmless; sets ignore them.
pub fn parse_exclusions_str(
    text: &str,
    origin: &str,
    users: &UserSet,
    catalog: &ItemCatalog,
) -> Result<ExclusionSets> {
    let mut sets = ExclusionSets::none(users.len());
    for (line_no, line) in numbered_lines(text) {
        if line_no == 1 && line == EXCLUSIONS_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                origin,
                line_no,
                format!("expected 2 tab-separated fields, got {}", fields.len()),
            ));
        }
        let user = users.index_of(fields[0]).ok_or_else(|| {
            Error::parse(origin, line_no, format!("unknown user id {:?}", fields[0]))
        })?;
        let item = catalog.index_of(fields[1]).ok_or_else(|| {
            Error::parse(origin, line_no, format!("unknown item id {:?}", fields[1]))
        })?;
        sets.add(user, item);
    }
    Ok(sets)
}

/// Parses item embeddings (`item_id<TAB>v1<TAB>...<TAB>vd`). The
/// dimension is set by the first data row.
pub fn parse_embeddings_str(
    text: &str,
    origin: &str,
    catalog: &ItemCatalog,
) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for (line_no, line) in numbered_lines(text) {
        if line_no == 1 && line.starts_with("item_id\t") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(Error::parse(
                origin,
                line_no,
                "expected an item id and at least one component",
            ));
        }
        let item = catalog.index_of(fields[0]).ok_or_else(|| {
            Error::parse(origin, line_no, format!("unknown item id {:?}", fields[0]))
        })?;
        let mut vector = Vec::with_capacity(fields.len() - 1);
        for field in &fields[1..] {
            let component: f64 = field.parse().map_err(|_| {
                Error::parse(
                    origin,
                    line_no,
                    format!("component {field:?} is not a number"),
                )
            })?;
            vector.push(component);
        }
        let table = table.get_or_insert_with(|| {
            EmbeddingTable::new(vector.len()).expect("dimension is at least 1")
        });
        table.insert(item, vector).map_err(|err| match err {
            Error::Invalid(message) => Error::parse(origin, line_no, message),
            other => other,
        })?;
    }
    table.ok_or_else(|| Error::invalid(format!("{origin}: embedding file has no data rows")))
}

/// Parses a comma-separated score matrix: header
/// `measure,direction,<system...>`, then one row per measure with
/// direction `higher` or `lower`. Cells may be `nan` for undefined
/// scores; correlation drops such rows later.
pub fn parse_score_matrix_str(text: &str, origin: &str) -> Result<ScoreMatrix> {
    let mut lines = numbered_lines(text);
    let systems: Vec<String> = match lines.next() {
        Some((line_no, line)) => {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 4 || fields[0] != "measure" || fields[1] != "direction" {
                return Err(Error::parse(
                    origin,
                    line_no,
                    "expected header measure,direction,<at least two system columns>",
                ));
            }
            fields[2..].iter().map(|s| s.to_string()).collect()
        }
        None => return Err(Error::invalid(format!("{origin}: score file is empty"))),
    };
    let mut matrix = ScoreMatrix::new(systems)?;
    let mut any_row = false;
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != matrix.systems().len() + 2 {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "expected {} comma-separated fields, got {}",
                    matrix.systems().len() + 2,
                    fields.len()
                ),
            ));
        }
        let direction = match fields[1] {
            "higher" => Direction::HigherIsFairer,
            "lower" => Direction::LowerIsFairer,
            other => {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("direction must be \"higher\" or \"lower\", got {other:?}"),
                ))
            }
        };
        let mut values = Vec::with_capacity(matrix.systems().len());
        for field in &fields[2..] {
            let value: f64 = field.parse().map_err(|_| {
                Error::parse(origin, line_no, format!("score {field:?} is not a number"))
            })?;
            values.push(value);
        }
        matrix.push_row(fields[0], direction, values)?;
        any_row = true;
    }
    if !any_row {
        return Err(Error::invalid(format!(
            "{origin}: score file has no measure rows"
        )));
    }
    Ok(matrix)
}

/// Serializes a run back to the tab-separated format. The round column is
/// written only for multi-round runs, so single-round files stay in the
/// three-column form and round-trip unchanged.
pub fn run_to_tsv(run: &TopKRun, users: &UserSet, catalog: &ItemCatalog) -> String {
    let multi = run.rounds() > 1;
    let mut out = String::new();
    out.push_str(if multi { RUN_HEADER_ROUNDS } else { RUN_HEADER });
    out.push('\n');
    for (user, round, list) in run.iter_lists() {
        for (pos, &item) in list.iter().enumerate() {
            if multi {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    users.id(user),
                    catalog.id(item),
                    pos + 1,
                    round + 1
                );
            } else {
                let _ = writeln!(out, "{}\t{}\t{}", users.id(user), catalog.id(item), pos + 1);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> ItemCatalog {
        ItemCatalog::numbered(10)
    }

    #[test]
    fn parses_a_single_round_run() {
        let text = "user_id\titem_id\trank\n\
                    u1\ti1\t1\nu1\ti2\t2\nu1\ti3\t3\n\
                    u2\ti4\t1\nu2\ti5\t2\nu2\ti6\t3\n";
        let (users, run) = parse_run_str(text, "run.tsv", &catalog(), 3).unwrap();
        assert_eq!(users.len(), 2);
        assert_eq!(users.id(0), "u1");
        assert_eq!(run.k(), 3);
        assert_eq!(run.rounds(), 1);
        assert_eq!(run.list(1, 0), &[3, 4, 5]);
    }

    #[test]
    fn ranks_may_arrive_out_of_order() {
        let text = "user_id\titem_id\trank\nu1\ti2\t2\nu1\ti1\t1\n";
        let (_, run) = parse_run_str(text, "run.tsv", &catalog(), 2).unwrap();
        assert_eq!(run.list(0, 0), &[0, 1]);
    }

    #[test]
    fn round_trip_preserves_runs() {
        let cat = catalog();
        let text = "user_id\titem_id\trank\tround\n\
                    u1\ti1\t1\t1\nu1\ti2\t2\t1\n\
                    u1\ti3\t1\t2\nu1\ti1\t2\t2\n\
                    u2\ti2\t1\t1\nu2\ti3\t2\t1\n\
                    u2\ti4\t1\t2\nu2\ti5\t2\t2\n";
        let (users, run) = parse_run_str(text, "run.tsv", &cat, 2).unwrap();
        assert_eq!(run.rounds(), 2);
        let serialized = run_to_tsv(&run, &users, &cat);
        let (users2, reparsed) = parse_run_str(&serialized, "copy.tsv", &cat, 2).unwrap();
        assert_eq!(run, reparsed);
        assert_eq!(users.id(0), users2.id(0));

        let single = "user_id\titem_id\trank\nu1\ti1\t1\n";
        let (users, run) = parse_run_str(single, "run.tsv", &cat, 1).unwrap();
        let serialized = run_to_tsv(&run, &users, &cat);
        assert!(!serialized.contains("round"));
        let (_, reparsed) = parse_run_str(&serialized, "copy.tsv", &cat, 1).unwrap();
        assert_eq!(run, reparsed);
    }

    #[test]
    fn run_errors_carry_origin_and_line() {
        let cat = catalog();
        let missing_header = "u1\ti1\t1\n";
        let err = parse_run_str(missing_header, "run.tsv", &cat, 1).unwrap_err();
        assert!(err.to_string().contains("run.tsv:1"));
        assert!(err.to_string().contains("header"));

        let unknown = "user_id\titem_id\trank\nu1\tmystery\t1\n";
        let err = parse_run_str(unknown, "run.tsv", &cat, 1).unwrap_err();
        assert!(err.to_string().contains("run.tsv:2"));
        assert!(err.to_string().contains("mystery"));

        let bad_rank = "user_id\titem_id\trank\nu1\ti1\tone\n";
        assert!(parse_run_str(bad_rank, "run.tsv", &cat, 1)
            .unwrap_err()
            .to_string()
            .contains("positive integer"));

        let out_of_range = "user_id\titem_id\trank\nu1\ti1\t3\n";
        assert!(parse_run_str(out_of_range, "run.tsv", &cat, 2)
            .unwrap_err()
            .to_string()
            .contains("out of range"));

        let dup_rank = "user_id\titem_id\trank\nu1\ti1\t1\nu1\ti2\t1\n";
        assert!(parse_run_str(dup_rank, "run.tsv", &cat, 2)
            .unwrap_err()
            .to_string()
            .contains("already has an item at rank 1"));

        let dup_item = "user_id\titem_id\trank\nu1\ti1\t1\nu1\ti1\t2\n";
        assert!(parse_run_str(dup_item, "run.tsv", &cat, 2)
            .unwrap_err()
            .to_string()
            .contains("more than once"));

        let missing_rank = "user_id\titem_id\trank\nu1\ti1\t2\n";
        assert!(parse_run_str(missing_rank, "run.tsv", &cat, 2)
            .unwrap_err()
            .to_string()
            .contains("missing rank 1"));

        let round_gap = "user_id\titem_id\trank\tround\nu1\ti1\t1\t1\nu1\ti1\t1\t3\n";
        assert!(parse_run_str(round_gap, "run.tsv", &cat, 1)
            .unwrap_err()
            .to_string()
            .contains("contiguous"));
    }

    #[test]
    fn parses_catalogs_strictly() {
        let cat = parse_catalog_str("i1\ni2\n\ni3\n", "items.txt").unwrap();
        assert_eq!(cat.len(), 3);
        assert!(parse_catalog_str("i1\ni1\n", "items.txt")
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        assert!(parse_catalog_str("i1\tmore\n", "items.txt").is_err());
        assert!(parse_catalog_str("", "items.txt").is_err());
    }

    #[test]
    fn parses_qrels_with_optional_header() {
        let cat = catalog();
        let users = UserSet::numbered(2);
        let text = "user_id\titem_id\trel\nu1\ti1\t1\nu1\ti2\t0\nu2\ti3\t1\n";
        let judgments = parse_qrels_str(text, "qrels.tsv", &users, &cat).unwrap();
        assert!(judgments.is_relevant(0, 0));
        assert!(!judgments.is_relevant(0, 1));
        assert!(judgments.is_relevant(1, 2));

        let headerless = "u1\ti1\t1\n";
        assert!(parse_qrels_str(headerless, "q.tsv", &users, &cat).is_ok());

        let dup = "u1\ti1\t1\nu1\ti1\t1\n";
        assert!(parse_qrels_str(dup, "q.tsv", &users, &cat)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));

        let bad_rel = "u1\ti1\t2\n";
        assert!(parse_qrels_str(bad_rel, "q.tsv", &users, &cat)
            .unwrap_err()
            .to_string()
            .contains("0 or 1"));

        let unknown_user = "u9\ti1\t1\n";
        assert!(parse_qrels_str(unknown_user, "q.tsv", &users, &cat).is_err());
    }

    #[test]
    fn parses_exclusions() {
        let cat = catalog();
        let users = UserSet::numbered(2);
        let text = "user_id\titem_id\nu1\ti1\nu1\ti1\nu2\ti2\n";
        let sets = parse_exclusions_str(text, "seen.tsv", &users, &cat).unwrap();
        assert!(sets.is_excluded(0, 0));
        assert!(sets.is_excluded(1, 1));
        assert_eq!(sets.excluded_count(0), 1);
        assert!(parse_exclusions_str("u1\n", "seen.tsv", &users, &cat).is_err());
    }

    #[test]
    fn parses_embeddings() {
        let cat = catalog();
        let text = "item_id\tv1\tv2\ni1\t1.0\t0.0\ni2\t0.0\t1.0\n";
        let table = parse_embeddings_str(text, "emb.tsv", &cat).unwrap();
        assert_eq!(table.len(), 2);
        assert!((table.cosine_distance(0, 1).unwrap() - 1.0).abs() < 1e-12);

        let mismatched = "i1\t1.0\t0.0\ni2\t0.5\n";
        assert!(parse_embeddings_str(mismatched, "emb.tsv", &cat)
            .unwrap_err()
            .to_string()
            .contains("emb.tsv:2"));
        let bad = "i1\tx\n";
        assert!(parse_embeddings_str(bad, "emb.tsv", &cat).is_err());
        assert!(parse_embeddings_str("", "emb.tsv", &cat).is_err());
    }

    #[test]
    fn parses_score_matrices() {
        let text = "measure,direction,s1,s2,s3\n\
                    jain,higher,0.1,0.2,0.3\n\
                    gini,lower,0.9,0.8,nan\n";
        let matrix = parse_score_matrix_str(text, "scores.csv").unwrap();
        assert_eq!(matrix.systems(), ["s1", "s2", "s3"]);
        assert_eq!(matrix.rows().len(), 2);
        assert!(matrix.rows()[1].values[2].is_nan());

        assert!(parse_score_matrix_str("measure,direction,s1\nx,higher,1\n", "s.csv").is_err());
        assert!(
            parse_score_matrix_str("measure,direction,s1,s2\nx,sideways,1,2\n", "s.csv").is_err()
        );
        assert!(parse_score_matrix_str("measure,direction,s1,s2\n", "s.csv").is_err());
    }
}
