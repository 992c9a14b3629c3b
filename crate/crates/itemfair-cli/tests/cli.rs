//! End-to-end tests of the `itemfair` binary: each subcommand once, plus
//! the exit-code contract (0 ok, 1 validation, 2 degenerate normalization,
//! 3 enumeration over the cap).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_itemfair"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr should be UTF-8")
}

fn write(dir: &TempDir, name: &str, content: &str) {
    fs::write(dir.path().join(name), content).expect("test file should write");
}

fn numbered_catalog(n: usize) -> String {
    (1..=n).map(|i| format!("i{i}\n")).collect()
}

const TOY_RUN: &str = "user_id\titem_id\trank\n\
                       u1\ti1\t1\n\
                       u1\ti2\t2\n\
                       u1\ti3\t3\n\
                       u2\ti4\t1\n\
                       u2\ti5\t2\n\
                       u2\ti6\t3\n";

#[test]
fn eval_reports_the_toy_run() {
    let dir = TempDir::new().unwrap();
    write(&dir, "run.tsv", TOY_RUN);
    write(&dir, "catalog.txt", &numbered_catalog(10));

    let output = run_in(
        dir.path(),
        &[
            "eval",
            "--run",
            "run.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "3",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("\"id\": \"jain\""));
    assert!(stdout.contains("\"value\": 0.6"));
    assert!(stdout.contains("\"n\": 10"));
    // Four items never appear, so the whole-catalog entropy is undefined.
    assert!(stdout.contains("\"value\": null"));
    assert!(!stdout.contains("\"relevance\""));

    // Identical invocations must produce identical bytes.
    let again = run_in(
        dir.path(),
        &[
            "eval",
            "--run",
            "run.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "3",
        ],
    );
    assert_eq!(output.stdout, again.stdout);
}

#[test]
fn eval_adds_relevance_with_qrels_and_writes_files() {
    let dir = TempDir::new().unwrap();
    write(&dir, "run.tsv", TOY_RUN);
    write(&dir, "catalog.txt", &numbered_catalog(10));
    write(&dir, "qrels.tsv", "u1\ti1\t1\nu2\ti9\t1\n");

    let output = run_in(
        dir.path(),
        &[
            "eval",
            "--run",
            "run.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "3",
            "--qrels",
            "qrels.tsv",
            "--format",
            "csv",
            "--output",
            "report.csv",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    assert!(stdout_of(&output).is_empty());
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    // u1 finds its relevant item at rank 1, u2 finds nothing.
    assert!(report.contains("relevance,hit_rate,0.5"));
    assert!(report.contains("relevance,mrr,0.5"));
    assert!(report.contains("fairness,jain,0.6"));
}

#[test]
fn eval_rejects_a_malformed_run_with_file_and_line() {
    let dir = TempDir::new().unwrap();
    write(
        &dir,
        "bad.tsv",
        "user_id\titem_id\trank\nu1\ti1\t1\nu1\ti2\t5\n",
    );
    write(&dir, "catalog.txt", &numbered_catalog(10));

    let output = run_in(
        dir.path(),
        &[
            "eval",
            "--run",
            "bad.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "2",
        ],
    );
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("bad.tsv:3"), "stderr: {stderr}");
}

#[test]
fn eval_with_cutoff_equal_to_catalog_size_is_degenerate() {
    let dir = TempDir::new().unwrap();
    write(
        &dir,
        "run.tsv",
        "user_id\titem_id\trank\nu1\ti1\t1\nu1\ti2\t2\nu1\ti3\t3\n",
    );
    write(&dir, "catalog.txt", &numbered_catalog(3));

    let output = run_in(
        dir.path(),
        &[
            "eval",
            "--run",
            "run.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "3",
        ],
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("degenerate normalization"));
}

#[test]
fn missing_input_file_exits_one() {
    let dir = TempDir::new().unwrap();
    write(&dir, "catalog.txt", &numbered_catalog(3));
    let output = run_in(
        dir.path(),
        &[
            "eval",
            "--run",
            "absent.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "2",
        ],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).contains("absent.tsv"));
}

#[test]
fn bounds_prints_all_measure_rows() {
    let dir = TempDir::new().unwrap();
    let output = run_in(
        dir.path(),
        &["bounds", "-k", "2", "-m", "2", "-n", "3", "--format", "csv"],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    for id in ["jain", "qf", "ent", "gini", "gini_w", "fsat", "vocd"] {
        assert!(
            stdout
                .lines()
                .any(|line| line.starts_with(&format!("{id},"))),
            "missing row {id} in: {stdout}"
        );
    }
}

#[test]
fn synth_output_scores_at_the_announced_extreme() {
    let dir = TempDir::new().unwrap();
    write(&dir, "catalog.txt", &numbered_catalog(5));

    let synth = run_in(
        dir.path(),
        &[
            "synth",
            "mostunfair",
            "repeatable",
            "-k",
            "2",
            "-m",
            "3",
            "-n",
            "5",
            "--output",
            "unfair.tsv",
        ],
    );
    assert!(synth.status.success(), "stderr: {}", stderr_of(&synth));

    let eval = run_in(
        dir.path(),
        &[
            "eval",
            "--run",
            "unfair.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "2",
            "--format",
            "csv",
        ],
    );
    assert!(eval.status.success(), "stderr: {}", stderr_of(&eval));
    let report = stdout_of(&eval);
    // Most-unfair repeatable: jain = k/n with corrected 0, gini corrected 1.
    assert!(
        report.contains("fairness,jain,0.4,higher,0.4,0.9,0,"),
        "{report}"
    );
    assert!(report.contains("fairness,gini,0.6,lower,0.6,0.13333333333333333,1,"));
}

#[test]
fn synth_nonrepeatable_respects_an_exclusion_file() {
    let dir = TempDir::new().unwrap();
    write(&dir, "excl.tsv", "u1\ti1\nu1\ti2\n");

    let output = run_in(
        dir.path(),
        &[
            "synth",
            "mostfair",
            "nonrepeatable",
            "-k",
            "2",
            "-m",
            "2",
            "-n",
            "4",
            "--exclusions",
            "excl.tsv",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(
        !stdout.contains("u1\ti1"),
        "u1 got an excluded item: {stdout}"
    );
    assert!(
        !stdout.contains("u1\ti2"),
        "u1 got an excluded item: {stdout}"
    );

    // Repeatable mode refuses exclusions outright.
    let rejected = run_in(
        dir.path(),
        &[
            "synth",
            "mostfair",
            "repeatable",
            "-k",
            "2",
            "-m",
            "2",
            "-n",
            "4",
            "--exclusions",
            "excl.tsv",
        ],
    );
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn window_reevaluates_at_the_window_width() {
    let dir = TempDir::new().unwrap();
    write(
        &dir,
        "deep.tsv",
        "user_id\titem_id\trank\n\
         u1\ti1\t1\nu1\ti2\t2\nu1\ti3\t3\n\
         u2\ti1\t1\nu2\ti4\t2\nu2\ti5\t3\n",
    );
    write(&dir, "catalog.txt", &numbered_catalog(10));

    let output = run_in(
        dir.path(),
        &[
            "window",
            "--run",
            "deep.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "3",
            "--start",
            "2",
            "--width",
            "2",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("\"k\": 2"), "{stdout}");

    let too_deep = run_in(
        dir.path(),
        &[
            "window",
            "--run",
            "deep.tsv",
            "--catalog",
            "catalog.txt",
            "-k",
            "3",
            "--start",
            "3",
            "--width",
            "2",
        ],
    );
    assert_eq!(too_deep.status.code(), Some(1));
}

#[test]
fn insert_sweep_emits_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let output = run_in(
        dir.path(),
        &[
            "insert",
            "le-relevant",
            "-m",
            "2",
            "-n",
            "4",
            "-k",
            "2",
            "--format",
            "csv",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1 + 3, "header plus k+1 steps: {stdout}");
    assert!(lines[0].starts_with("step,inserted_fraction,jain_value,jain_corrected"));
    assert!(lines[1].starts_with("0,0,"));
    assert!(lines[3].starts_with("2,1,"));
}

#[test]
fn correlate_computes_tau_and_significance() {
    let dir = TempDir::new().unwrap();
    write(
        &dir,
        "scores.csv",
        "measure,direction,s1,s2,s3,s4,s5,s6,s7\n\
         jain,higher,0.1,0.2,0.3,0.4,0.5,0.6,0.7\n\
         gini,lower,0.9,0.8,0.7,0.6,0.5,0.4,0.3\n",
    );
    let output = run_in(dir.path(), &["correlate", "--scores", "scores.csv"]);
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    // Lower-is-fairer scores are flipped before comparison, so these two
    // rankings agree perfectly, and 2/7! of the null is at least as extreme.
    assert!(stdout.contains("\"tau\": 1.0"), "{stdout}");
    assert!(stdout.contains("\"p_value\": 0.0003968"), "{stdout}");
    assert!(stdout.contains("\"significant\": true"), "{stdout}");
    assert!(stdout.contains("\"method\": \"benjamini_hochberg\""));

    let csv = run_in(
        dir.path(),
        &[
            "correlate",
            "--scores",
            "scores.csv",
            "--format",
            "csv",
            "--method",
            "holm",
        ],
    );
    assert!(csv.status.success());
    assert!(stdout_of(&csv).contains("jain,gini,1,0.0003968"));
}

#[test]
fn oracle_finds_extremes_and_honors_the_cap() {
    let dir = TempDir::new().unwrap();
    let output = run_in(
        dir.path(),
        &[
            "oracle",
            "--measure",
            "jain",
            "-k",
            "1",
            "-m",
            "2",
            "-n",
            "3",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("\"evaluated\": 9"), "{stdout}");
    assert!(
        stdout.contains("\"min_value\": 0.3333333333333333"),
        "{stdout}"
    );
    assert!(
        stdout.contains("\"max_value\": 0.6666666666666666"),
        "{stdout}"
    );

    let capped = run_in(
        dir.path(),
        &[
            "oracle",
            "--measure",
            "jain",
            "-k",
            "1",
            "-m",
            "2",
            "-n",
            "3",
            "--cap",
            "2",
        ],
    );
    assert_eq!(capped.status.code(), Some(3));
    assert!(stderr_of(&capped).contains("exceeds the cap"));

    let unknown = run_in(
        dir.path(),
        &[
            "oracle",
            "--measure",
            "sparkle",
            "-k",
            "1",
            "-m",
            "2",
            "-n",
            "3",
        ],
    );
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn usage_help_and_version_exit_codes() {
    let dir = TempDir::new().unwrap();
    let usage = run_in(dir.path(), &["no-such-command"]);
    assert_eq!(usage.status.code(), Some(1));

    let help = run_in(dir.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout_of(&help).contains("eval"));

    let version = run_in(dir.path(), &["--version"]);
    assert_eq!(version.status.code(), Some(0));

    let missing_flag = run_in(dir.path(), &["bounds", "-k", "2"]);
    assert_eq!(missing_flag.status.code(), Some(1));
}
