//! Command-line front end for the itemfair library.
//!
//! Subcommands map one-to-one onto library entry points: `eval` scores a
//! run file, `bounds` prints the closed-form extremes for a run shape,
//! `correlate` compares systems across measures, `synth`/`window`/`insert`
//! drive the synthetic experiments, and `oracle` brute-forces tiny run
//! spaces. Exit codes: 0 success, 1 validation or usage error, 2 degenerate
//! normalization (the corrected measures do not exist at this shape), 3
//! enumeration space over the cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itemfair::analysis::{correlation_matrix, CorrectionMethod};
use itemfair::bounds::bounds_report;
use itemfair::experiments::{
    insertion_sweep, most_fair, most_unfair, sliding_window, ExclusionSets, GeneratorMode,
    InsertionMode,
};
use itemfair::measures::SimilarityProvider;
use itemfair::model::{ItemCatalog, UserSet};
use itemfair::oracle::{enumerate_extremes, EnumerationSpec, OracleMeasure, DEFAULT_CAP};
use itemfair::report::{
    bounds_to_csv, correlation_to_csv, insertion_to_csv, insertion_to_json, oracle_report,
    oracle_to_csv, report_to_csv, to_json, Report,
};
use itemfair::tsv::{
    parse_catalog_str, parse_embeddings_str, parse_exclusions_str, parse_qrels_str, parse_run_str,
    parse_score_matrix_str, run_to_tsv,
};
use itemfair::{evaluate_fairness, evaluate_relevance, Error, EvalParams, LogBase};

#[derive(Parser)]
#[command(
    name = "itemfair",
    version,
    about = "Individual item fairness measures for top-k recommendation runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a run file with every fairness measure (and relevance, given qrels)
    Eval(EvalArgs),
    /// Closed-form most-fair and most-unfair scores for a run shape
    Bounds(BoundsArgs),
    /// Kendall rank correlations between measures over a system score matrix
    Correlate(CorrelateArgs),
    /// Generate a synthetic run at one of the fairness extremes
    Synth(SynthArgs),
    /// Evaluate a window of rank positions cut from a deeper run
    Window(WindowArgs),
    /// Score every step of the artificial-insertion experiment
    Insert(InsertArgs),
    /// Enumerate every run of a small shape to find a measure's true extremes
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

/// Parameters shared by the scoring subcommands. Defaults follow the
/// usual configuration: gamma 0.8, every recommended pair similar
/// (distance threshold 2), no tolerated disparity, entropy base n.
#[derive(Args)]
struct ScoringArgs {
    /// Patience of the rank-biased examination model, in (0, 1)
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    /// Cosine-distance threshold for similar pairs; only used with --embeddings
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Coverage disparity tolerated before a pair counts as a violation
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Entropy logarithm base: a number, or "n" for the catalog size
    #[arg(long, value_name = "BASE", value_parser = parse_log_base, default_value = "n")]
    log_base: LogBase,
    /// Item embeddings (TSV: item_id, v1..vd) for similarity-aware disparity
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
}

impl ScoringArgs {
    fn params(&self, catalog: &ItemCatalog) -> Result<EvalParams, Error> {
        let similarity = match &self.embeddings {
            Some(path) => {
                let table = parse_embeddings_str(&read(path)?, &display(path), catalog)?;
                SimilarityProvider::with_embeddings(table, self.alpha, self.beta)?
            }
            None => SimilarityProvider::all_similar(self.beta)?,
        };
        Ok(EvalParams {
            gamma: self.gamma,
            log_base: self.log_base,
            similarity,
        })
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Run file (TSV: user_id, item_id, rank and optionally round)
    #[arg(long, value_name = "FILE")]
    run: PathBuf,
    /// Catalog file: one item id per line, the full item universe
    #[arg(long, value_name = "FILE")]
    catalog: PathBuf,
    /// List cutoff; the run file must hold exactly k ranks per user and round
    #[arg(short = 'k', long = "cutoff", value_name = "K")]
    k: usize,
    /// Relevance judgments (TSV: user_id, item_id, rel with rel 0 or 1)
    #[arg(long, value_name = "FILE")]
    qrels: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BoundsArgs {
    /// List cutoff
    #[arg(short = 'k', long = "cutoff", value_name = "K")]
    k: usize,
    /// Number of users
    #[arg(short = 'm', long = "users", value_name = "M")]
    m: usize,
    /// Catalog size
    #[arg(short = 'n', long = "items", value_name = "N")]
    n: usize,
    /// Entropy logarithm base: a number, or "n" for the catalog size
    #[arg(long, value_name = "BASE", value_parser = parse_log_base, default_value = "n")]
    log_base: LogBase,
    /// Coverage disparity tolerated before a pair counts as a violation
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodFlag {
    /// Benjamini-Hochberg step-up (controls the false discovery rate)
    Bh,
    /// Bonferroni single-step
    Bonferroni,
    /// Holm step-down
    Holm,
}

impl From<MethodFlag> for CorrectionMethod {
    fn from(flag: MethodFlag) -> Self {
        match flag {
            MethodFlag::Bh => CorrectionMethod::BenjaminiHochberg,
            MethodFlag::Bonferroni => CorrectionMethod::Bonferroni,
            MethodFlag::Holm => CorrectionMethod::Holm,
        }
    }
}

#[derive(Args)]
struct CorrelateArgs {
    /// Score matrix (CSV: measure, direction, then one column per system)
    #[arg(long, value_name = "FILE")]
    scores: PathBuf,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Multiple-testing correction applied over the whole matrix
    #[arg(long, value_enum, default_value_t = MethodFlag::Bh)]
    method: MethodFlag,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SynthGoal {
    /// Spread exposure as evenly as the shape allows
    #[value(name = "mostfair")]
    MostFair,
    /// Concentrate exposure on as few items as the shape allows
    #[value(name = "mostunfair")]
    MostUnfair,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeFlag {
    /// Items may be recommended regardless of past interactions
    Repeatable,
    /// Per-user excluded items must not appear in that user's list
    #[value(name = "nonrepeatable")]
    NonRepeatable,
}

impl From<ModeFlag> for GeneratorMode {
    fn from(flag: ModeFlag) -> Self {
        match flag {
            ModeFlag::Repeatable => GeneratorMode::Repeatable,
            ModeFlag::NonRepeatable => GeneratorMode::NonRepeatable,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Which extreme to construct
    #[arg(value_enum)]
    goal: SynthGoal,
    /// Whether previously consumed items may be recommended again
    #[arg(value_enum)]
    mode: ModeFlag,
    /// List cutoff
    #[arg(short = 'k', long = "cutoff", value_name = "K")]
    k: usize,
    /// Number of synthetic users u1..uM
    #[arg(short = 'm', long = "users", value_name = "M")]
    m: usize,
    /// Size of a synthetic catalog i1..iN (alternative to --catalog)
    #[arg(
        short = 'n',
        long = "items",
        value_name = "N",
        conflicts_with = "catalog"
    )]
    n: Option<usize>,
    /// Catalog file: one item id per line
    #[arg(long, value_name = "FILE")]
    catalog: Option<PathBuf>,
    /// Non-recommendable items per user (TSV: user_id, item_id); nonrepeatable only
    #[arg(long, value_name = "FILE")]
    exclusions: Option<PathBuf>,
    /// Write the run TSV to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct WindowArgs {
    /// Run file holding lists at least start+width-1 deep
    #[arg(long, value_name = "FILE")]
    run: PathBuf,
    /// Catalog file: one item id per line
    #[arg(long, value_name = "FILE")]
    catalog: PathBuf,
    /// Depth of the run file (ranks per user and round)
    #[arg(short = 'k', long = "cutoff", value_name = "K")]
    k: usize,
    /// First rank of the window, 1-based
    #[arg(long)]
    start: usize,
    /// Number of ranks in the window; the windowed run is evaluated at this cutoff
    #[arg(long)]
    width: usize,
    /// Relevance judgments (TSV: user_id, item_id, rel with rel 0 or 1)
    #[arg(long, value_name = "FILE")]
    qrels: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InsertFlag {
    /// Insert low-exposure relevant items, most unfair to most fair
    LeRelevant,
    /// Insert max-exposure irrelevant items, most fair to most unfair
    MeIrrelevant,
}

impl From<InsertFlag> for InsertionMode {
    fn from(flag: InsertFlag) -> Self {
        match flag {
            InsertFlag::LeRelevant => InsertionMode::LowExposureRelevant,
            InsertFlag::MeIrrelevant => InsertionMode::MaxExposureIrrelevant,
        }
    }
}

#[derive(Args)]
struct InsertArgs {
    /// Direction of the sweep
    #[arg(value_enum)]
    mode: InsertFlag,
    /// Number of users; the catalog size must equal k * m
    #[arg(short = 'm', long = "users", value_name = "M", default_value_t = 1000)]
    m: usize,
    /// Catalog size
    #[arg(short = 'n', long = "items", value_name = "N", default_value_t = 10000)]
    n: usize,
    /// List cutoff; the sweep has k + 1 steps
    #[arg(short = 'k', long = "cutoff", value_name = "K", default_value_t = 10)]
    k: usize,
    /// Patience of the rank-biased examination model, in (0, 1)
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    /// Coverage disparity tolerated before a pair counts as a violation
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Entropy logarithm base: a number, or "n" for the catalog size
    #[arg(long, value_name = "BASE", value_parser = parse_log_base, default_value = "n")]
    log_base: LogBase,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Measure to enumerate: jain, qf, ent-def, gini, gini-w, fsat, vocd, iid or aid
    #[arg(long, value_name = "ID")]
    measure: String,
    /// List cutoff
    #[arg(short = 'k', long = "cutoff", value_name = "K")]
    k: usize,
    /// Number of users
    #[arg(short = 'm', long = "users", value_name = "M")]
    m: usize,
    /// Catalog size
    #[arg(short = 'n', long = "items", value_name = "N")]
    n: usize,
    /// Number of recommendation rounds
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    /// Coverage disparity tolerance (vocd only)
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Examination patience (iid and aid only)
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    /// Refuse to enumerate spaces larger than this many runs
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u128,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_log_base(text: &str) -> Result<LogBase, String> {
    if text == "n" {
        return Ok(LogBase::CatalogSize);
    }
    text.parse::<f64>()
        .map(LogBase::Fixed)
        .map_err(|_| format!("expected a number or \"n\", got {text:?}"))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|err| Error::Invalid(format!("{}: {err}", path.display())))
}

fn emit(out: &OutputArgs, text: String) -> Result<(), Error> {
    write_text(out.output.as_deref(), text)
}

fn write_text(path: Option<&Path>, text: String) -> Result<(), Error> {
    match path {
        Some(path) => fs::write(path, text)
            .map_err(|err| Error::Invalid(format!("{}: {err}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let catalog = parse_catalog_str(&read(&args.catalog)?, &display(&args.catalog))?;
    if args.k == catalog.len() {
        return Err(Error::DegenerateNormalization {
            context: format!(
                "cutoff k={} equals the catalog size, so every valid run recommends \
                 the whole catalog equally",
                args.k
            ),
        });
    }
    let (users, run) = parse_run_str(&read(&args.run)?, &display(&args.run), &catalog, args.k)?;
    let params = args.scoring.params(&catalog)?;
    let fairness = evaluate_fairness(&run, &catalog, &params)?;
    let relevance = match &args.qrels {
        Some(path) => {
            let judgments = parse_qrels_str(&read(path)?, &display(path), &users, &catalog)?;
            Some(evaluate_relevance(&run, &judgments)?)
        }
        None => None,
    };
    let report = Report::build(&run, &params, fairness, relevance.as_ref())?;
    let text = match args.out.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => report_to_csv(&report),
    };
    emit(&args.out, text)
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), Error> {
    let base = args.log_base.resolve(args.n)?;
    let report = bounds_report(args.k, args.m, args.n, base, args.beta)?;
    let text = match args.out.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => bounds_to_csv(&report),
    };
    emit(&args.out, text)
}

fn cmd_correlate(args: CorrelateArgs) -> Result<(), Error> {
    let scores = parse_score_matrix_str(&read(&args.scores)?, &display(&args.scores))?;
    let matrix = correlation_matrix(&scores, args.alpha, args.method.into())?;
    let text = match args.out.format {
        OutputFormat::Json => to_json(&matrix),
        OutputFormat::Csv => correlation_to_csv(&matrix),
    };
    emit(&args.out, text)
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    if args.m == 0 {
        return Err(Error::Invalid("user count must be at least 1".into()));
    }
    let catalog = match (&args.catalog, args.n) {
        (Some(path), None) => parse_catalog_str(&read(path)?, &display(path))?,
        (None, Some(0)) => return Err(Error::Invalid("catalog size must be at least 1".into())),
        (None, Some(n)) => ItemCatalog::numbered(n),
        (None, None) => {
            return Err(Error::Invalid(
                "give a catalog size with --items or a catalog file with --catalog".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("--items conflicts with --catalog"),
    };
    let users = UserSet::numbered(args.m);
    let exclusions = match &args.exclusions {
        Some(path) => parse_exclusions_str(&read(path)?, &display(path), &users, &catalog)?,
        None => ExclusionSets::none(users.len()),
    };
    let run = match args.goal {
        SynthGoal::MostFair => most_fair(args.k, &users, &catalog, args.mode.into(), &exclusions)?,
        SynthGoal::MostUnfair => {
            most_unfair(args.k, &users, &catalog, args.mode.into(), &exclusions)?
        }
    };
    write_text(args.output.as_deref(), run_to_tsv(&run, &users, &catalog))
}

fn cmd_window(args: WindowArgs) -> Result<(), Error> {
    let catalog = parse_catalog_str(&read(&args.catalog)?, &display(&args.catalog))?;
    if args.width == catalog.len() {
        return Err(Error::DegenerateNormalization {
            context: format!(
                "window width {} equals the catalog size, so every valid window \
                 recommends the whole catalog equally",
                args.width
            ),
        });
    }
    let (users, deep) = parse_run_str(&read(&args.run)?, &display(&args.run), &catalog, args.k)?;
    let windowed = sliding_window(&deep, args.start, args.width)?;
    let params = args.scoring.params(&catalog)?;
    let fairness = evaluate_fairness(&windowed, &catalog, &params)?;
    let relevance = match &args.qrels {
        Some(path) => {
            let judgments = parse_qrels_str(&read(path)?, &display(path), &users, &catalog)?;
            Some(evaluate_relevance(&windowed, &judgments)?)
        }
        None => None,
    };
    let report = Report::build(&windowed, &params, fairness, relevance.as_ref())?;
    let text = match args.out.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => report_to_csv(&report),
    };
    emit(&args.out, text)
}

fn cmd_insert(args: InsertArgs) -> Result<(), Error> {
    let similarity = SimilarityProvider::all_similar(args.beta)?;
    let params = EvalParams {
        gamma: args.gamma,
        log_base: args.log_base,
        similarity,
    };
    let points = insertion_sweep(args.m, args.n, args.k, args.mode.into(), &params)?;
    let text = match args.out.format {
        OutputFormat::Json => insertion_to_json(&points),
        OutputFormat::Csv => insertion_to_csv(&points),
    };
    emit(&args.out, text)
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Error> {
    let measure = OracleMeasure::from_id(&args.measure, args.beta, args.gamma)?;
    let spec =
        EnumerationSpec::new(args.k, args.m, args.n, args.rounds, measure).with_cap(args.cap);
    let result = enumerate_extremes(&spec)?;
    let report = oracle_report(&spec, &result);
    let text = match args.out.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => oracle_to_csv(&report),
    };
    emit(&args.out, text)
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Eval(args) => cmd_eval(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Window(args) => cmd_window(args),
        Command::Insert(args) => cmd_insert(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::DegenerateNormalization { .. } => 2,
        Error::SpaceTooLarge { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
