//! Item-exposure fairness for top-k recommendation runs.
//!
//! A run assigns each of m users an ordered list of k distinct items from
//! an n-item catalog, possibly over several rounds. This crate measures
//! how evenly such a run spreads exposure over the catalog:
//!
//! - eight original measures (Jain index, coverage, entropy, Gini,
//!   rank-weighted Gini, satisfaction fraction, coverage-disparity
//!   violation, and two exposure-divergence measures),
//! - closed-form most-fair and most-unfair scores achievable at a given
//!   (k, m, n) shape, and corrected measures that min-max normalize the
//!   originals between those endpoints,
//! - a brute-force oracle that enumerates every run of a tiny shape to
//!   verify the closed forms independently,
//! - binary relevance scoring (hit rate, MRR, precision, recall, MAP,
//!   NDCG) to study how fairness and relevance move together,
//! - rank-agreement analysis (Kendall's tau, significance, multiple-
//!   testing corrections) across systems,
//! - synthetic experiments: extreme-run generators, sliding windows, and
//!   step-by-step item-insertion sweeps,
//! - tab-separated file formats and deterministic JSON/CSV reports.

pub mod analysis;
pub mod bounds;
pub mod error;
pub mod eval;
pub mod exam;
pub mod experiments;
pub mod exposure;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod relevance;
pub mod report;
pub mod tsv;

pub use error::{Error, Result};
pub use eval::{evaluate_fairness, EvalParams, FairnessSummary, LogBase};
pub use exam::ExaminationFunction;
pub use exposure::{build_exposure, build_user_item_exposure, ExposureTable, UserItemExposure};
pub use measures::Direction;
pub use model::{ItemCatalog, RelevanceJudgments, TopKRun, UserSet};
pub use relevance::{evaluate_relevance, RelevanceSummary};
