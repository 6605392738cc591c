//! Expert ranking from peer interactions using beta-posterior reputation.
//!
//! Ratings are categorized as positive, negative or excluded against a
//! threshold, tallied per rater/ratee pair, turned into the posterior mean
//! `(p + 1) / (p + n + 2)` and summed per node. The crate also ships two
//! baseline rankers, an evaluation harness, dataset loaders, a scenario
//! generator and a CLI.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod model;
pub mod report;
pub mod reputation;
pub mod scenario;

pub use baselines::{ndr_reputation, pagerank, BaselineScores, PageRankConfig};
pub use error::{Error, Result};
pub use evaluation::{
    ground_truth, mae, overlap, perturb_flip_incoming, precision_at_k, run_protocol, variance_of_top,
    EvaluationReport, GroundTruth, ProtocolConfig, Ranking,
};
pub use model::{categorize, normalize_weight, validate_dataset, Dataset, InteractionRecord, NodeId, Polarity, RatingScale};
pub use reputation::{
    apply_window, dynamic_profile, expected_value, node_reputation, pair_counts, rank_all, ExpectedValue,
    HistoryWindow, PairCounts, RankedList, ReputationScore,
};
pub use scenario::{generate_scenario, ScenarioSpec};
