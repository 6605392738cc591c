//! Beta-posterior reputation.
//!
//! Each rater/ratee pair is summarized by its positive and negative counts
//! `(p, n)`. The pair's expected value is the mean of `Beta(p + 1, n + 1)`,
//! i.e. `(p + 1) / (p + n + 2)`, and a node's reputation is the sum of the
//! expected values of every rater that holds non-excluded evidence about it.
//! Nodes are ranked by that sum; the head of the ranking is the expert.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{categorize, Dataset, InteractionRecord, NodeId, Polarity, RatingScale};

/// Positive (`p`) and negative (`n`) interaction counts for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PairCounts {
    pub p: u64,
    pub n: u64,
}

impl PairCounts {
    pub fn new(p: u64, n: u64) -> Self {
        PairCounts { p, n }
    }

    pub fn total(&self) -> u64 {
        self.p + self.n
    }
}

/// Mean of the beta posterior; always strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ExpectedValue(f64);

impl ExpectedValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<ExpectedValue> for f64 {
    fn from(v: ExpectedValue) -> f64 {
        v.0
    }
}

pub fn expected_value(counts: PairCounts) -> ExpectedValue {
    let (num, den) = expected_value_ratio(counts);
    // a single division of two exactly representable integers is correctly rounded
    ExpectedValue(num as f64 / den as f64)
}

/// `expected_value` as an exact `(numerator, denominator)` pair.
pub fn expected_value_ratio(counts: PairCounts) -> (u64, u64) {
    (counts.p + 1, counts.p + counts.n + 2)
}

/// How much of a pair's history is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HistoryWindow {
    All,
    /// The `k` most recent interactions of each pair (`k >= 1`).
    Latest(usize),
}

impl HistoryWindow {
    pub fn latest(k: usize) -> Result<Self, WindowParseError> {
        if k == 0 {
            Err(WindowParseError::ZeroLength)
        } else {
            Ok(HistoryWindow::Latest(k))
        }
    }

    fn keep(&self, len: usize) -> usize {
        match *self {
            HistoryWindow::All => len,
            HistoryWindow::Latest(k) => k.min(len),
        }
    }
}

impl fmt::Display for HistoryWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistoryWindow::All => f.write_str("all"),
            HistoryWindow::Latest(k) => write!(f, "latest:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WindowParseError {
    #[error("window length must be at least 1")]
    ZeroLength,
    #[error("expected `all` or `latest:<k>`, got `{0}`")]
    Malformed(String),
}

impl FromStr for HistoryWindow {
    type Err = WindowParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(HistoryWindow::All);
        }
        let k = s
            .strip_prefix("latest:")
            .and_then(|k| k.parse::<usize>().ok())
            .ok_or_else(|| WindowParseError::Malformed(s.to_owned()))?;
        HistoryWindow::latest(k)
    }
}

impl Serialize for HistoryWindow {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HistoryWindow {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which polarities contribute evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvidenceMode {
    #[default]
    Both,
    /// Beta interactions are ignored as if they were excluded.
    PositiveOnly,
}

/// Windowed view of one pair's history, returned in ascending `seq_index` order.
pub fn apply_window(records: &[InteractionRecord], window: HistoryWindow) -> Vec<InteractionRecord> {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| r.seq_index);
    let skip = sorted.len() - window.keep(sorted.len());
    sorted.split_off(skip)
}

fn windowed(sorted: &[InteractionRecord], window: HistoryWindow) -> &[InteractionRecord] {
    &sorted[sorted.len() - window.keep(sorted.len())..]
}

pub fn pair_counts(
    records: &[InteractionRecord],
    scale: &RatingScale,
    window: HistoryWindow,
) -> Result<PairCounts> {
    count(&apply_window(records, window), scale, EvidenceMode::Both)
}

fn count(records: &[InteractionRecord], scale: &RatingScale, mode: EvidenceMode) -> Result<PairCounts> {
    let mut counts = PairCounts::default();
    for r in records {
        match (categorize(r.weight, scale)?, mode) {
            (Polarity::Alpha, _) => counts.p += 1,
            (Polarity::Beta, EvidenceMode::Both) => counts.n += 1,
            _ => {}
        }
    }
    Ok(counts)
}

/// Aggregate reputation of one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReputationScore {
    pub node: NodeId,
    pub reputation: f64,
    pub contributing_raters: usize,
}

impl ReputationScore {
    /// Mean per-pair expected value, or `None` when no rater contributed.
    pub fn mean_expected_value(&self) -> Option<f64> {
        (self.contributing_raters > 0).then(|| self.reputation / self.contributing_raters as f64)
    }
}

/// All nodes ordered by descending reputation, ties by ascending identifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RankedList(Vec<ReputationScore>);

impl RankedList {
    fn from_scores(mut scores: Vec<ReputationScore>) -> Self {
        scores.sort_by(|a, b| {
            b.reputation
                .total_cmp(&a.reputation)
                .then_with(|| a.node.cmp(&b.node))
        });
        RankedList(scores)
    }

    pub fn entries(&self) -> &[ReputationScore] {
        &self.0
    }

    pub fn expert(&self) -> Option<&ReputationScore> {
        self.0.first()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, node: &NodeId) -> Option<&ReputationScore> {
        self.0.iter().find(|s| &s.node == node)
    }

    /// Per-node mean pair expected value for every node with at least one contributing rater.
    pub fn mean_expected_values(&self) -> BTreeMap<NodeId, f64> {
        self.0
            .iter()
            .filter_map(|s| s.mean_expected_value().map(|v| (s.node.clone(), v)))
            .collect()
    }
}

fn score_node(
    dataset: &Dataset,
    index: usize,
    window: HistoryWindow,
    mode: EvidenceMode,
) -> Result<ReputationScore> {
    let mut reputation = 0.0;
    let mut contributing_raters = 0;
    // spans are in ascending rater order, so the summation order is fixed
    for span in dataset.incoming_spans(index) {
        let history = windowed(&dataset.records()[span.records.clone()], window);
        let counts = count(history, dataset.scale(), mode)?;
        if counts.total() > 0 {
            reputation += expected_value(counts).value();
            contributing_raters += 1;
        }
    }
    Ok(ReputationScore {
        node: dataset.nodes()[index].clone(),
        reputation,
        contributing_raters,
    })
}

pub fn node_reputation(node: &NodeId, dataset: &Dataset, window: HistoryWindow) -> Result<ReputationScore> {
    let index = dataset
        .node_index(node)
        .ok_or_else(|| Error::NodeNotFound(node.clone()))?;
    score_node(dataset, index, window, EvidenceMode::Both)
}

pub fn rank_all(dataset: &Dataset, window: HistoryWindow) -> Result<RankedList> {
    rank_all_with(dataset, window, EvidenceMode::Both)
}

pub fn rank_all_with(dataset: &Dataset, window: HistoryWindow, mode: EvidenceMode) -> Result<RankedList> {
    rank(dataset, window, mode, true)
}

pub(crate) fn rank(
    dataset: &Dataset,
    window: HistoryWindow,
    mode: EvidenceMode,
    parallel: bool,
) -> Result<RankedList> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scores = if parallel {
        (0..dataset.len())
            .into_par_iter()
            .map(|i| score_node(dataset, i, window, mode))
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..dataset.len())
            .map(|i| score_node(dataset, i, window, mode))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(RankedList::from_scores(scores))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub window: HistoryWindow,
    pub score: ReputationScore,
}

/// Reputation of `node` under each of `windows`.
pub fn dynamic_profile(node: &NodeId, dataset: &Dataset, windows: &[HistoryWindow]) -> Result<Vec<ProfileEntry>> {
    if dataset.incoming_by_rater(node)?.is_empty() {
        return Err(Error::NoHistory(node.clone()));
    }
    windows
        .iter()
        .map(|&window| {
            Ok(ProfileEntry {
                window,
                score: node_reputation(node, dataset, window)?,
            })
        })
        .collect()
}
