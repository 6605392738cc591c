//! Evaluation protocol: ranking-match (MAE, precision@k), interaction
//! categorization (perturbation, overlap, top-k variance) and dynamic
//! behavior over history windows.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use serde::Serialize;

use crate::baselines::{ndr_reputation, pagerank, BaselineScores, PageRankConfig};
use crate::error::{Error, Result};
use crate::model::{Dataset, NodeId};
use crate::reputation::{
    dynamic_profile, rank_all, rank_all_with, EvidenceMode, HistoryWindow, RankedList,
};

/// Anything that orders nodes by a score.
pub trait Ranking {
    /// Nodes with their scores, best first.
    fn ranked(&self) -> Vec<(&NodeId, f64)>;

    fn top_nodes(&self, k: usize) -> Vec<&NodeId> {
        self.ranked().into_iter().take(k).map(|(n, _)| n).collect()
    }
}

impl Ranking for RankedList {
    fn ranked(&self) -> Vec<(&NodeId, f64)> {
        self.entries().iter().map(|s| (&s.node, s.reputation)).collect()
    }
}

impl Ranking for BaselineScores {
    fn ranked(&self) -> Vec<(&NodeId, f64)> {
        self.entries().iter().map(|(n, s)| (n, *s)).collect()
    }
}

/// Reference values: each rated node's normalized mean incoming rating.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub values: BTreeMap<NodeId, f64>,
    /// The `k` highest values, identifier tie-break.
    pub top_k: Vec<NodeId>,
}

impl GroundTruth {
    /// Builds ground truth directly from values.
    pub fn from_values(values: BTreeMap<NodeId, f64>, k: usize) -> Self {
        let mut order: Vec<_> = values.iter().collect();
        order.sort_by(|a, b| b.1.total_cmp(a.1).then_with(|| a.0.cmp(b.0)));
        let top_k = order.into_iter().take(k).map(|(n, _)| n.clone()).collect();
        GroundTruth { values, top_k }
    }
}

pub fn ground_truth(dataset: &Dataset, k: usize) -> Result<GroundTruth> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let scale = dataset.scale();
    let mut sums: BTreeMap<&NodeId, (i64, usize)> = BTreeMap::new();
    for r in dataset.records() {
        if scale.is_valid_rating(r.weight) {
            let e = sums.entry(&r.ratee).or_default();
            e.0 += r.weight;
            e.1 += 1;
        }
    }
    if sums.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let span = (scale.max_valid() - scale.min_valid()) as f64;
    let values = sums
        .into_iter()
        .map(|(node, (sum, count))| {
            let mean = sum as f64 / count as f64;
            (node.clone(), (mean - scale.min_valid() as f64) / span)
        })
        .collect();
    Ok(GroundTruth::from_values(values, k))
}

/// Mean absolute error over the shared key set.
pub fn mae(predicted: &BTreeMap<NodeId, f64>, truth: &GroundTruth) -> Result<f64> {
    let p: BTreeSet<_> = predicted.keys().collect();
    let t: BTreeSet<_> = truth.values.keys().collect();
    if p != t {
        return Err(Error::KeyMismatch {
            only_predicted: p.difference(&t).map(|&n| n.clone()).collect(),
            only_truth: t.difference(&p).map(|&n| n.clone()).collect(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let total: f64 = predicted
        .iter()
        .map(|(node, v)| (v - truth.values[node]).abs())
        .sum();
    Ok(total / predicted.len() as f64)
}

/// Min-max rescales the scores of `keys` onto `[0, 1]`; a constant score maps to 0.5.
pub fn min_max_normalize(scores: &BaselineScores, keys: impl IntoIterator<Item = NodeId>) -> BTreeMap<NodeId, f64> {
    let picked: Vec<(NodeId, f64)> = keys
        .into_iter()
        .map(|n| {
            let s = scores.get(&n).unwrap_or(0.0);
            (n, s)
        })
        .collect();
    let lo = picked.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = picked.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    picked
        .into_iter()
        .map(|(n, s)| {
            let v = if hi > lo { (s - lo) / (hi - lo) } else { 0.5 };
            (n, v)
        })
        .collect()
}

fn clamp_k(k: usize, available: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if k > available {
        warn!("k = {k} exceeds the {available} ranked nodes; clamping");
        return Ok(available.max(1));
    }
    Ok(k)
}

/// Fraction of the ranking's top `k` that also sits in the ground-truth top set.
pub fn precision_at_k(ranked: &impl Ranking, truth: &GroundTruth, k: usize) -> Result<f64> {
    let entries = ranked.ranked();
    let k = clamp_k(k, entries.len())?;
    let truth_top: BTreeSet<_> = truth.top_k.iter().take(k).collect();
    let hits = entries
        .iter()
        .take(k)
        .filter(|(n, _)| truth_top.contains(n))
        .count();
    Ok(hits as f64 / k as f64)
}

/// Precision@k with ties resolved in expectation: a group of equal scores
/// (within `tie_tolerance`) straddling the cutoff contributes its hits in
/// proportion to the slots it fills, as if tied nodes were ordered at random.
pub fn tie_aware_precision_at_k(
    ranked: &impl Ranking,
    truth: &GroundTruth,
    k: usize,
    tie_tolerance: f64,
) -> Result<f64> {
    let entries = ranked.ranked();
    if entries.is_empty() {
        return Err(Error::TooFewEntries { needed: 1, available: 0 });
    }
    let k = clamp_k(k, entries.len())?;
    let truth_top: BTreeSet<_> = truth.top_k.iter().take(k).collect();
    let mut expected_hits = 0.0;
    let mut filled = 0;
    let mut start = 0;
    while filled < k {
        let mut end = start + 1;
        while end < entries.len() && (entries[start].1 - entries[end].1).abs() <= tie_tolerance {
            end += 1;
        }
        let group = &entries[start..end];
        let hits = group.iter().filter(|(n, _)| truth_top.contains(n)).count() as f64;
        let slots = (k - filled).min(group.len());
        expected_hits += hits * slots as f64 / group.len() as f64;
        filled += slots;
        start = end;
    }
    Ok(expected_hits / k as f64)
}

/// Reflects every valid rating received by `target` across the scale
/// (`w -> min + max - w`). Unknown markers and all other records are untouched.
pub fn perturb_flip_incoming(dataset: &Dataset, target: &NodeId) -> Result<Dataset> {
    let incoming = dataset.incoming_by_rater(target)?;
    let scale = *dataset.scale();
    let has_valid = incoming
        .iter()
        .flat_map(|(_, recs)| recs.iter())
        .any(|r| scale.is_valid_rating(r.weight));
    if !has_valid {
        return Err(Error::NoHistory(target.clone()));
    }
    Ok(dataset.map_weights(|r| {
        if &r.ratee == target {
            scale.reflect(r.weight)
        } else {
            r.weight
        }
    }))
}

/// Fraction of shared members between two equal-length node lists.
pub fn overlap(list_a: &[NodeId], list_b: &[NodeId]) -> Result<f64> {
    if list_a.len() != list_b.len() {
        return Err(Error::LengthMismatch {
            left: list_a.len(),
            right: list_b.len(),
        });
    }
    if list_a.is_empty() {
        return Ok(1.0);
    }
    let a: BTreeSet<_> = list_a.iter().collect();
    let shared = list_b.iter().collect::<BTreeSet<_>>().intersection(&a).count();
    Ok(shared as f64 / list_a.len() as f64)
}

/// Population variance of the top `k` scores.
pub fn variance_of_top(ranked: &impl Ranking, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let entries = ranked.ranked();
    if entries.len() < k {
        return Err(Error::TooFewEntries {
            needed: k,
            available: entries.len(),
        });
    }
    let top: Vec<f64> = entries.iter().take(k).map(|e| e.1).collect();
    let mean = top.iter().sum::<f64>() / k as f64;
    Ok(top.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Label recorded in the report metadata.
    pub dataset_id: String,
    pub k: usize,
    pub window: HistoryWindow,
    pub pagerank: PageRankConfig,
    /// Node whose incoming ratings are reflected for the categorization test.
    pub perturb_target: Option<NodeId>,
    /// Windows for the dynamic-behavior profile of the EER expert.
    pub dynamic_windows: Vec<HistoryWindow>,
    /// Size of the head used for the top-k variance check.
    pub variance_k: usize,
    /// Recorded in the report metadata when the dataset came from the generator.
    pub seed: Option<u64>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            dataset_id: "dataset".into(),
            k: 10,
            window: HistoryWindow::All,
            pagerank: PageRankConfig::default(),
            perturb_target: None,
            dynamic_windows: vec![
                HistoryWindow::All,
                HistoryWindow::Latest(1),
                HistoryWindow::Latest(3),
                HistoryWindow::Latest(5),
                HistoryWindow::Latest(7),
            ],
            variance_k: 3,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub dataset: String,
    pub window: HistoryWindow,
    pub threshold: f64,
    pub seed: Option<u64>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationOutcome {
    pub target: NodeId,
    pub argmax_before: Option<NodeId>,
    pub argmax_after: Option<NodeId>,
    /// Largest per-node absolute score change.
    pub max_score_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorizationOutcome {
    pub positive_only_mae: f64,
    pub positive_only_top_k_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub window: HistoryWindow,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub method: String,
    pub run: RunMetadata,
    pub mae: f64,
    pub precision_at_k: f64,
    pub overlap: Option<f64>,
    pub top_k_variance: Option<f64>,
    pub converged: bool,
    pub ranking: Vec<(NodeId, f64)>,
    pub perturbation: Option<PerturbationOutcome>,
    pub categorization: Option<CategorizationOutcome>,
    pub dynamic_profile: Option<Vec<ProfilePoint>>,
}

/// Per-node mean pair expected value for every node of `truth`; nodes whose
/// windowed history holds no evidence fall back to the 0.5 prior.
fn eer_predictions(ranked: &RankedList, truth: &GroundTruth) -> BTreeMap<NodeId, f64> {
    let means = ranked.mean_expected_values();
    truth
        .values
        .keys()
        .map(|n| (n.clone(), means.get(n).copied().unwrap_or(0.5)))
        .collect()
}

fn ranking_pairs(r: &impl Ranking) -> Vec<(NodeId, f64)> {
    r.ranked().into_iter().map(|(n, s)| (n.clone(), s)).collect()
}

fn max_change(before: &impl Ranking, after: &impl Ranking) -> f64 {
    let after: BTreeMap<_, _> = after.ranked().into_iter().collect();
    before
        .ranked()
        .into_iter()
        .map(|(n, s)| (s - after.get(n).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn perturbation<R: Ranking>(
    target: &NodeId,
    before: &R,
    after: &R,
) -> PerturbationOutcome {
    PerturbationOutcome {
        target: target.clone(),
        argmax_before: before.top_nodes(1).first().map(|&n| n.clone()),
        argmax_after: after.top_nodes(1).first().map(|&n| n.clone()),
        max_score_change: max_change(before, after),
    }
}

/// Runs every test of the protocol for EER and both baselines; one report per method.
pub fn run_protocol(dataset: &Dataset, config: &ProtocolConfig) -> Result<Vec<EvaluationReport>> {
    config.pagerank.validate().map_err(Error::InvalidScale)?;
    let truth = ground_truth(dataset, config.k)?;
    let perturbed = config
        .perturb_target
        .as_ref()
        .map(|t| perturb_flip_incoming(dataset, t).map(|d| (t, d)))
        .transpose()?;
    let run = RunMetadata {
        dataset: config.dataset_id.clone(),
        window: config.window,
        threshold: dataset.scale().threshold(),
        seed: config.seed,
        k: config.k,
    };
    let head = config.k.min(dataset.len());
    let variance_k = config.variance_k.min(dataset.len());

    // EER
    let both = rank_all(dataset, config.window)?;
    let positive = rank_all_with(dataset, config.window, EvidenceMode::PositiveOnly)?;
    let to_owned = |v: Vec<&NodeId>| v.into_iter().cloned().collect::<Vec<_>>();
    let eer_perturbation = match &perturbed {
        Some((t, d)) => Some(perturbation(t, &both, &rank_all(d, config.window)?)),
        None => None,
    };
    let profile = match both.expert() {
        Some(expert) if expert.contributing_raters > 0 && !config.dynamic_windows.is_empty() => Some(
            dynamic_profile(&expert.node, dataset, &config.dynamic_windows)?
                .into_iter()
                .map(|e| ProfilePoint {
                    window: e.window,
                    value: e.score.reputation,
                })
                .collect(),
        ),
        _ => None,
    };
    let eer = EvaluationReport {
        method: "EER".into(),
        run: run.clone(),
        mae: mae(&eer_predictions(&both, &truth), &truth)?,
        precision_at_k: precision_at_k(&both, &truth, config.k)?,
        overlap: Some(overlap(
            &to_owned(positive.top_nodes(head)),
            &to_owned(both.top_nodes(head)),
        )?),
        top_k_variance: Some(variance_of_top(&both, variance_k)?),
        converged: true,
        ranking: ranking_pairs(&both),
        perturbation: eer_perturbation,
        categorization: Some(CategorizationOutcome {
            positive_only_mae: mae(&eer_predictions(&positive, &truth), &truth)?,
            positive_only_top_k_variance: variance_of_top(&positive, variance_k)?,
        }),
        dynamic_profile: profile,
    };

    let baseline = |name: &str, compute: &dyn Fn(&Dataset) -> BaselineScores| -> Result<EvaluationReport> {
        let scores = compute(dataset);
        let predicted = min_max_normalize(&scores, truth.values.keys().cloned());
        Ok(EvaluationReport {
            method: name.into(),
            run: run.clone(),
            mae: mae(&predicted, &truth)?,
            precision_at_k: precision_at_k(&scores, &truth, config.k)?,
            overlap: None,
            top_k_variance: None,
            converged: scores.converged,
            ranking: ranking_pairs(&scores),
            perturbation: perturbed
                .as_ref()
                .map(|(t, d)| perturbation(t, &scores, &compute(d))),
            categorization: None,
            dynamic_profile: None,
        })
    };
    let bl1 = baseline("BL1-PageRank", &|d| pagerank(d, &config.pagerank))?;
    let bl2 = baseline("BL2-NDR", &|d| ndr_reputation(d))?;
    Ok(vec![eer, bl1, bl2])
}

/// Normalized mean incoming rating of one node; `None` if it has no valid ratings.
pub fn real_value(dataset: &Dataset, node: &NodeId) -> Result<Option<f64>> {
    let scale = dataset.scale();
    let weights: Vec<i64> = dataset
        .incoming_by_rater(node)?
        .into_iter()
        .flat_map(|(_, recs)| recs.iter().map(|r| r.weight))
        .filter(|&w| scale.is_valid_rating(w))
        .collect();
    if weights.is_empty() {
        return Ok(None);
    }
    let mean = weights.iter().sum::<i64>() as f64 / weights.len() as f64;
    Ok(Some(
        (mean - scale.min_valid() as f64) / (scale.max_valid() - scale.min_valid()) as f64,
    ))
}
