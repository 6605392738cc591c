//! Comparison rankers: structure-only PageRank and a normal-distribution
//! reputation score over density-weighted mean received ratings.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::model::{Dataset, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    /// L1 change between iterations below which the iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Use raw rating weights as transition weights instead of edge presence.
    pub weighted: bool,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tolerance: 1e-8,
            max_iterations: 200,
            weighted: false,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(format!("damping {} must lie in (0, 1)", self.damping));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(format!("tolerance {} must be positive", self.tolerance));
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be positive".into());
        }
        Ok(())
    }
}

/// Scores from a baseline ranker, ordered like a [`RankedList`](crate::reputation::RankedList):
/// descending score, ties by ascending identifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineScores {
    scores: Vec<(NodeId, f64)>,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the scores carry no information (no edges, or a zero-variance population).
    pub degenerate: bool,
}

impl BaselineScores {
    fn new(nodes: &[NodeId], values: Vec<f64>) -> Self {
        let mut scores: Vec<_> = nodes.iter().cloned().zip(values).collect();
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        BaselineScores {
            scores,
            converged: true,
            iterations: 0,
            degenerate: false,
        }
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.scores
    }

    pub fn get(&self, node: &NodeId) -> Option<f64> {
        self.scores.iter().find(|(n, _)| n == node).map(|&(_, s)| s)
    }

    pub fn top(&self) -> Option<&NodeId> {
        self.scores.first().map(|(n, _)| n)
    }
}

struct Graph {
    // in_edges[v] = (source, transition weight)
    in_edges: Vec<Vec<(usize, f64)>>,
    out_weight: Vec<f64>,
}

fn build_graph(dataset: &Dataset, weighted: bool) -> Graph {
    let n = dataset.len();
    let mut in_edges = vec![Vec::new(); n];
    let mut out_weight = vec![0.0; n];
    for (ratee, edges) in in_edges.iter_mut().enumerate() {
        for span in dataset.incoming_spans(ratee) {
            let mut present = false;
            let mut weight = 0.0;
            for r in &dataset.records()[span.records.clone()] {
                if r.weight != dataset.scale().unknown_value() {
                    present = true;
                    weight += r.weight.max(0) as f64;
                }
            }
            if present {
                let w = if weighted { weight } else { 1.0 };
                edges.push((span.rater, w));
                out_weight[span.rater] += w;
            }
        }
    }
    Graph { in_edges, out_weight }
}

/// Stationary vector of the damped random walk, before zeroing unrated nodes.
fn power_iteration(graph: &Graph, config: &PageRankConfig) -> (Vec<f64>, bool, usize) {
    let n = graph.out_weight.len();
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    for iteration in 1..=config.max_iterations {
        let dangling: f64 = rank
            .iter()
            .zip(&graph.out_weight)
            .filter(|(_, &w)| w <= 0.0)
            .map(|(r, _)| r)
            .sum();
        let base = (1.0 - config.damping) * uniform + config.damping * dangling * uniform;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = graph.in_edges[v]
                .iter()
                .filter(|&&(u, _)| graph.out_weight[u] > 0.0)
                .map(|&(u, w)| rank[u] * w / graph.out_weight[u])
                .sum();
            *slot = base + config.damping * inflow;
        }
        let delta: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < config.tolerance {
            return (rank, true, iteration);
        }
    }
    (rank, false, config.max_iterations)
}

/// PageRank over the graph with an edge `r -> e` whenever `r` holds a
/// non-excluded rating of `e`.
///
/// Nodes without incoming edges score 0 and the rest are rescaled to sum
/// to one. A graph with no edges at all yields the uniform distribution and
/// is flagged degenerate.
pub fn pagerank(dataset: &Dataset, config: &PageRankConfig) -> BaselineScores {
    let n = dataset.len();
    if n == 0 {
        return BaselineScores::new(&[], vec![]);
    }
    let graph = build_graph(dataset, config.weighted);
    let (mut rank, converged, iterations) = power_iteration(&graph, config);

    let has_incoming: Vec<bool> = graph.in_edges.iter().map(|e| !e.is_empty()).collect();
    let degenerate = !has_incoming.iter().any(|&b| b);
    if !degenerate {
        for (r, &rated) in rank.iter_mut().zip(&has_incoming) {
            if !rated {
                *r = 0.0;
            }
        }
        let total: f64 = rank.iter().sum();
        rank.iter_mut().for_each(|r| *r /= total);
    }

    let mut scores = BaselineScores::new(dataset.nodes(), rank);
    scores.converged = converged;
    scores.iterations = iterations;
    scores.degenerate = degenerate;
    scores
}

/// Standard normal cumulative distribution function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Mean incoming raw rating per node, `None` for nodes with no valid ratings.
pub fn mean_incoming_ratings(dataset: &Dataset) -> Vec<Option<f64>> {
    incoming_valid_ratings(dataset)
        .iter()
        .map(|w| (!w.is_empty()).then(|| w.iter().sum::<f64>() / w.len() as f64))
        .collect()
}

fn incoming_valid_ratings(dataset: &Dataset) -> Vec<Vec<f64>> {
    (0..dataset.len())
        .map(|v| {
            dataset
                .incoming_spans(v)
                .iter()
                .flat_map(|span| &dataset.records()[span.records.clone()])
                .filter(|r| dataset.scale().is_valid_rating(r.weight))
                .map(|r| r.weight as f64)
                .collect()
        })
        .collect()
}

fn mean_and_sample_sd(values: &[f64]) -> (f64, f64) {
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count.max(1) as f64;
    let sd = if count >= 2 {
        (values.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

fn standard_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Per-node mean of received valid ratings, each weighted by the normal density
/// of its z-score within the dataset-wide rating population. `None` for unrated nodes.
pub fn normal_weighted_mean_ratings(dataset: &Dataset) -> Vec<Option<f64>> {
    let received = incoming_valid_ratings(dataset);
    let all: Vec<f64> = received.iter().flatten().copied().collect();
    let (m, s) = mean_and_sample_sd(&all);
    let weight = |x: f64| if s > 0.0 { standard_normal_pdf((x - m) / s) } else { 1.0 };
    received
        .iter()
        .map(|xs| {
            (!xs.is_empty()).then(|| {
                let total: f64 = xs.iter().map(|&x| weight(x)).sum();
                xs.iter().map(|&x| weight(x) * x).sum::<f64>() / total
            })
        })
        .collect()
}

/// Normal-distribution reputation.
///
/// 1. Fit a normal to every valid rating in the dataset (mean `m`, sample sd `s`).
/// 2. Each node's weighted mean `μ_w` averages its received ratings `x` with
///    weights `φ((x − m) / s)`, so ratings far from the population norm count less.
///    With `s = 0` the weights are uniform.
/// 3. Fit a second normal to the weighted means of rated nodes (`μ`, `σ`) and
///    score each rated node `Φ((μ_w − μ) / σ)`. Unrated nodes score 0; a
///    zero-variance population scores every rated node 0.5 and is flagged degenerate.
pub fn ndr_reputation(dataset: &Dataset) -> BaselineScores {
    let weighted = normal_weighted_mean_ratings(dataset);
    let population: Vec<f64> = weighted.iter().flatten().copied().collect();
    let (mu, sigma) = mean_and_sample_sd(&population);
    // relative guard: means that differ only by rounding count as identical
    let degenerate = sigma.is_nan() || sigma <= 1e-12 * mu.abs().max(1.0);

    let values = weighted
        .iter()
        .map(|m| match m {
            None => 0.0,
            Some(_) if degenerate => 0.5,
            Some(m) => standard_normal_cdf((m - mu) / sigma),
        })
        .collect();
    let mut scores = BaselineScores::new(dataset.nodes(), values);
    scores.degenerate = degenerate;
    scores
}
