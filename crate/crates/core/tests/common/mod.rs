//! Reference computations that share no code with the library's ranking paths.
#![allow(dead_code)]

use std::collections::BTreeMap;

use expert_rank::InteractionRecord;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Mean of Beta(a, b) as the ratio of two quadratures of the unnormalized density.
pub fn beta_mean_by_quadrature(a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(t, w) in rule {
        let x = 0.5 * (t + 1.0);
        let density = x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0);
        num += w * x * density;
        den += w * density;
    }
    num / den
}

/// Standard normal CDF by composite Simpson integration of the density from 0.
pub fn normal_cdf_by_simpson(x: f64) -> f64 {
    let steps = 20_000;
    let h = x / steps as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = pdf(0.0) + pdf(x);
    for i in 1..steps {
        let t = i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * pdf(t) } else { 2.0 * pdf(t) };
    }
    0.5 + acc * h / 3.0
}

/// Reputation per ratee straight from raw records: group by pair, keep the
/// newest `latest` records, count ratings at/above and below `threshold`
/// (ignoring `unknown`), and add `(p + 1) / (p + n + 2)` for every pair with evidence.
pub fn brute_force_reputation(
    records: &[InteractionRecord],
    unknown: i64,
    threshold: f64,
    latest: Option<usize>,
) -> BTreeMap<String, f64> {
    let mut pairs: BTreeMap<(String, String), Vec<(u64, i64)>> = BTreeMap::new();
    for r in records {
        pairs
            .entry((r.rater.to_string(), r.ratee.to_string()))
            .or_default()
            .push((r.seq_index, r.weight));
    }
    let mut rep: BTreeMap<String, f64> = BTreeMap::new();
    for ((_, ratee), mut hist) in pairs {
        hist.sort();
        let keep = latest.map_or(hist.len(), |k| k.min(hist.len()));
        let window = &hist[hist.len() - keep..];
        let p = window.iter().filter(|(_, w)| *w != unknown && *w as f64 >= threshold).count();
        let n = window.iter().filter(|(_, w)| *w != unknown && (*w as f64) < threshold).count();
        if p + n > 0 {
            *rep.entry(ratee).or_default() += (p as f64 + 1.0) / ((p + n) as f64 + 2.0);
        }
    }
    rep
}

/// Expert under the brute-force reputation: max value, smallest identifier on ties.
pub fn brute_force_argmax(rep: &BTreeMap<String, f64>) -> Option<String> {
    let mut best: Option<(&String, f64)> = None;
    for (node, &v) in rep {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((node, v));
        }
    }
    best.map(|(n, _)| n.clone())
}

/// PageRank by solving `(I − d·Pᵀ) x = (1 − d)/N · 1` where `P` is the
/// row-stochastic transition matrix with dangling rows replaced by uniform.
pub fn pagerank_linear_solve(n: usize, edges: &[(usize, usize)], damping: f64) -> Vec<f64> {
    let mut out_deg = vec![0usize; n];
    for &(u, _) in edges {
        out_deg[u] += 1;
    }
    let mut p = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        p[u][v] += 1.0 / out_deg[u] as f64;
    }
    for u in 0..n {
        if out_deg[u] == 0 {
            p[u] = vec![1.0 / n as f64; n];
        }
    }
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = if i == j { 1.0 } else { 0.0 } - damping * p[j][i];
        }
        a[i][n] = (1.0 - damping) / n as f64;
    }
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (cell, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                    *cell -= f * p;
                }
            }
        }
    }
    let x: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
    let total: f64 = x.iter().sum();
    x.into_iter().map(|v| v / total).collect()
}

use expert_rank::scenario::{BaseDistribution, Campaign, CollusionRing, Topology};
use expert_rank::{NodeId, ScenarioSpec};

fn labels(range: std::ops::RangeInclusive<usize>) -> Vec<NodeId> {
    range.map(|i| NodeId::from(format!("{i:02}"))).collect()
}

/// 20 nodes, sparse survey-like ratings skewed toward the top of 1..5.
/// Node 01 is endorsed at 5 by 02..16; 17..20 form a ring rating each other 5.
pub fn referral_spec(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        density: 0.4,
        collusion: Some(CollusionRing { members: labels(17..=20), rating: 5 }),
        endorsement: Some(Campaign { raters: labels(2..=16), target: "01".into(), rating: 5 }),
        ..ScenarioSpec::new(20, BaseDistribution::SkewedHigh, seed)
    }
}

/// 40 nodes on a circulant graph of degree 8: every in- and out-degree is 8.
/// Per-ratee quality offsets make the mean received ratings distinct.
pub fn regular_spec(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        topology: Topology::Circulant { degree: 8 },
        interactions_per_pair: 3,
        quality_spread: 1.5,
        ..ScenarioSpec::new(40, BaseDistribution::Uniform, seed)
    }
}

/// 20 nodes, every ordered pair rated once, with a 4-member max-rating ring.
pub fn collusion_complete_spec(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        collusion: Some(CollusionRing { members: labels(1..=4), rating: 5 }),
        ..ScenarioSpec::new(20, BaseDistribution::Uniform, seed)
    }
}

/// Same-size pair of survey-like datasets differing only in rating shape.
pub fn shape_pair_specs(seed: u64) -> (ScenarioSpec, ScenarioSpec) {
    let with = |base| ScenarioSpec {
        quality_spread: 0.5,
        ..ScenarioSpec::new(46, base, seed)
    };
    (with(BaseDistribution::Normal { mean: 3.0, sd: 1.0 }), with(BaseDistribution::SkewedHigh))
}

/// 46 nodes where each pair has rated each other with probability 0.6, as in a
/// sociometric survey with many "do not know" answers.
pub fn survey_spec(base: BaseDistribution, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        density: 0.6,
        quality_spread: 0.5,
        ..ScenarioSpec::new(46, base, seed)
    }
}
