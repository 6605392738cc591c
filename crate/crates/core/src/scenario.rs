//! Seeded synthetic datasets with optional collusion rings and rating campaigns.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`).
//! Every draw is derived from `next_u64` with explicit formulas so the stream
//! can be reproduced elsewhere:
//!
//! * unit uniform `u = (next_u64 >> 11) * 2^-53`
//! * standard normal by Box-Muller, `z = sqrt(-2 ln(1 - u1)) * cos(2π u2)`
//!
//! Draw order: one quality offset per node (node order), then for each rater
//! `i` and ratee `j != i` in row-major order one inclusion draw followed by
//! one rating draw per interaction. Forced pairs (ring, campaigns) consume
//! no draws.

use std::collections::BTreeSet;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{indexed_node_label, validate_dataset, Dataset, InteractionRecord, NodeId, RatingScale};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseDistribution {
    /// Every valid rating equally likely.
    Uniform,
    /// Rounded normal draw, clamped to the valid range.
    Normal { mean: f64, sd: f64 },
    /// `max − (max − min)·u³`, rounded: half the mass on the top rating.
    SkewedHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Every ordered pair is a candidate.
    Complete,
    /// Node `i` rates `i+1, ..., i+degree` (mod n): every node has in- and out-degree `degree`.
    Circulant { degree: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollusionRing {
    pub members: Vec<NodeId>,
    pub rating: i64,
}

/// A set of raters who all rate one target at a fixed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub raters: Vec<NodeId>,
    pub target: NodeId,
    pub rating: i64,
}

fn default_scale() -> RatingScale {
    RatingScale::new(1, 5, 0).expect("static scale")
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn complete() -> Topology {
    Topology::Complete
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub node_count: usize,
    #[serde(default = "default_scale")]
    pub scale: RatingScale,
    pub base: BaseDistribution,
    #[serde(default = "complete")]
    pub topology: Topology,
    /// Probability that a candidate pair interacts at all.
    #[serde(default = "one")]
    pub density: f64,
    #[serde(default = "one_usize")]
    pub interactions_per_pair: usize,
    /// Half-width of a per-ratee uniform offset added to every rating it receives.
    #[serde(default)]
    pub quality_spread: f64,
    #[serde(default)]
    pub collusion: Option<CollusionRing>,
    /// Attackers rating a victim, typically at the bottom of the scale.
    #[serde(default)]
    pub negative_campaign: Option<Campaign>,
    /// Raters vouching for a legitimately popular node.
    #[serde(default)]
    pub endorsement: Option<Campaign>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(node_count: usize, base: BaseDistribution, seed: u64) -> Self {
        ScenarioSpec {
            node_count,
            scale: default_scale(),
            base,
            topology: Topology::Complete,
            density: 1.0,
            interactions_per_pair: 1,
            quality_spread: 0.0,
            collusion: None,
            negative_campaign: None,
            endorsement: None,
            seed,
        }
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        (0..self.node_count)
            .map(|i| indexed_node_label(i, self.node_count))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Scenario(m));
        if self.node_count < 2 {
            return fail("node_count must be at least 2".into());
        }
        if !(0.0..=1.0).contains(&self.density) {
            return fail(format!("density {} outside [0, 1]", self.density));
        }
        if self.interactions_per_pair == 0 {
            return fail("interactions_per_pair must be at least 1".into());
        }
        if !(self.quality_spread >= 0.0 && self.quality_spread.is_finite()) {
            return fail("quality_spread must be finite and non-negative".into());
        }
        match self.base {
            BaseDistribution::Normal { mean, sd } if !(mean.is_finite() && sd.is_finite() && sd >= 0.0) => {
                return fail(format!("normal base needs finite mean and sd >= 0, got ({mean}, {sd})"));
            }
            _ => {}
        }
        if let Topology::Circulant { degree } = self.topology {
            if degree == 0 || degree >= self.node_count {
                return fail(format!("circulant degree {degree} must lie in 1..{}", self.node_count));
            }
        }
        let nodes: BTreeSet<NodeId> = self.nodes().into_iter().collect();
        let check_members = |what: &str, ids: &[NodeId]| -> Result<()> {
            let unique: BTreeSet<_> = ids.iter().collect();
            if unique.len() != ids.len() {
                return Err(Error::Scenario(format!("{what} lists a node twice")));
            }
            match ids.iter().find(|id| !nodes.contains(*id)) {
                Some(id) => Err(Error::Scenario(format!("{what} member `{id}` is not a node"))),
                None => Ok(()),
            }
        };
        let check_rating = |what: &str, rating: i64| -> Result<()> {
            if self.scale.is_valid_rating(rating) {
                Ok(())
            } else {
                Err(Error::Scenario(format!("{what} rating {rating} outside the valid range")))
            }
        };
        if let Some(ring) = &self.collusion {
            check_members("collusion ring", &ring.members)?;
            check_rating("collusion ring", ring.rating)?;
            if ring.members.len() < 2 {
                return fail("collusion ring needs at least 2 members".into());
            }
        }
        for (what, campaign) in [
            ("negative campaign", &self.negative_campaign),
            ("endorsement", &self.endorsement),
        ] {
            if let Some(c) = campaign {
                check_members(what, &c.raters)?;
                check_members(what, std::slice::from_ref(&c.target))?;
                check_rating(what, c.rating)?;
                if c.raters.contains(&c.target) {
                    return fail(format!("{what} target `{}` cannot rate itself", c.target));
                }
            }
        }
        Ok(())
    }
}

struct Draws(ChaCha8Rng);

impl Draws {
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn standard_normal(&mut self) -> f64 {
        let u1 = self.unit();
        let u2 = self.unit();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn latent(&mut self, base: BaseDistribution, scale: &RatingScale) -> f64 {
        let (lo, hi) = (scale.min_valid() as f64, scale.max_valid() as f64);
        match base {
            BaseDistribution::Uniform => lo - 0.5 + self.unit() * (hi - lo + 1.0),
            BaseDistribution::Normal { mean, sd } => mean + sd * self.standard_normal(),
            BaseDistribution::SkewedHigh => hi - (hi - lo) * self.unit().powi(3),
        }
    }
}

fn to_rating(x: f64, scale: &RatingScale) -> i64 {
    (x.round() as i64).clamp(scale.min_valid(), scale.max_valid())
}

fn is_candidate(topology: Topology, n: usize, rater: usize, ratee: usize) -> bool {
    match topology {
        Topology::Complete => true,
        Topology::Circulant { degree } => {
            let gap = (ratee + n - rater) % n;
            (1..=degree).contains(&gap)
        }
    }
}

pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.node_count;
    let nodes = spec.nodes();
    let scale = spec.scale;
    let mut draws = Draws(ChaCha8Rng::seed_from_u64(spec.seed));

    let offsets: Vec<f64> = (0..n)
        .map(|_| spec.quality_spread * (2.0 * draws.unit() - 1.0))
        .collect();

    let forced = |rater: &NodeId, ratee: &NodeId| -> Option<i64> {
        if let Some(ring) = &spec.collusion {
            if ring.members.contains(rater) && ring.members.contains(ratee) {
                return Some(ring.rating);
            }
        }
        [&spec.negative_campaign, &spec.endorsement]
            .into_iter()
            .flatten()
            .find(|c| &c.target == ratee && c.raters.contains(rater))
            .map(|c| c.rating)
    };

    let mut records = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(rating) = forced(&nodes[i], &nodes[j]) {
                for t in 0..spec.interactions_per_pair {
                    records.push(InteractionRecord::new(nodes[i].clone(), nodes[j].clone(), rating, t as u64));
                }
                continue;
            }
            if !is_candidate(spec.topology, n, i, j) {
                continue;
            }
            if draws.unit() >= spec.density {
                continue;
            }
            for t in 0..spec.interactions_per_pair {
                let rating = to_rating(draws.latent(spec.base, &scale) + offsets[j], &scale);
                records.push(InteractionRecord::new(nodes[i].clone(), nodes[j].clone(), rating, t as u64));
            }
        }
    }
    validate_dataset(nodes, records, scale)
}
