//! JSON report document.
//!
//! Layout (keys in this order):
//!
//! ```text
//! { "run": { "dataset", "window", "threshold", "seed", "k" },
//!   "methods": [ { "name", "mae", "precision_at_k", "overlap", "top_k_variance",
//!                  "converged", "ranking": [ { "node", "score" } ],
//!                  "perturbation"?, "categorization"?, "dynamic_profile"? } ] }
//! ```
//!
//! Every real number is written with exactly six decimals, so identical runs
//! produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::evaluation::EvaluationReport;
use crate::io::write_atomic;
use crate::model::NodeId;

fn round6(v: f64) -> f64 {
    format!("{v:.6}").parse().unwrap_or(v)
}

fn fixed6<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return s.serialize_none();
    }
    let raw = RawValue::from_string(format!("{v:.6}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn fixed6_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => fixed6(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub dataset: String,
    pub window: String,
    #[serde(serialize_with = "fixed6")]
    pub threshold: f64,
    pub seed: Option<u64>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub node: NodeId,
    #[serde(serialize_with = "fixed6")]
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSection {
    pub target: NodeId,
    pub argmax_before: Option<NodeId>,
    pub argmax_after: Option<NodeId>,
    #[serde(serialize_with = "fixed6")]
    pub max_score_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorizationSection {
    #[serde(serialize_with = "fixed6")]
    pub positive_only_mae: f64,
    #[serde(serialize_with = "fixed6")]
    pub positive_only_top_k_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSection {
    pub window: String,
    #[serde(serialize_with = "fixed6")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSection {
    pub name: String,
    #[serde(serialize_with = "fixed6")]
    pub mae: f64,
    #[serde(serialize_with = "fixed6")]
    pub precision_at_k: f64,
    #[serde(serialize_with = "fixed6_opt")]
    pub overlap: Option<f64>,
    #[serde(serialize_with = "fixed6_opt")]
    pub top_k_variance: Option<f64>,
    pub converged: bool,
    pub ranking: Vec<RankingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categorization: Option<CategorizationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic_profile: Option<Vec<ProfileSection>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub run: RunSection,
    pub methods: Vec<MethodSection>,
}

impl ReportDocument {
    /// Builds the document, rounding every number to its serialized precision.
    /// Run metadata is taken from the first report.
    pub fn from_reports(reports: &[EvaluationReport]) -> Result<Self> {
        let first = reports
            .first()
            .ok_or(Error::TooFewEntries { needed: 1, available: 0 })?;
        let run = RunSection {
            dataset: first.run.dataset.clone(),
            window: first.run.window.to_string(),
            threshold: round6(first.run.threshold),
            seed: first.run.seed,
            k: first.run.k,
        };
        let methods = reports
            .iter()
            .map(|r| MethodSection {
                name: r.method.clone(),
                mae: round6(r.mae),
                precision_at_k: round6(r.precision_at_k),
                overlap: r.overlap.map(round6),
                top_k_variance: r.top_k_variance.map(round6),
                converged: r.converged,
                ranking: r
                    .ranking
                    .iter()
                    .map(|(node, score)| RankingEntry {
                        node: node.clone(),
                        score: round6(*score),
                    })
                    .collect(),
                perturbation: r.perturbation.as_ref().map(|p| PerturbationSection {
                    target: p.target.clone(),
                    argmax_before: p.argmax_before.clone(),
                    argmax_after: p.argmax_after.clone(),
                    max_score_change: round6(p.max_score_change),
                }),
                categorization: r.categorization.as_ref().map(|c| CategorizationSection {
                    positive_only_mae: round6(c.positive_only_mae),
                    positive_only_top_k_variance: round6(c.positive_only_top_k_variance),
                }),
                dynamic_profile: r.dynamic_profile.as_ref().map(|points| {
                    points
                        .iter()
                        .map(|p| ProfileSection {
                            window: p.window.to_string(),
                            value: round6(p.value),
                        })
                        .collect()
                }),
            })
            .collect();
        Ok(ReportDocument { run, methods })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn render_report(reports: &[EvaluationReport]) -> Result<String> {
    ReportDocument::from_reports(reports)?.to_json()
}

/// Writes the report document to `path` atomically.
pub fn write_report(reports: &[EvaluationReport], path: &Path) -> Result<()> {
    write_atomic(path, render_report(reports)?.as_bytes())
}
