//! Datasets, rating scales and interaction categorization.
//!
//! Every rating event is mapped to one of three polarities: `Alpha` (positive
//! evidence), `Beta` (negative evidence) or `Excluded` (the rater declared no
//! knowledge of the ratee). Categorization is a pure threshold test on the
//! integer rating.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, RecordIssue, Result};

/// Identifier of a member of the organization.
///
/// Ordering is lexicographic on the underlying string; loaders that derive
/// identifiers from indices zero-pad them so lexicographic and numeric order
/// agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// Label for the `index`-th (0-based) node of an `m`-node indexed dataset:
/// 1-based and zero-padded to the width of `m`.
pub fn indexed_node_label(index: usize, m: usize) -> NodeId {
    let width = m.to_string().len();
    NodeId(format!("{:0width$}", index + 1, width = width))
}

#[derive(Deserialize)]
struct RawScale {
    min_valid: i64,
    max_valid: i64,
    unknown_value: i64,
    threshold: Option<f64>,
}

/// The integer Likert scale of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScale")]
pub struct RatingScale {
    min_valid: i64,
    max_valid: i64,
    unknown_value: i64,
    threshold: f64,
}

impl TryFrom<RawScale> for RatingScale {
    type Error = Error;

    fn try_from(raw: RawScale) -> Result<Self> {
        let scale = RatingScale::new(raw.min_valid, raw.max_valid, raw.unknown_value)?;
        match raw.threshold {
            Some(t) => scale.with_threshold(t),
            None => Ok(scale),
        }
    }
}

impl RatingScale {
    /// Scale with the threshold at the midpoint of the valid range.
    pub fn new(min_valid: i64, max_valid: i64, unknown_value: i64) -> Result<Self> {
        if min_valid >= max_valid {
            return Err(Error::InvalidScale(format!(
                "min_valid {min_valid} must be below max_valid {max_valid}"
            )));
        }
        if (min_valid..=max_valid).contains(&unknown_value) {
            return Err(Error::InvalidScale(format!(
                "unknown_value {unknown_value} lies inside the valid range {min_valid}..={max_valid}"
            )));
        }
        Ok(RatingScale {
            min_valid,
            max_valid,
            unknown_value,
            threshold: (min_valid + max_valid) as f64 / 2.0,
        })
    }

    /// Overrides the Alpha/Beta boundary. Ratings equal to the threshold are Alpha.
    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !threshold.is_finite()
            || threshold < self.min_valid as f64
            || threshold > self.max_valid as f64
        {
            return Err(Error::InvalidScale(format!(
                "threshold {threshold} outside {}..={}",
                self.min_valid, self.max_valid
            )));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn min_valid(&self) -> i64 {
        self.min_valid
    }

    pub fn max_valid(&self) -> i64 {
        self.max_valid
    }

    pub fn unknown_value(&self) -> i64 {
        self.unknown_value
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_valid_rating(&self, weight: i64) -> bool {
        (self.min_valid..=self.max_valid).contains(&weight)
    }

    pub fn accepts(&self, weight: i64) -> bool {
        weight == self.unknown_value || self.is_valid_rating(weight)
    }

    /// Mirror image of a valid rating across the range; the unknown marker is a fixed point.
    pub fn reflect(&self, weight: i64) -> i64 {
        if weight == self.unknown_value {
            weight
        } else {
            self.min_valid + self.max_valid - weight
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Alpha,
    Beta,
    Excluded,
}

pub fn categorize(weight: i64, scale: &RatingScale) -> Result<Polarity> {
    if weight == scale.unknown_value {
        Ok(Polarity::Excluded)
    } else if !scale.is_valid_rating(weight) {
        Err(Error::InvalidRating { value: weight })
    } else if weight as f64 >= scale.threshold {
        Ok(Polarity::Alpha)
    } else {
        Ok(Polarity::Beta)
    }
}

/// Maps a valid rating onto `[0, 1]`, with the scale endpoints at exactly 0 and 1.
pub fn normalize_weight(weight: i64, scale: &RatingScale) -> Result<f64> {
    if weight == scale.unknown_value {
        return Err(Error::NotNormalizable { value: weight });
    }
    if !scale.is_valid_rating(weight) {
        return Err(Error::InvalidRating { value: weight });
    }
    Ok((weight - scale.min_valid) as f64 / (scale.max_valid - scale.min_valid) as f64)
}

/// One rating event from `rater` about `ratee`.
///
/// `seq_index` orders the events of a single pair, 0 being the oldest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub rater: NodeId,
    pub ratee: NodeId,
    pub weight: i64,
    pub seq_index: u64,
}

impl InteractionRecord {
    pub fn new(rater: impl Into<NodeId>, ratee: impl Into<NodeId>, weight: i64, seq_index: u64) -> Self {
        InteractionRecord {
            rater: rater.into(),
            ratee: ratee.into(),
            weight,
            seq_index,
        }
    }

    fn canonical_key(&self) -> (&NodeId, &NodeId, u64) {
        (&self.rater, &self.ratee, self.seq_index)
    }
}

/// Contiguous run of records for a single (rater, ratee) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PairSpan {
    pub rater: usize,
    pub records: Range<usize>,
}

/// A validated, immutable interaction dataset.
///
/// Nodes are kept in ascending identifier order and records in canonical
/// `(rater, ratee, seq_index)` order, so two datasets holding the same
/// content compare equal regardless of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    nodes: Vec<NodeId>,
    records: Vec<InteractionRecord>,
    scale: RatingScale,
    // incoming[ratee] lists pair spans in ascending rater order
    incoming: Vec<Vec<PairSpan>>,
}

impl Dataset {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn records(&self) -> &[InteractionRecord] {
        &self.records
    }

    pub fn scale(&self) -> &RatingScale {
        &self.scale
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, node: &NodeId) -> Option<usize> {
        self.nodes.binary_search(node).ok()
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        self.node_index(node).is_some()
    }

    /// Records toward `node`, grouped by rater in ascending rater order.
    /// Each group is in ascending `seq_index` order.
    pub fn incoming_by_rater(&self, node: &NodeId) -> Result<Vec<(&NodeId, &[InteractionRecord])>> {
        let idx = self
            .node_index(node)
            .ok_or_else(|| Error::NodeNotFound(node.clone()))?;
        Ok(self.incoming_spans(idx)
            .iter()
            .map(|span| (&self.nodes[span.rater], &self.records[span.records.clone()]))
            .collect())
    }

    pub(crate) fn incoming_spans(&self, ratee: usize) -> &[PairSpan] {
        &self.incoming[ratee]
    }

    /// Longest per-pair history in the dataset.
    pub fn max_pair_history(&self) -> usize {
        self.incoming
            .iter()
            .flatten()
            .map(|span| span.records.len())
            .max()
            .unwrap_or(0)
    }

    /// Returns a dataset with every record weight passed through `f`.
    pub(crate) fn map_weights(&self, mut f: impl FnMut(&InteractionRecord) -> i64) -> Dataset {
        let records = self
            .records
            .iter()
            .map(|r| InteractionRecord {
                weight: f(r),
                ..r.clone()
            })
            .collect();
        Dataset {
            records,
            ..self.clone()
        }
    }
}

/// Validates raw input into a [`Dataset`]. Every violation is collected;
/// nothing is returned unless all records pass.
pub fn validate_dataset(
    nodes: Vec<NodeId>,
    records: Vec<InteractionRecord>,
    scale: RatingScale,
) -> Result<Dataset> {
    let mut issues = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, node) in nodes.iter().enumerate() {
        if !seen.insert(node.clone()) {
            issues.push(RecordIssue {
                index,
                reason: format!("duplicate node `{node}` at node-list position {index}"),
            });
        }
    }
    let nodes: Vec<NodeId> = seen.into_iter().collect();

    let mut keys = BTreeSet::new();
    for (index, r) in records.iter().enumerate() {
        let mut fail = |reason: String| issues.push(RecordIssue { index, reason });
        if r.rater == r.ratee {
            fail(format!("self-rating by `{}`", r.rater));
        }
        if !scale.accepts(r.weight) {
            fail(format!("invalid rating {}", r.weight));
        }
        for (role, id) in [("rater", &r.rater), ("ratee", &r.ratee)] {
            if nodes.binary_search(id).is_err() {
                fail(format!("{role} `{id}` is not a known node"));
            }
        }
        if !keys.insert(r.canonical_key()) {
            fail(format!(
                "duplicate seq_index {} for pair `{}` -> `{}`",
                r.seq_index, r.rater, r.ratee
            ));
        }
    }
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }

    let mut records = records;
    records.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));

    let index_of = |id: &NodeId| nodes.binary_search(id).expect("validated node");
    let mut incoming = vec![Vec::new(); nodes.len()];
    let mut start = 0;
    while start < records.len() {
        let mut end = start + 1;
        while end < records.len()
            && records[end].rater == records[start].rater
            && records[end].ratee == records[start].ratee
        {
            end += 1;
        }
        incoming[index_of(&records[start].ratee)].push(PairSpan {
            rater: index_of(&records[start].rater),
            records: start..end,
        });
        start = end;
    }

    Ok(Dataset {
        nodes,
        records,
        scale,
        incoming,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn likert5() -> RatingScale {
        RatingScale::new(1, 5, 0).unwrap().with_threshold(3.0).unwrap()
    }

    #[test]
    fn categorize_examples() {
        let s = likert5();
        assert_eq!(categorize(5, &s).unwrap(), Polarity::Alpha);
        assert_eq!(categorize(0, &s).unwrap(), Polarity::Excluded);
        assert_eq!(categorize(2, &s).unwrap(), Polarity::Beta);
        assert_eq!(categorize(3, &s).unwrap(), Polarity::Alpha);
    }

    #[test]
    fn categorize_rejects_out_of_range() {
        let err = categorize(9, &likert5()).unwrap_err();
        assert!(matches!(err, Error::InvalidRating { value: 9 }));
        assert!(err.to_string().contains('9'));
        assert!(categorize(-1, &likert5()).is_err());
    }

    #[test]
    fn default_threshold_is_midpoint() {
        assert_eq!(RatingScale::new(1, 5, 0).unwrap().threshold(), 3.0);
        let six = RatingScale::new(1, 6, 0).unwrap();
        assert_eq!(six.threshold(), 3.5);
        assert_eq!(categorize(3, &six).unwrap(), Polarity::Beta);
        assert_eq!(categorize(3, &six.with_threshold(3.0).unwrap()).unwrap(), Polarity::Alpha);
    }

    #[test]
    fn scale_invariants() {
        assert!(RatingScale::new(5, 5, 0).is_err());
        assert!(RatingScale::new(1, 5, 3).is_err());
        assert!(likert5().with_threshold(0.5).is_err());
        assert!(likert5().with_threshold(f64::NAN).is_err());
        let s: RatingScale =
            serde_json::from_str(r#"{"min_valid":1,"max_valid":6,"unknown_value":0}"#).unwrap();
        assert_eq!(s.threshold(), 3.5);
        assert!(serde_json::from_str::<RatingScale>(
            r#"{"min_valid":1,"max_valid":6,"unknown_value":2}"#
        )
        .is_err());
    }

    #[test]
    fn normalize_examples() {
        let s = RatingScale::new(1, 5, 0).unwrap();
        assert_eq!(normalize_weight(1, &s).unwrap(), 0.0);
        assert_eq!(normalize_weight(5, &s).unwrap(), 1.0);
        assert_eq!(normalize_weight(3, &s).unwrap(), 0.5);
        assert!(matches!(
            normalize_weight(0, &s),
            Err(Error::NotNormalizable { value: 0 })
        ));
    }

    #[test]
    fn validate_accepts_minimal_dataset() {
        let ds = validate_dataset(
            vec!["a".into(), "b".into()],
            vec![InteractionRecord::new("a", "b", 4, 0)],
            likert5(),
        )
        .unwrap();
        assert_eq!(ds.records().len(), 1);
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn validate_reports_every_issue() {
        let err = validate_dataset(
            vec!["a".into(), "b".into()],
            vec![
                InteractionRecord::new("a", "a", 4, 0),
                InteractionRecord::new("a", "b", 9, 0),
                InteractionRecord::new("a", "c", 4, 0),
                InteractionRecord::new("b", "a", 4, 1),
                InteractionRecord::new("b", "a", 2, 1),
            ],
            RatingScale::new(0, 5, -1).unwrap(),
        )
        .unwrap_err();
        let Error::Validation(issues) = err else {
            panic!("expected validation error");
        };
        let indices: Vec<_> = issues.iter().map(|i| i.index).collect();
        assert_eq!(indices, vec![0, 1, 2, 4]);
        assert!(issues[0].reason.contains("self-rating"));
        assert!(issues[1].reason.contains("invalid rating 9"));
        assert!(issues[2].reason.contains("`c`"));
        assert!(issues[3].reason.contains("duplicate seq_index"));
    }

    #[test]
    fn validate_rejects_duplicate_nodes() {
        assert!(validate_dataset(vec!["a".into(), "a".into()], vec![], likert5()).is_err());
    }

    #[test]
    fn records_are_canonically_ordered() {
        let recs = vec![
            InteractionRecord::new("b", "a", 4, 1),
            InteractionRecord::new("a", "b", 4, 0),
            InteractionRecord::new("b", "a", 2, 0),
        ];
        let mut rev = recs.clone();
        rev.reverse();
        let nodes = vec!["a".into(), "b".into()];
        let x = validate_dataset(nodes.clone(), recs, likert5()).unwrap();
        let y = validate_dataset(nodes, rev, likert5()).unwrap();
        assert_eq!(x, y);
        let incoming = x.incoming_by_rater(&"a".into()).unwrap();
        assert_eq!(incoming.len(), 1);
        assert_eq!(incoming[0].1.iter().map(|r| r.seq_index).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn indexed_labels_sort_numerically() {
        let labels: Vec<_> = (0..12).map(|i| indexed_node_label(i, 12)).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
        assert_eq!(labels[0].as_str(), "01");
        assert_eq!(indexed_node_label(45, 46).as_str(), "46");
    }
}
