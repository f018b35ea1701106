//! Identification patterns: which nodes are excited and which are measured.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Dag, NodeId, NodeSet};

/// Largest graph [`enumerate_valid_patterns`] accepts.
pub const MAX_ENUMERATION_NODES: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IdentificationPattern {
    pub excited: NodeSet,
    pub measured: NodeSet,
}

impl IdentificationPattern {
    pub fn new<E, M, A, B>(excited: E, measured: M) -> Self
    where
        E: IntoIterator<Item = A>,
        M: IntoIterator<Item = B>,
        A: Into<NodeId>,
        B: Into<NodeId>,
    {
        IdentificationPattern {
            excited: excited.into_iter().map(Into::into).collect(),
            measured: measured.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_excited(&self, node: NodeId) -> bool {
        self.excited.contains(&node)
    }

    pub fn is_measured(&self, node: NodeId) -> bool {
        self.measured.contains(&node)
    }

    pub fn covers(&self, node: NodeId) -> bool {
        self.is_excited(node) || self.is_measured(node)
    }

    /// Every node mentioned must belong to `dag`.
    pub fn check_nodes(&self, dag: &Dag) -> Result<(), PatternError> {
        match self.excited.iter().chain(&self.measured).find(|v| !dag.contains(**v)) {
            Some(v) => Err(PatternError::UnknownNode(*v)),
            None => Ok(()),
        }
    }
}

impl fmt::Display for IdentificationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &NodeSet| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "excited {{{}}}, measured {{{}}}", list(&self.excited), list(&self.measured))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern names node {0}, which is not in the graph")]
    UnknownNode(NodeId),
    #[error("pattern fails necessary conditions: {0:?}")]
    NecessaryConditions(Vec<Violation>),
    #[error("pattern enumeration is limited to {max} nodes, graph has {n}; analyze chosen patterns directly instead")]
    TooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "node")]
pub enum Violation {
    UnexcitedSource(NodeId),
    UnmeasuredSink(NodeId),
    Uncovered(NodeId),
}

impl Violation {
    pub fn node(&self) -> NodeId {
        match *self {
            Violation::UnexcitedSource(v) | Violation::UnmeasuredSink(v) | Violation::Uncovered(v) => v,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnexcitedSource(v) => write!(f, "source {v} is not excited"),
            Violation::UnmeasuredSink(v) => write!(f, "sink {v} is not measured"),
            Violation::Uncovered(v) => write!(f, "node {v} is neither excited nor measured"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NecessaryCheckResult {
    pub violations: Vec<Violation>,
}

impl NecessaryCheckResult {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `|N^e| + |N^m|`; a node that is both excited and measured counts twice.
pub fn count_actions(p: &IdentificationPattern) -> usize {
    p.excited.len() + p.measured.len()
}

/// Sources must be excited, sinks measured, every node covered.
pub fn check_necessary(dag: &Dag, p: &IdentificationPattern) -> NecessaryCheckResult {
    let mut violations = Vec::new();
    for v in dag.nodes() {
        if dag.is_source(v) && !p.is_excited(v) {
            violations.push(Violation::UnexcitedSource(v));
        }
        if dag.is_sink(v) && !p.is_measured(v) {
            violations.push(Violation::UnmeasuredSink(v));
        }
        if !p.covers(v) {
            violations.push(Violation::Uncovered(v));
        }
    }
    NecessaryCheckResult { violations }
}

/// Measure the sinks, excite everything else.
pub fn canonical_full_excitation(dag: &Dag) -> IdentificationPattern {
    let sinks = dag.sinks();
    IdentificationPattern {
        excited: dag.nodes().filter(|v| !sinks.contains(v)).collect(),
        measured: sinks,
    }
}

/// `(N^e, N^m)` to `(N^e, V)`; refused when the pattern fails the necessary checks.
pub fn reduce_to_full_measurement(
    p: &IdentificationPattern,
    dag: &Dag,
) -> Result<IdentificationPattern, PatternError> {
    p.check_nodes(dag)?;
    let check = check_necessary(dag, p);
    if !check.ok() {
        return Err(PatternError::NecessaryConditions(check.violations));
    }
    Ok(IdentificationPattern { excited: p.excited.clone(), measured: dag.node_set() })
}

/// Drops from `N^m` every node that is also excited.
pub fn strip_redundant_measurements(p: &IdentificationPattern) -> IdentificationPattern {
    IdentificationPattern {
        excited: p.excited.clone(),
        measured: p.measured.difference(&p.excited).copied().collect(),
    }
}

/// All patterns with exactly `n` actions that pass [`check_necessary`].
///
/// Sources are always excited and sinks always measured; each remaining node
/// is either excited or measured. Output follows ascending excited-set
/// bitmask (bit `i - 1` for node `i`), truncated to `max_results`.
pub fn enumerate_valid_patterns(
    dag: &Dag,
    max_results: usize,
) -> Result<Vec<IdentificationPattern>, PatternError> {
    let n = dag.node_count();
    if n > MAX_ENUMERATION_NODES {
        return Err(PatternError::TooLarge { n, max: MAX_ENUMERATION_NODES });
    }
    // A node that is both a source and a sink needs two actions.
    if dag.nodes().any(|v| dag.is_source(v) && dag.is_sink(v)) {
        return Ok(Vec::new());
    }
    let sources = dag.sources();
    let sinks = dag.sinks();
    let interior: Vec<NodeId> = dag.nodes().filter(|v| !sources.contains(v) && !sinks.contains(v)).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << interior.len()) {
        if out.len() >= max_results {
            break;
        }
        let mut p = IdentificationPattern { excited: sources.clone(), measured: sinks.clone() };
        for (bit, &v) in interior.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                p.excited.insert(v);
            } else {
                p.measured.insert(v);
            }
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::node_set;

    #[test]
    fn action_counts() {
        assert_eq!(count_actions(&IdentificationPattern::new([1], [2, 3, 4])), 4);
        assert_eq!(count_actions(&IdentificationPattern::default()), 0);
        assert_eq!(count_actions(&IdentificationPattern::new([1], [1])), 2);
    }

    #[test]
    fn necessary_checks() {
        let diamond = fixtures::diamond();
        assert!(check_necessary(&diamond, &IdentificationPattern::new([1], [2, 3, 4])).ok());
        let r = check_necessary(&diamond, &IdentificationPattern::new(Vec::<usize>::new(), [1, 2, 3, 4]));
        assert_eq!(r.violations, vec![Violation::UnexcitedSource(NodeId(1))]);
        let chain = fixtures::chain(3);
        let r = check_necessary(&chain, &IdentificationPattern::new([1], [3]));
        assert_eq!(r.violations, vec![Violation::Uncovered(NodeId(2))]);
    }

    #[test]
    fn canonical_patterns() {
        let p = canonical_full_excitation(&fixtures::diamond());
        assert_eq!(p, IdentificationPattern::new([1, 2, 3], [4]));
        assert_eq!(canonical_full_excitation(&fixtures::chain(2)), IdentificationPattern::new([1], [2]));
        let p = canonical_full_excitation(&fixtures::relay_join_unit());
        assert_eq!(p, IdentificationPattern::new([1, 2, 3, 4, 5], [6]));
        assert_eq!(count_actions(&p), 6);
    }

    #[test]
    fn reduction() {
        let diamond = fixtures::diamond();
        let r = reduce_to_full_measurement(&IdentificationPattern::new([1], [2, 3, 4]), &diamond).unwrap();
        assert_eq!(r, IdentificationPattern::new([1], [1, 2, 3, 4]));
        assert_eq!(reduce_to_full_measurement(&r, &diamond).unwrap(), r);
        let big = fixtures::ordering_example();
        let r = reduce_to_full_measurement(&fixtures::ordering_pattern(), &big).unwrap();
        assert_eq!(r.measured, big.node_set());
        assert_eq!(r.excited, node_set([1, 2, 4, 6, 8]));
        assert!(matches!(
            reduce_to_full_measurement(&IdentificationPattern::new([1], [3]), &fixtures::chain(3)),
            Err(PatternError::NecessaryConditions(_))
        ));
        assert!(matches!(
            reduce_to_full_measurement(&IdentificationPattern::new([1], [7]), &fixtures::chain(3)),
            Err(PatternError::UnknownNode(NodeId(7)))
        ));
    }

    #[test]
    fn strip_measurements() {
        let p = strip_redundant_measurements(&IdentificationPattern::new([1], [1, 2]));
        assert_eq!(p, IdentificationPattern::new([1], [2]));
        let q = IdentificationPattern::new([1], [2, 3]);
        assert_eq!(strip_redundant_measurements(&q), q);
        let p = strip_redundant_measurements(&IdentificationPattern::new([1], [1]));
        assert!(p.measured.is_empty());
        assert_eq!(strip_redundant_measurements(&p), p);
    }

    #[test]
    fn enumeration() {
        let chain = enumerate_valid_patterns(&fixtures::chain(3), 100).unwrap();
        assert_eq!(
            chain,
            vec![IdentificationPattern::new([1], [2, 3]), IdentificationPattern::new([1, 2], [3])]
        );
        assert_eq!(
            enumerate_valid_patterns(&fixtures::chain(2), 100).unwrap(),
            vec![IdentificationPattern::new([1], [2])]
        );
        let diamond = enumerate_valid_patterns(&fixtures::diamond(), 100).unwrap();
        assert_eq!(diamond.len(), 4);
        assert_eq!(diamond[1], IdentificationPattern::new([1, 2], [3, 4]));
        assert_eq!(enumerate_valid_patterns(&fixtures::diamond(), 3).unwrap().len(), 3);
        let wide = fixtures::chain(21);
        assert!(matches!(enumerate_valid_patterns(&wide, 1), Err(PatternError::TooLarge { n: 21, .. })));
    }
}
