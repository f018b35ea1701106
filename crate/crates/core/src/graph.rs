//! Directed acyclic network topology and the structural queries the rest of
//! the crate is built on.
//!
//! Nodes are dense integers `1..=n`. An [`Edge`] carries the function slot
//! `f_{head,tail}`: the output of `tail` feeds `head` after `delay` steps.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::patterns::IdentificationPattern;

/// A node identifier in `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    /// Zero-based position used for matrix and vector indexing.
    #[inline]
    pub fn index(self) -> usize {
        self.0 - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        NodeId(index + 1)
    }
}

impl From<usize> for NodeId {
    fn from(id: usize) -> Self {
        NodeId(id)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type NodeSet = BTreeSet<NodeId>;

/// Builds a [`NodeSet`] from plain integer ids.
pub fn node_set<I, T>(ids: I) -> NodeSet
where
    I: IntoIterator<Item = T>,
    T: Into<NodeId>,
{
    ids.into_iter().map(Into::into).collect()
}

/// Edge key `(head, tail)`, i.e. the slot of `f_{head,tail}`.
pub type EdgeKey = (NodeId, NodeId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub head: NodeId,
    pub tail: NodeId,
    pub delay: u32,
}

impl Edge {
    pub fn new(head: impl Into<NodeId>, tail: impl Into<NodeId>, delay: u32) -> Self {
        Edge { head: head.into(), tail: tail.into(), delay }
    }

    pub fn key(&self) -> EdgeKey {
        (self.head, self.tail)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f_{{{},{}}}", self.head, self.tail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("node {0} is outside 1..={1}")]
    UnknownNode(usize, usize),
    #[error("self loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge {tail} -> {head} has delay 0; delays must be at least 1")]
    ZeroDelay { head: NodeId, tail: NodeId },
    #[error("duplicate edge {tail} -> {head}")]
    DuplicateEdge { head: NodeId, tail: NodeId },
    #[error("directed cycle through node {0}")]
    CycleDetected(NodeId),
    #[error("graph is not weakly connected (node {0} is unreachable from node 1)")]
    Disconnected(NodeId),
    #[error("empty node selection")]
    EmptySelection,
}

/// Immutable DAG with per-edge delays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    edges: Vec<Edge>,
    // Edge indices grouped by head (incoming) and by tail (outgoing), ascending neighbor id.
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    order: Vec<NodeId>,
}

impl Dag {
    /// Validates and builds a DAG over nodes `1..=n`.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let dag = Self::build(n, edges)?;
        dag.check_connected()?;
        Ok(dag)
    }

    /// Unit-delay DAG from `(from, to)` arcs.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(n, arcs.iter().map(|&(from, to)| Edge::new(to, from, 1)).collect())
    }

    /// DAG from `(from, to, delay)` arcs.
    pub fn from_delayed_arcs(n: usize, arcs: &[(usize, usize, u32)]) -> Result<Self, GraphError> {
        Self::new(n, arcs.iter().map(|&(from, to, d)| Edge::new(to, from, d)).collect())
    }

    // Everything except weak connectivity, which induced subgraphs may lose.
    fn build(n: usize, mut edges: Vec<Edge>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for e in &edges {
            for id in [e.head, e.tail] {
                if id.0 == 0 || id.0 > n {
                    return Err(GraphError::UnknownNode(id.0, n));
                }
            }
            if e.head == e.tail {
                return Err(GraphError::SelfLoop(e.head));
            }
            if e.delay == 0 {
                return Err(GraphError::ZeroDelay { head: e.head, tail: e.tail });
            }
        }
        edges.sort();
        for w in edges.windows(2) {
            if w[0].key() == w[1].key() {
                return Err(GraphError::DuplicateEdge { head: w[0].head, tail: w[0].tail });
            }
        }
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            incoming[e.head.index()].push(k);
            outgoing[e.tail.index()].push(k);
        }
        for list in &mut outgoing {
            list.sort_by_key(|&k| edges[k].head);
        }
        let order = kahn(n, &edges, &incoming, &outgoing)?;
        Ok(Dag { n, edges, incoming, outgoing, order })
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            let node = NodeId::from_index(v);
            for w in self.in_neighbors(node).chain(self.out_neighbors(node)) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    stack.push(w.index());
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(v) => Err(GraphError::Disconnected(NodeId::from_index(v))),
            None => Ok(()),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (1..=self.n).map(NodeId)
    }

    pub fn node_set(&self) -> NodeSet {
        self.nodes().collect()
    }

    /// Edges sorted by `(head, tail)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 >= 1 && node.0 <= self.n
    }

    pub fn check_node(&self, node: NodeId) -> Result<(), GraphError> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(node.0, self.n))
        }
    }

    pub fn edge(&self, head: NodeId, tail: NodeId) -> Option<&Edge> {
        self.edges.binary_search_by(|e| e.key().cmp(&(head, tail))).ok().map(|k| &self.edges[k])
    }

    pub fn incoming_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.incoming[node.index()].iter().map(move |&k| &self.edges[k])
    }

    pub fn outgoing_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[node.index()].iter().map(move |&k| &self.edges[k])
    }

    /// In-neighbors `N_i` in ascending id order.
    pub fn in_neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.incoming_edges(node).map(|e| e.tail)
    }

    pub fn out_neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.outgoing_edges(node).map(|e| e.head)
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        self.incoming[node.index()].len()
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.outgoing[node.index()].len()
    }

    pub fn is_source(&self, node: NodeId) -> bool {
        self.in_degree(node) == 0
    }

    pub fn is_sink(&self, node: NodeId) -> bool {
        self.out_degree(node) == 0
    }

    pub fn sources(&self) -> NodeSet {
        self.nodes().filter(|&v| self.is_source(v)).collect()
    }

    pub fn sinks(&self) -> NodeSet {
        self.nodes().filter(|&v| self.is_sink(v)).collect()
    }

    pub fn roles(&self) -> Vec<NodeRole> {
        self.nodes()
            .map(|node| NodeRole { node, is_source: self.is_source(node), is_sink: self.is_sink(node) })
            .collect()
    }

    /// Topological order, ties broken by ascending id.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.order
    }

    /// All nodes with a directed path to `node` (excluding `node`).
    pub fn ancestors(&self, node: NodeId) -> NodeSet {
        self.walk(node, |v| self.in_neighbors(v).collect())
    }

    /// All nodes reachable from `node` (excluding `node`).
    pub fn descendants(&self, node: NodeId) -> NodeSet {
        self.walk(node, |v| self.out_neighbors(v).collect())
    }

    fn walk(&self, start: NodeId, next: impl Fn(NodeId) -> Vec<NodeId>) -> NodeSet {
        let mut seen = NodeSet::new();
        let mut stack = next(start);
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(next(v));
            }
        }
        seen
    }

    /// True if a directed path of length >= 0 leads from `from` to `to`.
    pub fn has_path(&self, from: NodeId, to: NodeId) -> bool {
        from == to || self.descendants(from).contains(&to)
    }

    /// Longest path measured in accumulated delay, over all node pairs.
    pub fn max_path_delay(&self) -> u64 {
        let mut best = vec![0u64; self.n];
        for &v in &self.order {
            for e in self.incoming_edges(v) {
                best[v.index()] = best[v.index()].max(best[e.tail.index()] + u64::from(e.delay));
            }
        }
        best.into_iter().max().unwrap_or(0)
    }
}

fn kahn(
    n: usize,
    edges: &[Edge],
    incoming: &[Vec<usize>],
    outgoing: &[Vec<usize>],
) -> Result<Vec<NodeId>, GraphError> {
    let mut indeg: Vec<usize> = incoming.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(NodeId::from_index(v));
        for &k in &outgoing[v] {
            let h = edges[k].head.index();
            indeg[h] -= 1;
            if indeg[h] == 0 {
                ready.push(Reverse(h));
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
        return Err(GraphError::CycleDetected(NodeId::from_index(stuck)));
    }
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeRole {
    pub node: NodeId,
    pub is_source: bool,
    pub is_sink: bool,
}

/// Deterministic topological order (ascending id on ties).
pub fn topological_order(dag: &Dag) -> Vec<NodeId> {
    dag.topological_order().to_vec()
}

/// Topological order in which every node strictly between two consecutive
/// measured nodes `p` and `q` has a directed path to `q`.
///
/// Built greedily: the next measured node is the first one met by the
/// id-tie-broken Kahn order of the still unemitted subgraph; its unemitted
/// ancestors are emitted first, in topological order, then the node itself.
/// Nodes with no path to that measured node are deferred past it.
pub fn measured_aware_order(dag: &Dag, pattern: &IdentificationPattern) -> Vec<NodeId> {
    let n = dag.node_count();
    let mut emitted = vec![false; n];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let remaining = kahn_remaining(dag, &emitted);
        let next = remaining.iter().copied().find(|v| pattern.measured.contains(v));
        let Some(q) = next else {
            // No measured node left: emit the rest in order.
            out.extend(remaining);
            break;
        };
        let mut block: Vec<NodeId> =
            dag.ancestors(q).into_iter().filter(|v| !emitted[v.index()]).collect();
        // Order the block consistently with the remaining-graph Kahn order.
        let pos_in_remaining: BTreeMap<NodeId, usize> =
            remaining.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        block.sort_by_key(|v| pos_in_remaining[v]);
        block.push(q);
        for v in block {
            emitted[v.index()] = true;
            out.push(v);
        }
    }
    out
}

fn kahn_remaining(dag: &Dag, emitted: &[bool]) -> Vec<NodeId> {
    let n = dag.node_count();
    let mut indeg = vec![0usize; n];
    for e in dag.edges() {
        if !emitted[e.head.index()] && !emitted[e.tail.index()] {
            indeg[e.head.index()] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| !emitted[v] && indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::new();
    while let Some(Reverse(v)) = ready.pop() {
        let node = NodeId::from_index(v);
        order.push(node);
        for w in dag.out_neighbors(node) {
            if emitted[w.index()] {
                continue;
            }
            indeg[w.index()] -= 1;
            if indeg[w.index()] == 0 {
                ready.push(Reverse(w.index()));
            }
        }
    }
    order
}

/// Excited nodes with a directed path to `node`, excluding `node` itself.
pub fn reachable_excited(
    dag: &Dag,
    node: NodeId,
    pattern: &IdentificationPattern,
) -> Result<NodeSet, GraphError> {
    dag.check_node(node)?;
    Ok(dag.ancestors(node).intersection(&pattern.excited).copied().collect())
}

/// Total path lags from each excited node to every node it reaches.
///
/// A lag is the delay sum along a path plus one step for the input itself.
/// Multiplicities count how many distinct paths share a lag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LagTable {
    entries: BTreeMap<(NodeId, NodeId), BTreeMap<u64, u64>>,
}

impl LagTable {
    /// Distinct lags for `(target, excited)`, if any path exists.
    pub fn lags(&self, target: NodeId, excited: NodeId) -> Option<BTreeSet<u64>> {
        self.entries.get(&(target, excited)).map(|m| m.keys().copied().collect())
    }

    /// Lag to path-count multiset for `(target, excited)`.
    pub fn multiplicities(&self, target: NodeId, excited: NodeId) -> Option<&BTreeMap<u64, u64>> {
        self.entries.get(&(target, excited))
    }

    pub fn path_count(&self, target: NodeId, excited: NodeId) -> u64 {
        self.entries
            .get(&(target, excited))
            .map_or(0, |m| m.values().fold(0u64, |a, &c| a.saturating_add(c)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &BTreeMap<u64, u64>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn lag_table(dag: &Dag, pattern: &IdentificationPattern) -> LagTable {
    let mut entries = BTreeMap::new();
    for &src in pattern.excited.iter().filter(|v| dag.contains(**v)) {
        // delay sum -> number of paths, per node
        let mut acc: Vec<BTreeMap<u64, u64>> = vec![BTreeMap::new(); dag.node_count()];
        acc[src.index()].insert(0, 1);
        for &v in dag.topological_order() {
            if v == src {
                continue;
            }
            let mut here = BTreeMap::new();
            for e in dag.incoming_edges(v) {
                for (&d, &c) in &acc[e.tail.index()] {
                    let slot = here.entry(d + u64::from(e.delay)).or_insert(0u64);
                    *slot = slot.saturating_add(c);
                }
            }
            if !here.is_empty() {
                let lags = here.iter().map(|(&d, &c)| (d + 1, c)).collect();
                entries.insert((v, src), lags);
            }
            acc[v.index()] = here;
        }
    }
    LagTable { entries }
}

/// Result of [`induced_subgraph`]: the renumbered graph and, for each new
/// node, its id in the original graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub dag: Dag,
    pub original: Vec<NodeId>,
}

/// Subgraph on `keep` with every edge whose endpoints both survive.
///
/// Weak connectivity is not required of the result.
pub fn induced_subgraph(dag: &Dag, keep: &NodeSet) -> Result<InducedSubgraph, GraphError> {
    if keep.is_empty() {
        return Err(GraphError::EmptySelection);
    }
    for &v in keep {
        dag.check_node(v)?;
    }
    let original: Vec<NodeId> = keep.iter().copied().collect();
    let renumber: BTreeMap<NodeId, NodeId> =
        original.iter().enumerate().map(|(k, &v)| (v, NodeId::from_index(k))).collect();
    let edges = dag
        .edges()
        .iter()
        .filter_map(|e| {
            Some(Edge { head: *renumber.get(&e.head)?, tail: *renumber.get(&e.tail)?, delay: e.delay })
        })
        .collect();
    Ok(InducedSubgraph { dag: Dag::build(original.len(), edges)?, original })
}

/// True iff the underlying undirected graph is a tree.
pub fn is_tree(dag: &Dag) -> bool {
    dag.edge_count() + 1 == dag.node_count() && dag.check_connected().is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn chain_order() {
        let dag = fixtures::chain(3);
        assert_eq!(topological_order(&dag), ids(&[1, 2, 3]));
    }

    #[test]
    fn ordering_example_starts_at_one_ends_at_seven() {
        let dag = fixtures::ordering_example();
        let order = topological_order(&dag);
        assert_eq!(order.first(), Some(&NodeId(1)));
        assert_eq!(order.last(), Some(&NodeId(7)));
    }

    #[test]
    fn single_node() {
        let dag = Dag::new(1, vec![]).unwrap();
        assert_eq!(topological_order(&dag), ids(&[1]));
        assert!(is_tree(&dag));
    }

    #[test]
    fn rejects_cycle_duplicate_and_disconnected() {
        assert!(matches!(Dag::from_arcs(2, &[(1, 2), (2, 1)]), Err(GraphError::CycleDetected(_))));
        assert!(matches!(
            Dag::new(2, vec![Edge::new(2, 1, 1), Edge::new(2, 1, 2)]),
            Err(GraphError::DuplicateEdge { .. })
        ));
        assert!(matches!(Dag::from_arcs(3, &[(1, 2)]), Err(GraphError::Disconnected(NodeId(3)))));
        assert!(matches!(Dag::from_delayed_arcs(2, &[(1, 2, 0)]), Err(GraphError::ZeroDelay { .. })));
        assert!(matches!(Dag::from_arcs(2, &[(1, 3)]), Err(GraphError::UnknownNode(3, 2))));
        assert!(matches!(Dag::from_arcs(2, &[(1, 1), (1, 2)]), Err(GraphError::SelfLoop(_))));
    }

    #[test]
    fn measured_aware_order_on_ordering_example() {
        let dag = fixtures::ordering_example();
        let p = IdentificationPattern::new([1, 2, 4, 6, 8], [3, 5, 7]);
        assert_eq!(measured_aware_order(&dag, &p), ids(&[1, 3, 2, 4, 6, 5, 8, 7]));
    }

    #[test]
    fn measured_aware_order_small_cases() {
        let chain = fixtures::chain(3);
        assert_eq!(measured_aware_order(&chain, &IdentificationPattern::new([1], [3])), ids(&[1, 2, 3]));
        let star = Dag::from_arcs(3, &[(1, 2), (1, 3)]).unwrap();
        assert_eq!(measured_aware_order(&star, &IdentificationPattern::new([1], [2, 3])), ids(&[1, 2, 3]));
    }

    #[test]
    fn reachable_excited_examples() {
        let mp = fixtures::multipartite();
        let p = IdentificationPattern::new([1, 2], [7]);
        assert_eq!(reachable_excited(&mp, NodeId(7), &p).unwrap(), node_set([1, 2]));
        assert!(reachable_excited(&mp, NodeId(1), &p).unwrap().is_empty());
        let diamond = fixtures::diamond();
        let p = IdentificationPattern::new([1], [2, 3, 4]);
        assert_eq!(reachable_excited(&diamond, NodeId(4), &p).unwrap(), node_set([1]));
        assert!(reachable_excited(&diamond, NodeId(9), &p).is_err());
    }

    #[test]
    fn lag_table_triangle_and_single_edge() {
        let tri = fixtures::triangle(2, 3, 4);
        let t = lag_table(&tri, &IdentificationPattern::new([1], [3]));
        // m31 + 1 and m21 + m32 + 1
        assert_eq!(t.lags(NodeId(3), NodeId(1)).unwrap(), BTreeSet::from([5, 6]));
        let edge = fixtures::chain(2);
        let t = lag_table(&edge, &IdentificationPattern::new([1], [2]));
        assert_eq!(t.lags(NodeId(2), NodeId(1)).unwrap(), BTreeSet::from([2]));
    }

    #[test]
    fn lag_table_relay_join_unit_delays() {
        let dag = fixtures::relay_join_unit();
        let t = lag_table(&dag, &IdentificationPattern::new([1, 2], [3, 4, 5, 6]));
        assert_eq!(t.lags(NodeId(5), NodeId(1)).unwrap(), BTreeSet::from([3]));
        assert_eq!(t.lags(NodeId(6), NodeId(1)).unwrap(), BTreeSet::from([3, 4]));
        assert_eq!(t.path_count(NodeId(6), NodeId(1)), 2);
    }

    #[test]
    fn induced_subgraph_cases() {
        let dag = fixtures::ordering_example();
        let keep: NodeSet = dag.nodes().filter(|&v| v != NodeId(2)).collect();
        let sub = induced_subgraph(&dag, &keep).unwrap();
        assert_eq!(sub.dag.node_count(), 7);
        let incident = dag.edges().iter().filter(|e| e.head == NodeId(2) || e.tail == NodeId(2)).count();
        assert_eq!(sub.dag.edge_count(), dag.edge_count() - incident);

        let same = induced_subgraph(&dag, &dag.node_set()).unwrap();
        assert_eq!(same.dag, dag);

        let chain = fixtures::chain(3);
        let split = induced_subgraph(&chain, &node_set([1, 3])).unwrap();
        assert_eq!(split.dag.node_count(), 2);
        assert_eq!(split.dag.edge_count(), 0);
        assert_eq!(split.original, ids(&[1, 3]));

        assert_eq!(induced_subgraph(&chain, &NodeSet::new()), Err(GraphError::EmptySelection));
    }

    #[test]
    fn tree_detection() {
        assert!(!is_tree(&fixtures::diamond()));
        assert!(is_tree(&fixtures::chain(3)));
        assert!(!is_tree(&fixtures::relay_join_unit()));
    }

    #[test]
    fn roles_and_path_delay() {
        let dag = fixtures::triangle(1, 1, 2);
        let roles = dag.roles();
        assert!(roles[0].is_source && !roles[0].is_sink);
        assert!(roles[2].is_sink);
        assert_eq!(dag.max_path_delay(), 2);
    }
}
