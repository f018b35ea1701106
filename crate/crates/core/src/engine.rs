//! Identifiability verdicts and unidentifiability witnesses.
//!
//! [`analyze`] runs the necessary checks, the full-measurement reduction, the
//! tree fast path and the per-node disjoint-path test with a genericity
//! probe. Every `Unidentifiable` edge verdict points at a [`Witness`]: a
//! second function set whose measured responses were checked equal to the
//! original by simulation. Where neither a proof nor a witness is found the
//! verdict is `Inconclusive` with a diagnostic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::funclib::{random_function, EdgeFunction, FunctionError, FunctionSet, FunctionSetError};
use crate::graph::{is_tree, Dag, Edge, EdgeKey, NodeId};
use crate::patterns::{check_necessary, reduce_to_full_measurement, IdentificationPattern, NecessaryCheckResult, PatternError, Violation};
use crate::simkit::{response_equal, Comparison, SimError};
use crate::structural::{disjoint_path_certificate, genericity_probe, DisjointPathCertificate, GenericityProbe, StructuralError, DEFAULT_DRAWS};

/// Bridge witness scales tried in order; `0.5` and `0.25` are exact in binary.
pub const BRIDGE_GAMMAS: [f64; 6] = [0.5, 0.25, -0.5, 2.0, -2.0, 1.5];

// Relative tolerance for recognizing `f_{Q,k} = gamma f_{P,k}`.
const COLLINEAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WitnessKind {
    /// Replaces an outgoing function of an unexcited source.
    UnexcitedSource,
    /// Replaces an incoming function of an unmeasured sink.
    UnmeasuredSink,
    /// Scales the inputs of an uncovered node and undoes it downstream.
    ScalingGamma,
    /// Swaps the roles of a direct and a relayed route into a join fed by
    /// proportional nodes.
    CollinearNeighbors,
    /// Moves weight between two monomial routes carrying the same power of
    /// a single excitation.
    CubicBridge,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeChange {
    pub head: NodeId,
    pub tail: NodeId,
    pub original: EdgeFunction,
    pub modified: EdgeFunction,
}

/// Two function sets with equal measured responses under `pattern`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub pattern: IdentificationPattern,
    #[serde(skip)]
    pub original: FunctionSet,
    #[serde(skip)]
    pub modified: FunctionSet,
    pub changes: Vec<EdgeChange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Set only after [`response_equal`] succeeds.
    pub verified: bool,
    pub max_deviation: f64,
    pub trials: usize,
    pub horizon: usize,
}

impl Witness {
    pub fn changed_edges(&self) -> Vec<EdgeKey> {
        self.changes.iter().map(|c| (c.head, c.tail)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("node {0} is excited, so the construction does not apply")]
    Excited(NodeId),
    #[error("node {0} is measured, so the construction does not apply")]
    Measured(NodeId),
    #[error("node {0} is not a source")]
    NotSource(NodeId),
    #[error("node {0} is not a sink")]
    NotSink(NodeId),
    #[error("node {0} is a source or a sink; scaling needs both inputs and outputs")]
    Boundary(NodeId),
    #[error("no edge {tail} -> {head}")]
    NoEdge { head: NodeId, tail: NodeId },
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("gamma must be nonzero")]
    ZeroGamma,
    #[error("modified functions equal the originals")]
    Unchanged,
    #[error("modified f_{{{head},{tail}}} would be identically zero")]
    VanishingFunction { head: NodeId, tail: NodeId },
    #[error("modified function leaves the admissible class: {0}")]
    Class(FunctionSetError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error("construction does not apply: {0}")]
    NotDetected(String),
    #[error("responses differ by {max_deviation:e} > {tol:e}")]
    NotVerified { max_deviation: f64, tol: f64 },
    #[error(transparent)]
    Simulation(#[from] SimError),
}

impl WitnessError {
    /// Refusals are precondition failures; the rest are failed attempts.
    pub fn is_refusal(&self) -> bool {
        !matches!(self, WitnessError::NotVerified { .. } | WitnessError::Simulation(_))
    }
}

fn finish(
    dag: &Dag,
    kind: WitnessKind,
    pattern: &IdentificationPattern,
    original: &FunctionSet,
    modified: FunctionSet,
    gamma: Option<f64>,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    let changes: Vec<EdgeChange> = original
        .differing_edges(&modified)
        .into_iter()
        .map(|(head, tail)| EdgeChange {
            head,
            tail,
            original: original.get(head, tail).cloned().expect("edge present in original"),
            modified: modified.get(head, tail).cloned().expect("edge present in modified"),
        })
        .collect();
    if changes.is_empty() {
        return Err(WitnessError::Unchanged);
    }
    modified.validate(dag).map_err(WitnessError::Class)?;
    let cmp = response_equal(dag, pattern, original, &modified, cfg)?;
    if !cmp.equal {
        return Err(WitnessError::NotVerified { max_deviation: cmp.max_deviation, tol: cfg.tol });
    }
    Ok(Witness {
        kind,
        pattern: pattern.clone(),
        original: original.clone(),
        modified,
        changes,
        gamma,
        verified: true,
        max_deviation: cmp.max_deviation,
        trials: cmp.trials,
        horizon: cmp.horizon,
    })
}

fn function_of(funcs: &FunctionSet, head: NodeId, tail: NodeId) -> Result<&EdgeFunction, WitnessError> {
    funcs.get(head, tail).ok_or(WitnessError::NoEdge { head, tail })
}

fn replaced(funcs: &FunctionSet, head: NodeId, tail: NodeId, f: EdgeFunction) -> FunctionSet {
    let mut out = funcs.clone();
    out.insert(head, tail, f);
    out
}

/// A random admissible function differing from `f`.
fn random_replacement(f: &EdgeFunction, seed: u64) -> Result<EdgeFunction, FunctionError> {
    let degree = if f.degree() == 5 { 3 } else { 5 };
    random_function(seed, degree)
}

/// Replaces `f_{out_neighbor, source}` with `replacement`; the source's output
/// is identically zero when it is not excited, so nothing downstream moves.
pub fn witness_unexcited_source_with(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    source: NodeId,
    out_neighbor: NodeId,
    replacement: EdgeFunction,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    if !dag.contains(source) {
        return Err(WitnessError::UnknownNode(source));
    }
    if !dag.is_source(source) {
        return Err(WitnessError::NotSource(source));
    }
    if pattern.is_excited(source) {
        return Err(WitnessError::Excited(source));
    }
    function_of(funcs, out_neighbor, source)?;
    let modified = replaced(funcs, out_neighbor, source, replacement);
    finish(dag, WitnessKind::UnexcitedSource, pattern, funcs, modified, None, cfg)
}

/// [`witness_unexcited_source_with`] using a seeded random replacement.
pub fn witness_unexcited_source(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    source: NodeId,
    out_neighbor: NodeId,
    seed: u64,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    let original = function_of(funcs, out_neighbor, source)?;
    let replacement = random_replacement(original, seed)?;
    witness_unexcited_source_with(dag, funcs, pattern, source, out_neighbor, replacement, cfg)
}

/// Replaces `f_{sink, in_neighbor}`; an unmeasured sink influences no
/// measured output.
pub fn witness_unmeasured_sink(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    sink: NodeId,
    in_neighbor: NodeId,
    seed: u64,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    if !dag.contains(sink) {
        return Err(WitnessError::UnknownNode(sink));
    }
    if !dag.is_sink(sink) {
        return Err(WitnessError::NotSink(sink));
    }
    if pattern.is_measured(sink) {
        return Err(WitnessError::Measured(sink));
    }
    let replacement = random_replacement(function_of(funcs, sink, in_neighbor)?, seed)?;
    let modified = replaced(funcs, sink, in_neighbor, replacement);
    finish(dag, WitnessKind::UnmeasuredSink, pattern, funcs, modified, None, cfg)
}

/// `f~_{node,l} = gamma f_{node,l}` for every in-neighbor `l` and
/// `f~_{j,node}(x) = f_{j,node}(x / gamma)` for every out-neighbor `j`.
/// Valid only for a node that is neither excited nor measured.
pub fn witness_scaling(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    node: NodeId,
    gamma: f64,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    if !dag.contains(node) {
        return Err(WitnessError::UnknownNode(node));
    }
    if pattern.is_excited(node) {
        return Err(WitnessError::Excited(node));
    }
    if pattern.is_measured(node) {
        return Err(WitnessError::Measured(node));
    }
    if dag.is_source(node) || dag.is_sink(node) {
        return Err(WitnessError::Boundary(node));
    }
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(WitnessError::ZeroGamma);
    }
    let mut modified = funcs.clone();
    for e in dag.incoming_edges(node) {
        modified.insert(e.head, e.tail, function_of(funcs, e.head, e.tail)?.scaled(gamma));
    }
    for e in dag.outgoing_edges(node) {
        modified.insert(e.head, e.tail, function_of(funcs, e.head, e.tail)?.precomposed_scale(1.0 / gamma));
    }
    finish(dag, WitnessKind::ScalingGamma, pattern, funcs, modified, Some(gamma), cfg)
}

/// A join `J` fed directly by `P` and through relay `R` by `Q`, where
/// `f_{Q,k} = gamma f_{P,k}` edge-wise, so `y_Q = gamma y_P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollinearMatch {
    pub join: NodeId,
    pub direct: NodeId,
    pub relay: NodeId,
    pub relay_source: NodeId,
    pub gamma: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= COLLINEAR_RTOL * a.abs().max(b.abs())
}

/// `gamma` with `f_{q,k} = gamma f_{p,k}` for every in-neighbor `k`, when the
/// two nodes have identical inputs, delays included, and neither is excited.
fn collinear_ratio(dag: &Dag, funcs: &FunctionSet, pattern: &IdentificationPattern, q: NodeId, p: NodeId) -> Option<f64> {
    if pattern.is_excited(q) || pattern.is_excited(p) || dag.in_degree(p) == 0 {
        return None;
    }
    let ins_p: Vec<_> = dag.incoming_edges(p).map(|e| (e.tail, e.delay)).collect();
    let ins_q: Vec<_> = dag.incoming_edges(q).map(|e| (e.tail, e.delay)).collect();
    if ins_p != ins_q {
        return None;
    }
    let mut gamma = None;
    for &(k, _) in &ins_p {
        let (fp, fq) = (funcs.get(p, k)?, funcs.get(q, k)?);
        let (tp, tq) = (fp.taylor(), fq.taylor());
        if tp.len() != tq.len() {
            return None;
        }
        let g = *gamma.get_or_insert(tq[tq.len() - 1] / tp[tp.len() - 1]);
        if !tp.iter().zip(tq).all(|(a, b)| close(g * a, *b)) {
            return None;
        }
    }
    gamma
}

/// Collinear configurations at `join`, in ascending `(direct, relay)` order.
pub fn detect_collinear(dag: &Dag, funcs: &FunctionSet, pattern: &IdentificationPattern, join: NodeId) -> Vec<CollinearMatch> {
    let mut out = Vec::new();
    let ins: Vec<NodeId> = dag.in_neighbors(join).collect();
    for &p in &ins {
        for &r in &ins {
            if r == p || pattern.is_excited(r) || dag.in_degree(r) != 1 {
                continue;
            }
            let q = dag.in_neighbors(r).next().expect("in-degree 1");
            if q == p {
                continue;
            }
            if let Some(gamma) = collinear_ratio(dag, funcs, pattern, q, p) {
                out.push(CollinearMatch { join, direct: p, relay: r, relay_source: q, gamma });
            }
        }
    }
    out
}

/// `f~_{J,P}(x) = f_{J,R}(f_{R,Q}(gamma x))` and
/// `f~_{J,R}(x) = f_{J,P}(f_{R,Q}^{-1}(x) / gamma)`, exchanging what the two
/// routes into `J` carry.
///
/// Needs `f_{R,Q} = b x^q` so that `f~_{J,R}` stays a polynomial (every power
/// in `f_{J,P}` a multiple of `q`), and `m_{J,P} = m_{R,Q} + m_{J,R}` so that
/// both routes deliver the same time sample.
pub fn witness_from_collinear(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    m: &CollinearMatch,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    let CollinearMatch { join, direct, relay, relay_source, gamma } = *m;
    if gamma == 0.0 {
        return Err(WitnessError::ZeroGamma);
    }
    let delay = |h, t| dag.edge(h, t).map(|e| e.delay as u64).ok_or(WitnessError::NoEdge { head: h, tail: t });
    if delay(join, direct)? != delay(relay, relay_source)? + delay(join, relay)? {
        return Err(WitnessError::NotDetected(format!(
            "route {direct} -> {join} is not synchronized with {relay_source} -> {relay} -> {join}"
        )));
    }
    let f_rq = function_of(funcs, relay, relay_source)?;
    let (b, q) = f_rq.as_monomial().ok_or(FunctionError::InversionUnsupported)?;
    if q % 2 == 0 {
        return Err(FunctionError::InversionUnsupported.into());
    }
    let f_jp = function_of(funcs, join, direct)?;
    let f_jr = function_of(funcs, join, relay)?;
    let t = f_jp.taylor();
    if t.iter().enumerate().any(|(k, &a)| a != 0.0 && k % q != 0) {
        return Err(WitnessError::NotDetected(format!(
            "f_{{{join},{direct}}} has powers that are not multiples of {q}; the exchanged function is not polynomial"
        )));
    }
    let base = b * gamma.powi(q as i32);
    let new_jr: Vec<f64> = (0..=t.len().saturating_sub(1) / q).map(|r| t[q * r] / base.powi(r as i32)).collect();
    let new_jp = f_jr.compose(&f_rq.precomposed_scale(gamma));
    let mut modified = funcs.clone();
    modified.insert(join, relay, EdgeFunction::from_taylor(new_jr));
    modified.insert(join, direct, new_jp);
    finish(dag, WitnessKind::CollinearNeighbors, pattern, funcs, modified, Some(gamma), cfg)
}

/// Finds a collinear configuration with the given `gamma` anywhere in the
/// graph and builds its witness.
pub fn witness_collinear(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    gamma: f64,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    let mut last = None;
    for join in dag.nodes() {
        for m in detect_collinear(dag, funcs, pattern, join) {
            if !close(m.gamma, gamma) {
                continue;
            }
            match witness_from_collinear(dag, funcs, pattern, &CollinearMatch { gamma, ..m }, cfg) {
                Ok(w) => return Ok(w),
                Err(e) => last = Some(e),
            }
        }
    }
    Err(last.unwrap_or_else(|| WitnessError::NotDetected(format!("no nodes with proportional inputs at ratio {gamma}"))))
}

/// Response `c u_s^d` delayed by `lag` steps, in a single excitation `u_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct MonomialResponse {
    coefficient: f64,
    degree: usize,
    lag: u64,
}

/// Two in-neighbors `p`, `q` of `join` whose responses are single monomials
/// of the one excitation `source` reaching `join`, arriving at `join` with
/// the same power and lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeMatch {
    pub join: NodeId,
    pub source: NodeId,
    pub p: NodeId,
    pub q: NodeId,
    /// `f_{join,p} = a_p x^{r_p}` and response `y_p = c_p u^{d_p}`.
    pub a_p: f64,
    pub r_p: usize,
    pub c_p: f64,
    pub a_q: f64,
    pub r_q: usize,
    pub c_q: f64,
}

/// Bridge configurations at `join`, in ascending `(p, q)` order.
pub fn detect_bridge(dag: &Dag, funcs: &FunctionSet, pattern: &IdentificationPattern, join: NodeId) -> Vec<BridgeMatch> {
    let ancestors = dag.ancestors(join);
    let mut excited = ancestors.iter().filter(|v| pattern.is_excited(**v));
    let (Some(&source), None) = (excited.next(), excited.next()) else {
        return Vec::new();
    };
    // Symbolic responses over the ancestors; `None` = not a single monomial,
    // absent = identically zero.
    let mut resp: BTreeMap<NodeId, Option<MonomialResponse>> = BTreeMap::new();
    resp.insert(source, Some(MonomialResponse { coefficient: 1.0, degree: 1, lag: 1 }));
    for &v in dag.topological_order() {
        if v == source || !ancestors.contains(&v) || !dag.has_path(source, v) {
            continue;
        }
        let mut acc: Option<Option<MonomialResponse>> = None;
        for e in dag.incoming_edges(v) {
            let Some(input) = resp.get(&e.tail) else { continue };
            let term = input.and_then(|m| {
                let (a, r) = funcs.get(v, e.tail)?.as_monomial()?;
                Some(MonomialResponse { coefficient: a * m.coefficient.powi(r as i32), degree: m.degree * r, lag: m.lag + e.delay as u64 })
            });
            acc = Some(match (acc, term) {
                (None, t) => t,
                (Some(Some(x)), Some(t)) if x.degree == t.degree && x.lag == t.lag => {
                    let c = x.coefficient + t.coefficient;
                    (c != 0.0).then_some(MonomialResponse { coefficient: c, ..x })
                }
                _ => None,
            });
        }
        if let Some(r) = acc {
            resp.insert(v, r);
        }
    }
    let mut out = Vec::new();
    let ins: Vec<_> = dag.incoming_edges(join).copied().collect();
    let arrival = |e: &Edge| -> Option<(MonomialResponse, f64, usize)> {
        let m = (*resp.get(&e.tail)?)?;
        let (a, r) = funcs.get(join, e.tail)?.as_monomial()?;
        Some((MonomialResponse { lag: m.lag + e.delay as u64, ..m }, a, r))
    };
    for (i, ep) in ins.iter().enumerate() {
        let Some((mp, a_p, r_p)) = arrival(ep) else { continue };
        for eq in &ins[i + 1..] {
            let Some((mq, a_q, r_q)) = arrival(eq) else { continue };
            if mp.degree * r_p == mq.degree * r_q && mp.lag == mq.lag {
                out.push(BridgeMatch {
                    join,
                    source,
                    p: ep.tail,
                    q: eq.tail,
                    a_p,
                    r_p,
                    c_p: mp.coefficient,
                    a_q,
                    r_q,
                    c_q: mq.coefficient,
                });
            }
        }
    }
    out
}

/// `f~_{J,p} = (a_p + gamma c_q^{r_q} / c_p^{r_p}) x^{r_p}` and
/// `f~_{J,q} = (a_q - gamma) x^{r_q}`; the join sees the same total.
pub fn witness_from_bridge(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    m: &BridgeMatch,
    gamma: f64,
    cfg: &Comparison,
) -> Result<Witness, WitnessError> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(WitnessError::ZeroGamma);
    }
    let new_p = m.a_p + gamma * m.c_q.powi(m.r_q as i32) / m.c_p.powi(m.r_p as i32);
    let new_q = m.a_q - gamma;
    for (coef, node) in [(new_p, m.p), (new_q, m.q)] {
        if coef == 0.0 {
            return Err(WitnessError::VanishingFunction { head: m.join, tail: node });
        }
        if !coef.is_finite() {
            return Err(FunctionError::NonFinite(coef).into());
        }
    }
    let mut modified = funcs.clone();
    modified.insert(m.join, m.p, EdgeFunction::monomial(new_p, m.r_p));
    modified.insert(m.join, m.q, EdgeFunction::monomial(new_q, m.r_q));
    finish(dag, WitnessKind::CubicBridge, pattern, funcs, modified, Some(gamma), cfg)
}

/// Bridge witness on a four-node diamond `s -> r1, r2 -> t` with cubic
/// functions `a = (a_{r1,s}, a_{r2,s}, a_{t,r1}, a_{t,r2})`, `r1 < r2`,
/// under the pattern exciting `s` and measuring the rest.
pub fn witness_cubic_bridge(dag: &Dag, coeffs: [f64; 4], gamma: f64, cfg: &Comparison) -> Result<Witness, WitnessError> {
    let shape = || WitnessError::NotDetected("graph is not a four-node diamond".into());
    if dag.node_count() != 4 || dag.edge_count() != 4 {
        return Err(shape());
    }
    let sources: Vec<_> = dag.sources().into_iter().collect();
    let sinks: Vec<_> = dag.sinks().into_iter().collect();
    let (&[s], &[t]) = (sources.as_slice(), sinks.as_slice()) else { return Err(shape()) };
    let relays: Vec<NodeId> = dag.out_neighbors(s).collect();
    if relays.len() != 2 || relays.iter().any(|&r| dag.edge(t, r).is_none()) {
        return Err(shape());
    }
    let (r1, r2) = (relays[0].min(relays[1]), relays[0].max(relays[1]));
    let [a1s, a2s, at1, at2] = coeffs;
    if a1s == 0.0 || a2s == 0.0 {
        return Err(WitnessError::Class(FunctionSetError::Class {
            head: if a1s == 0.0 { r1 } else { r2 },
            tail: s,
            violation: crate::funclib::ClassViolation::ZeroViolation(0.0),
        }));
    }
    let cube = |a| EdgeFunction::monomial(a, 3);
    let mut funcs = FunctionSet::new();
    funcs.insert(r1, s, cube(a1s));
    funcs.insert(r2, s, cube(a2s));
    funcs.insert(t, r1, cube(at1));
    funcs.insert(t, r2, cube(at2));
    funcs.validate(dag).map_err(WitnessError::Class)?;
    let pattern = IdentificationPattern { excited: [s].into(), measured: [r1, r2, t].into() };
    let m = detect_bridge(dag, &funcs, &pattern, t).into_iter().next().ok_or_else(shape)?;
    witness_from_bridge(dag, &funcs, &pattern, &m, gamma, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Identifiable { reason: String },
    Unidentifiable { witness: usize, kind: WitnessKind },
    Inconclusive { diagnostic: String },
}

impl Verdict {
    pub fn is_identifiable(&self) -> bool {
        matches!(self, Verdict::Identifiable { .. })
    }

    pub fn is_unidentifiable(&self) -> bool {
        matches!(self, Verdict::Unidentifiable { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Identifiable { .. } => "Identifiable",
            Verdict::Unidentifiable { .. } => "Unidentifiable",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Summary {
    Identifiable,
    Unidentifiable,
    Inconclusive,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeVerdict {
    pub head: NodeId,
    pub tail: NodeId,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub pattern: IdentificationPattern,
    pub pattern_used: IdentificationPattern,
    pub necessary: NecessaryCheckResult,
    /// Sorted by `(head, tail)`.
    pub per_edge: Vec<EdgeVerdict>,
    pub summary: Summary,
    pub certificates: Vec<DisjointPathCertificate>,
    pub probes: Vec<GenericityProbe>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    #[serde(serialize_with = "serialize_functions")]
    pub functions: FunctionSet,
}

fn serialize_functions<S: Serializer>(f: &FunctionSet, s: S) -> Result<S::Ok, S::Error> {
    f.serialize(s)
}

impl Report {
    pub fn verdict(&self, head: impl Into<NodeId>, tail: impl Into<NodeId>) -> Option<&Verdict> {
        let key = (head.into(), tail.into());
        self.per_edge.iter().find(|e| (e.head, e.tail) == key).map(|e| &e.verdict)
    }

    pub fn certificate(&self, node: impl Into<NodeId>) -> Option<&DisjointPathCertificate> {
        let node = node.into();
        self.certificates.iter().find(|c| c.node == node)
    }

    pub fn probe(&self, node: impl Into<NodeId>) -> Option<&GenericityProbe> {
        let node = node.into();
        self.probes.iter().find(|c| c.node == node)
    }

    /// Witness referenced by an edge verdict.
    pub fn witness_for(&self, head: impl Into<NodeId>, tail: impl Into<NodeId>) -> Option<&Witness> {
        match self.verdict(head, tail)? {
            Verdict::Unidentifiable { witness, .. } => self.witnesses.get(*witness),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    /// Seeds random functions (when none are given) and probe points.
    pub seed: u64,
    pub draws: usize,
    /// Witness verification settings.
    pub verification: Comparison,
}

impl AnalyzeOptions {
    pub fn with_seed(seed: u64) -> Self {
        AnalyzeOptions { seed, draws: DEFAULT_DRAWS, verification: Comparison { seed, ..Comparison::default() } }
    }
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self::with_seed(42)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Functions(#[from] FunctionSetError),
    #[error(transparent)]
    Function(#[from] FunctionError),
}

struct Verdicts {
    per_edge: BTreeMap<EdgeKey, Verdict>,
    witnesses: Vec<Witness>,
}

impl Verdicts {
    fn set(&mut self, key: EdgeKey, v: Verdict) {
        // A verified witness is never overwritten.
        if !self.per_edge.get(&key).is_some_and(Verdict::is_unidentifiable) {
            self.per_edge.insert(key, v);
        }
    }

    fn attach(&mut self, w: Witness) {
        let idx = self.witnesses.len();
        let kind = w.kind;
        for key in w.changed_edges() {
            self.set(key, Verdict::Unidentifiable { witness: idx, kind });
        }
        self.witnesses.push(w);
    }
}

/// Per-edge identifiability of `dag` under `pattern`.
///
/// Without `funcs`, seeded random cubics stand in for generic functions.
pub fn analyze(
    dag: &Dag,
    pattern: &IdentificationPattern,
    funcs: Option<&FunctionSet>,
    opts: &AnalyzeOptions,
) -> Result<Report, EngineError> {
    pattern.check_nodes(dag)?;
    let mut notes = Vec::new();
    let functions = match funcs {
        Some(f) => {
            f.validate(dag)?;
            f.clone()
        }
        None => {
            notes.push(format!("no functions supplied; random cubics drawn with seed {}", opts.seed));
            FunctionSet::random(dag, opts.seed, 3)?
        }
    };
    let mut out = Verdicts { per_edge: Default::default(), witnesses: Vec::new() };
    let mut certificates = Vec::new();
    let mut probes = Vec::new();

    let necessary = check_necessary(dag, pattern);
    let pattern_used = if necessary.ok() {
        let reduced = reduce_to_full_measurement(pattern, dag)?;
        if reduced != *pattern {
            notes.push(format!("verdicts computed with every node measured ({reduced}); this is equivalent to the input pattern"));
        }
        reduced
    } else {
        notes.push("necessary conditions fail; full-measurement reduction skipped".into());
        necessary_stage(dag, &functions, pattern, &necessary, opts, &mut out, &mut notes);
        pattern.clone()
    };

    if necessary.ok() {
        if is_tree(dag) {
            for e in dag.edges() {
                out.set(e.key(), Verdict::Identifiable { reason: "tree with every node covered, sources excited and sinks measured".into() });
            }
        } else {
            for node in dag.nodes().filter(|v| !dag.is_source(*v)) {
                node_stage(dag, &functions, &pattern_used, node, opts, &mut out, &mut certificates, &mut probes, &mut notes);
            }
        }
    }
    for e in dag.edges() {
        out.per_edge.entry(e.key()).or_insert_with(|| Verdict::Inconclusive {
            diagnostic: "necessary conditions fail elsewhere; sufficiency not evaluated".into(),
        });
    }

    let per_edge: Vec<EdgeVerdict> =
        out.per_edge.into_iter().map(|((head, tail), verdict)| EdgeVerdict { head, tail, verdict }).collect();
    let summary = if per_edge.iter().any(|e| e.verdict.is_unidentifiable()) {
        Summary::Unidentifiable
    } else if per_edge.iter().all(|e| e.verdict.is_identifiable()) {
        Summary::Identifiable
    } else {
        Summary::Inconclusive
    };
    Ok(Report {
        seed: opts.seed,
        pattern: pattern.clone(),
        pattern_used,
        necessary,
        per_edge,
        summary,
        certificates,
        probes,
        witnesses: out.witnesses,
        notes,
        functions,
    })
}

fn necessary_stage(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    necessary: &NecessaryCheckResult,
    opts: &AnalyzeOptions,
    out: &mut Verdicts,
    notes: &mut Vec<String>,
) {
    let cfg = &opts.verification;
    let mut record = |r: Result<Witness, WitnessError>, what: String, out: &mut Verdicts| match r {
        Ok(w) => out.attach(w),
        Err(e) => notes.push(format!("{what}: witness failed: {e}")),
    };
    for (k, v) in necessary.violations.iter().enumerate() {
        let seed = opts.seed.wrapping_add(k as u64);
        match *v {
            Violation::UnexcitedSource(s) => {
                for j in dag.out_neighbors(s).collect::<Vec<_>>() {
                    let r = witness_unexcited_source(dag, funcs, pattern, s, j, seed, cfg);
                    record(r, v.to_string(), out);
                }
            }
            Violation::UnmeasuredSink(t) => {
                for j in dag.in_neighbors(t).collect::<Vec<_>>() {
                    let r = witness_unmeasured_sink(dag, funcs, pattern, t, j, seed, cfg);
                    record(r, v.to_string(), out);
                }
            }
            // Uncovered sources and sinks are handled by the two cases above.
            Violation::Uncovered(node) if !dag.is_source(node) && !dag.is_sink(node) => {
                let r = witness_scaling(dag, funcs, pattern, node, 2.0, cfg);
                record(r, v.to_string(), out);
            }
            Violation::Uncovered(_) => {}
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn node_stage(
    dag: &Dag,
    funcs: &FunctionSet,
    pattern: &IdentificationPattern,
    node: NodeId,
    opts: &AnalyzeOptions,
    out: &mut Verdicts,
    certificates: &mut Vec<DisjointPathCertificate>,
    probes: &mut Vec<GenericityProbe>,
    notes: &mut Vec<String>,
) {
    let cfg = &opts.verification;
    let cert = disjoint_path_certificate(dag, pattern, node);
    let incoming: Vec<EdgeKey> = dag.incoming_edges(node).map(|e| e.key()).collect();
    let inconclusive = |out: &mut Verdicts, msg: String| {
        for &k in &incoming {
            out.set(k, Verdict::Inconclusive { diagnostic: msg.clone() });
        }
    };
    if cert.satisfied() {
        let (required, achieved) = (cert.required, cert.achieved);
        certificates.push(cert);
        let probe = match genericity_probe(dag, funcs, pattern, node, opts.draws, opts.seed) {
            Ok(p) => p,
            Err(e @ StructuralError::GenericityUndetermined(_)) | Err(e @ StructuralError::EvaluationOverflow(_)) => {
                inconclusive(out, format!("genericity undetermined: {e}"));
                return;
            }
            Err(e) => {
                inconclusive(out, e.to_string());
                return;
            }
        };
        let (generic, max_rank, structural) = (probe.generic, probe.max_rank, probe.structural);
        probes.push(probe);
        if generic {
            for &k in &incoming {
                out.set(k, Verdict::Identifiable {
                    reason: format!("{achieved}/{required} vertex-disjoint paths from excited nodes to in-neighbors of {node}; rank bound attained"),
                });
            }
            return;
        }
        for m in detect_collinear(dag, funcs, pattern, node) {
            match witness_from_collinear(dag, funcs, pattern, &m, cfg) {
                Ok(w) => {
                    out.attach(w);
                    break;
                }
                Err(e) => notes.push(format!("collinear inputs at node {node}: {e}")),
            }
        }
        inconclusive(
            out,
            format!("numeric rank at most {max_rank} below the structural bound {structural} at node {node} over {} points", opts.draws),
        );
    } else {
        let msg = format!(
            "{}/{} vertex-disjoint paths from excited nodes to in-neighbors of {node}; sufficiency not established",
            cert.achieved, cert.required
        );
        certificates.push(cert);
        'matches: for m in detect_bridge(dag, funcs, pattern, node) {
            for gamma in BRIDGE_GAMMAS {
                match witness_from_bridge(dag, funcs, pattern, &m, gamma, cfg) {
                    Ok(w) => {
                        out.attach(w);
                        break 'matches;
                    }
                    Err(WitnessError::VanishingFunction { .. }) => continue,
                    Err(e) => notes.push(format!("bridge at node {node} with gamma {gamma}: {e}")),
                }
            }
        }
        inconclusive(out, msg);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::simkit::{simulate, ExcitationSchedule};

    fn quick() -> Comparison {
        Comparison { trials: 50, ..Comparison::default() }
    }

    fn cubes(dag: &Dag) -> FunctionSet {
        FunctionSet::for_dag(dag, |_, _| EdgeFunction::monomial(1.0, 3))
    }

    #[test]
    fn unexcited_source_witness() {
        let dag = fixtures::diamond();
        let f = fixtures::diamond_cubics(1.0, 1.0, 1.0, 1.0);
        let p = IdentificationPattern::new(Vec::<usize>::new(), [1, 2, 3, 4]);
        let w = witness_unexcited_source_with(&dag, &f, &p, NodeId(1), NodeId(2), EdgeFunction::monomial(1.0, 5), &quick()).unwrap();
        assert!(w.verified);
        assert_eq!(w.max_deviation, 0.0);
        assert_eq!(w.changed_edges(), vec![(NodeId(2), NodeId(1))]);

        let same = witness_unexcited_source_with(&dag, &f, &p, NodeId(1), NodeId(2), EdgeFunction::monomial(1.0, 3), &quick());
        assert_eq!(same.unwrap_err(), WitnessError::Unchanged);
        let excited = witness_unexcited_source(&dag, &f, &fixtures::diamond_pattern(), NodeId(1), NodeId(2), 1, &quick());
        assert_eq!(excited.unwrap_err(), WitnessError::Excited(NodeId(1)));

        let chain = fixtures::chain(2);
        let p = IdentificationPattern::new(Vec::<usize>::new(), [2]);
        assert!(witness_unexcited_source(&chain, &cubes(&chain), &p, NodeId(1), NodeId(2), 9, &quick()).unwrap().verified);
    }

    #[test]
    fn scaling_witness() {
        let chain = fixtures::chain(3);
        let f = FunctionSet::new().with(2, 1, EdgeFunction::new([0.5, 0.0, 1.0])).with(3, 2, EdgeFunction::new([1.0, 0.0, 1.0]));
        let p = IdentificationPattern::new([1], [3]);
        let w = witness_scaling(&chain, &f, &p, NodeId(2), 2.0, &quick()).unwrap();
        assert_eq!(w.modified.get(NodeId(2), NodeId(1)).unwrap().coefficients(), &[1.0, 0.0, 2.0]);
        assert_eq!(w.modified.get(NodeId(3), NodeId(2)).unwrap().coefficients(), &[0.5, 0.0, 0.125]);
        let sched = ExcitationSchedule::random(&p.excited, 20, 3, 1.0).unwrap();
        let (a, b) = (simulate(&chain, &f, &sched).unwrap(), simulate(&chain, &w.modified, &sched).unwrap());
        let dev = a.output(NodeId(3)).iter().zip(b.output(NodeId(3))).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-12);

        assert!(witness_scaling(&chain, &f, &p, NodeId(2), -1.0, &quick()).unwrap().verified);
        assert_eq!(witness_scaling(&chain, &f, &p, NodeId(2), 1.0, &quick()).unwrap_err(), WitnessError::Unchanged);
        assert_eq!(witness_scaling(&chain, &f, &p, NodeId(2), 0.0, &quick()).unwrap_err(), WitnessError::ZeroGamma);
        let covered = IdentificationPattern::new([1], [2, 3]);
        assert_eq!(witness_scaling(&chain, &f, &covered, NodeId(2), 2.0, &quick()).unwrap_err(), WitnessError::Measured(NodeId(2)));
    }

    #[test]
    fn collinear_witness() {
        let dag = fixtures::relay_join();
        let p = fixtures::relay_join_pattern();
        let f = fixtures::relay_join_collinear(2.0);
        let w = witness_collinear(&dag, &f, &p, 2.0, &quick()).unwrap();
        assert_eq!(w.kind, WitnessKind::CollinearNeighbors);
        assert_eq!(w.changed_edges(), vec![(NodeId(6), NodeId(4)), (NodeId(6), NodeId(5))]);
        assert_eq!(w.modified.get(NodeId(6), NodeId(4)).unwrap().as_monomial(), Some((512.0, 9)));
        assert_eq!(w.modified.get(NodeId(6), NodeId(5)).unwrap().as_monomial(), Some((1.0 / 512.0, 3)));

        let random = FunctionSet::random(&dag, 3, 3).unwrap();
        assert!(matches!(witness_collinear(&dag, &random, &p, 2.0, &quick()), Err(WitnessError::NotDetected(_))));

        let mut linear_relay = f.clone();
        linear_relay.insert(5, 3, EdgeFunction::new([1.0, 0.0, 1.0]));
        assert_eq!(
            witness_collinear(&dag, &linear_relay, &p, 2.0, &quick()).unwrap_err(),
            WitnessError::Function(FunctionError::InversionUnsupported)
        );
        let unsynced = witness_collinear(&fixtures::relay_join_unit(), &f, &p, 2.0, &quick());
        assert!(matches!(unsynced, Err(WitnessError::NotDetected(_))));
    }

    #[test]
    fn cubic_bridge_witness() {
        let dag = fixtures::diamond();
        let w = witness_cubic_bridge(&dag, [1.0, 2.0, 1.0, 1.0], 0.5, &quick()).unwrap();
        assert_eq!(w.modified.get(NodeId(4), NodeId(2)).unwrap().as_monomial(), Some((5.0, 3)));
        assert_eq!(w.modified.get(NodeId(4), NodeId(3)).unwrap().as_monomial(), Some((0.5, 3)));
        assert!(w.verified);
        assert!(witness_cubic_bridge(&dag, [1.0, 1.0, 1.0, 1.0], 0.25, &quick()).unwrap().verified);
        assert_eq!(
            witness_cubic_bridge(&dag, [1.0, 2.0, 1.0, 1.0], 1.0, &quick()).unwrap_err(),
            WitnessError::VanishingFunction { head: NodeId(4), tail: NodeId(3) }
        );
        assert!(matches!(witness_cubic_bridge(&fixtures::crossed(), [1.0; 4], 0.5, &quick()), Err(WitnessError::NotDetected(_))));
    }

    #[test]
    fn bridge_detection_skips_multiple_excitations() {
        let dag = fixtures::diamond();
        let f = fixtures::diamond_cubics(1.0, 2.0, 1.0, 1.0);
        assert_eq!(detect_bridge(&dag, &f, &fixtures::diamond_pattern(), NodeId(4)).len(), 1);
        assert!(detect_bridge(&dag, &f, &IdentificationPattern::new([1, 2], [3, 4]), NodeId(4)).is_empty());
    }

    #[test]
    fn analyze_examples() {
        let opts = AnalyzeOptions { verification: quick(), ..AnalyzeOptions::default() };
        let r = analyze(&fixtures::crossed(), &fixtures::crossed_pattern(), None, &opts).unwrap();
        assert_eq!(r.summary, Summary::Identifiable);
        assert_eq!(r.certificate(5).unwrap().paths.len(), 2);

        let dag = fixtures::diamond();
        let r = analyze(&dag, &fixtures::diamond_pattern(), Some(&fixtures::diamond_cubics(1.0, 2.0, 1.0, 1.0)), &opts).unwrap();
        assert_eq!(r.summary, Summary::Unidentifiable);
        assert!(r.verdict(2, 1).unwrap().is_identifiable());
        assert!(r.verdict(3, 1).unwrap().is_identifiable());
        assert_eq!(r.witness_for(4, 2).unwrap().kind, WitnessKind::CubicBridge);
        assert_eq!(r.witness_for(4, 3).unwrap().kind, WitnessKind::CubicBridge);

        let r = analyze(&fixtures::chain(3), &IdentificationPattern::new([1], [2, 3]), None, &opts).unwrap();
        assert_eq!(r.summary, Summary::Identifiable);
        assert_eq!(r.pattern_used, IdentificationPattern::new([1], [1, 2, 3]));

        let dag = fixtures::relay_join();
        let r = analyze(&dag, &fixtures::relay_join_pattern(), Some(&fixtures::relay_join_collinear(2.0)), &opts).unwrap();
        assert_eq!(r.summary, Summary::Unidentifiable);
        assert_eq!(r.witness_for(6, 5).unwrap().kind, WitnessKind::CollinearNeighbors);
        assert!(r.verdict(5, 3).unwrap().is_identifiable());
    }

    #[test]
    fn analyze_necessary_failures() {
        let opts = AnalyzeOptions { verification: quick(), ..AnalyzeOptions::default() };
        let chain = fixtures::chain(4);
        let r = analyze(&chain, &IdentificationPattern::new([1], [2, 4]), None, &opts).unwrap();
        assert_eq!(r.summary, Summary::Unidentifiable);
        assert_eq!(r.witness_for(3, 2).unwrap().kind, WitnessKind::ScalingGamma);
        assert_eq!(r.witness_for(4, 3).unwrap().kind, WitnessKind::ScalingGamma);
        assert!(matches!(r.verdict(2, 1), Some(Verdict::Inconclusive { .. })));

        let r = analyze(&chain, &IdentificationPattern::new([2, 3], [4]), None, &opts).unwrap();
        assert_eq!(r.witness_for(2, 1).unwrap().kind, WitnessKind::UnexcitedSource);
        let r = analyze(&chain, &IdentificationPattern::new([1, 2], [3]), None, &opts).unwrap();
        assert_eq!(r.witness_for(4, 3).unwrap().kind, WitnessKind::UnmeasuredSink);
    }

    #[test]
    fn edgeless_graph_is_vacuously_identifiable() {
        let dag = Dag::new(1, Vec::new()).unwrap();
        let r = analyze(&dag, &IdentificationPattern::new([1], [1]), None, &AnalyzeOptions::default()).unwrap();
        assert_eq!(r.summary, Summary::Identifiable);
        assert!(r.per_edge.is_empty());
    }
}
