//! Discrete-time simulation of the additive network model
//!
//! ```text
//! y_i^k = sum_{j in N_i} f_{i,j}(y_j^{k - m_{i,j}}) + u_i^{k-1}
//! ```
//!
//! from zero initial rest, plus the response-equality oracle used to verify
//! unidentifiability witnesses.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::funclib::{EdgeFunction, FunctionSet};
use crate::graph::{lag_table, Dag, NodeId, NodeSet};
use crate::patterns::IdentificationPattern;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("signal for node {node} has {len} samples, horizon is {horizon}")]
    SignalLength { node: NodeId, len: usize, horizon: usize },
    #[error("input u_{node}^{step} = {value} is outside [-1, 1]")]
    InputOutOfRange { node: NodeId, step: usize, value: f64 },
    #[error("signal given for node {0}, which is not in the graph")]
    UnknownNode(NodeId),
    #[error("edge {tail} -> {head} has no function")]
    MissingFunction { head: NodeId, tail: NodeId },
    #[error("non-finite output at node {node}, step {step}")]
    EvaluationOverflow { node: NodeId, step: usize },
}

/// Input sequences `u_i^1..u_i^H` for excited nodes; every other input is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSchedule {
    horizon: usize,
    signals: BTreeMap<NodeId, Vec<f64>>,
}

impl ExcitationSchedule {
    pub fn new(horizon: usize, signals: BTreeMap<NodeId, Vec<f64>>) -> Result<Self, SimError> {
        if horizon == 0 {
            return Err(SimError::ZeroHorizon);
        }
        for (&node, s) in &signals {
            if s.len() != horizon {
                return Err(SimError::SignalLength { node, len: s.len(), horizon });
            }
            if let Some(k) = s.iter().position(|u| !(-1.0..=1.0).contains(u)) {
                return Err(SimError::InputOutOfRange { node, step: k + 1, value: s[k] });
            }
        }
        Ok(ExcitationSchedule { horizon, signals })
    }

    pub fn zeros(horizon: usize) -> Result<Self, SimError> {
        Self::new(horizon, BTreeMap::new())
    }

    /// `u_node^1 = amplitude`, all other samples zero.
    pub fn impulse(horizon: usize, node: NodeId, amplitude: f64) -> Result<Self, SimError> {
        let mut s = vec![0.0; horizon];
        if let Some(first) = s.first_mut() {
            *first = amplitude;
        }
        Self::new(horizon, BTreeMap::from([(node, s)]))
    }

    /// I.i.d. uniform samples in `[-amplitude, amplitude]` on each excited node.
    pub fn random(excited: &NodeSet, horizon: usize, seed: u64, amplitude: f64) -> Result<Self, SimError> {
        let amplitude = amplitude.clamp(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signals = excited
            .iter()
            .map(|&v| (v, (0..horizon).map(|_| amplitude * rng.gen_range(-1.0..=1.0)).collect()))
            .collect();
        Self::new(horizon, signals)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn signals(&self) -> &BTreeMap<NodeId, Vec<f64>> {
        &self.signals
    }

    /// `u_node^k`, zero for `k <= 0` and for unexcited nodes.
    pub fn input(&self, node: NodeId, k: i64) -> f64 {
        if k <= 0 || k as usize > self.horizon {
            return 0.0;
        }
        self.signals.get(&node).map_or(0.0, |s| s[k as usize - 1])
    }

    /// Copy with every sample after step `t` set to zero.
    pub fn truncated(&self, t: usize) -> Self {
        let signals = self
            .signals
            .iter()
            .map(|(&v, s)| (v, s.iter().enumerate().map(|(k, &u)| if k < t { u } else { 0.0 }).collect()))
            .collect();
        ExcitationSchedule { horizon: self.horizon, signals }
    }

    /// Copy with one sample replaced (clamped into `[-1, 1]`).
    pub fn with_sample(&self, node: NodeId, step: usize, value: f64) -> Self {
        let mut out = self.clone();
        let s = out.signals.entry(node).or_insert_with(|| vec![0.0; self.horizon]);
        s[step - 1] = value.clamp(-1.0, 1.0);
        out
    }
}

/// Outputs `y_i^1..y_i^H` for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    horizon: usize,
    outputs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn output(&self, node: NodeId) -> &[f64] {
        &self.outputs[node.index()]
    }

    /// `y_node^k` for `1 <= k <= horizon`.
    pub fn value(&self, node: NodeId, k: usize) -> f64 {
        self.outputs[node.index()][k - 1]
    }

    /// One row per step, one column per node; the header holds `names`.
    pub fn write_csv<W: io::Write>(&self, names: &[String], mut w: W) -> io::Result<()> {
        writeln!(w, "{}", names.join(","))?;
        let mut line = String::new();
        for k in 0..self.horizon {
            line.clear();
            for (i, out) in self.outputs.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                let _ = write!(line, "{}", out[k]);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self, names: &[String]) -> String {
        let mut buf = Vec::new();
        self.write_csv(names, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

struct Incoming<'a> {
    tail: usize,
    delay: usize,
    f: &'a EdgeFunction,
}

/// Runs the model forward from zero initial rest.
pub fn simulate(dag: &Dag, funcs: &FunctionSet, sched: &ExcitationSchedule) -> Result<Trajectory, SimError> {
    let h = sched.horizon();
    if h == 0 {
        return Err(SimError::ZeroHorizon);
    }
    if let Some(&v) = sched.signals().keys().find(|v| !dag.contains(**v)) {
        return Err(SimError::UnknownNode(v));
    }
    let mut wiring: Vec<Vec<Incoming<'_>>> = Vec::with_capacity(dag.node_count());
    for v in dag.nodes() {
        let mut list = Vec::new();
        for e in dag.incoming_edges(v) {
            let f = funcs.get(e.head, e.tail).ok_or(SimError::MissingFunction { head: e.head, tail: e.tail })?;
            list.push(Incoming { tail: e.tail.index(), delay: e.delay as usize, f });
        }
        wiring.push(list);
    }
    let inputs: Vec<Option<&Vec<f64>>> = dag.nodes().map(|v| sched.signals().get(&v)).collect();
    let mut y = vec![vec![0.0f64; h]; dag.node_count()];
    // Time steps are 1-based; column t holds step t + 1.
    for t in 0..h {
        for v in 0..dag.node_count() {
            let mut acc = match (inputs[v], t) {
                (Some(u), t) if t >= 1 => u[t - 1],
                _ => 0.0,
            };
            for inc in &wiring[v] {
                if t >= inc.delay {
                    acc += inc.f.apply(y[inc.tail][t - inc.delay]);
                }
            }
            if !acc.is_finite() {
                return Err(SimError::EvaluationOverflow { node: NodeId::from_index(v), step: t + 1 });
            }
            y[v][t] = acc;
        }
    }
    Ok(Trajectory { horizon: h, outputs: y })
}

/// Settings for [`response_equal`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub trials: usize,
    pub horizon: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Comparison {
    fn default() -> Self {
        Comparison { trials: 1000, horizon: 20, tol: 1e-9, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseComparison {
    pub equal: bool,
    pub max_deviation: f64,
    pub trials: usize,
    pub horizon: usize,
    /// Trials that had to be rerun at reduced amplitude after an overflow.
    pub resampled: usize,
}

const MAX_RESAMPLES: usize = 60;

/// Compares measured outputs of two function sets over seeded random schedules.
///
/// Trial `t` uses seed `cfg.seed + t`. A trial that overflows in either run is
/// repeated with the input amplitude halved. The horizon is raised to cover
/// the longest path lag when `cfg.horizon` is too short.
pub fn response_equal(
    dag: &Dag,
    p: &IdentificationPattern,
    f1: &FunctionSet,
    f2: &FunctionSet,
    cfg: &Comparison,
) -> Result<ResponseComparison, SimError> {
    let horizon = cfg.horizon.max(dag.max_path_delay() as usize + 2);
    let mut max_dev = 0.0f64;
    let mut resampled = 0;
    for trial in 0..cfg.trials {
        let seed = cfg.seed.wrapping_add(trial as u64);
        let mut amplitude = 1.0;
        let mut attempt = 0;
        let (a, b) = loop {
            let sched = ExcitationSchedule::random(&p.excited, horizon, seed, amplitude)?;
            match (simulate(dag, f1, &sched), simulate(dag, f2, &sched)) {
                (Ok(a), Ok(b)) => break (a, b),
                (Err(e @ SimError::EvaluationOverflow { .. }), _) | (_, Err(e @ SimError::EvaluationOverflow { .. })) => {
                    attempt += 1;
                    if attempt > MAX_RESAMPLES {
                        return Err(e);
                    }
                    amplitude *= 0.5;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        };
        if attempt > 0 {
            resampled += 1;
        }
        for &v in &p.measured {
            for (ya, yb) in a.output(v).iter().zip(b.output(v)) {
                max_dev = max_dev.max((ya - yb).abs());
            }
        }
    }
    Ok(ResponseComparison {
        equal: max_dev <= cfg.tol,
        max_deviation: max_dev,
        trials: cfg.trials,
        horizon,
        resampled,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CollisionKind {
    /// Every path arrives with the same lag.
    Full,
    /// Some, but not all, paths share a lag.
    Partial,
    /// All lags differ.
    Distinct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DelayCollision {
    pub target: NodeId,
    pub excited: NodeId,
    pub paths: u64,
    /// Lag to number of paths with that lag.
    pub lags: BTreeMap<u64, u64>,
    pub kind: CollisionKind,
}

/// Classifies, for every `(target, excited)` pair joined by at least two
/// paths, whether their lags coincide.
pub fn delay_collision_report(dag: &Dag, p: &IdentificationPattern) -> Vec<DelayCollision> {
    let table = lag_table(dag, p);
    table
        .iter()
        .filter_map(|(&(target, excited), lags)| {
            let paths = table.path_count(target, excited);
            if paths < 2 {
                return None;
            }
            let kind = if lags.len() == 1 {
                CollisionKind::Full
            } else if lags.len() as u64 == paths {
                CollisionKind::Distinct
            } else {
                CollisionKind::Partial
            };
            Some(DelayCollision { target, excited, paths, lags: lags.clone(), kind })
        })
        .collect()
}
