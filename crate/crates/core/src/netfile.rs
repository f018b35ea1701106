//! TOML network description: node names, edges with delays and optional
//! polynomial coefficients, and an identification pattern.
//!
//! ```toml
//! [network]
//! nodes = ["1", "2", "3"]
//!
//! [pattern]
//! excited = ["1"]
//! measured = ["2", "3"]
//!
//! [[edge]]
//! tail = "1"
//! head = "2"
//! delay = 1
//! coefficients = [0.0, 0.0, 1.0]   # a_1, a_2, a_3
//! ```
//!
//! Names map to ids `1..=n` in declaration order. Coefficients are given for
//! every edge or for none; `constant` (a_0) is accepted so that functions not
//! vanishing at the origin can be reported rather than silently dropped.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::funclib::{ClassViolation, EdgeFunction, FunctionSet};
use crate::graph::{Dag, Edge, GraphError, NodeId, NodeSet};
use crate::patterns::IdentificationPattern;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    network: RawNetwork,
    pattern: RawPattern,
    #[serde(default)]
    edge: Vec<Spanned<RawEdge>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    nodes: Spanned<Vec<Spanned<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPattern {
    #[serde(default)]
    excited: Vec<Spanned<String>>,
    #[serde(default)]
    measured: Vec<Spanned<String>>,
}

fn unit_delay() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    head: Spanned<String>,
    tail: Spanned<String>,
    #[serde(default = "unit_delay")]
    delay: u32,
    coefficients: Option<Vec<f64>>,
    constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetFileError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: node {name:?} is declared twice")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: unknown node {name:?}")]
    UnknownName { line: usize, name: String },
    #[error("{}{source}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Graph { line: Option<usize>, source: GraphError },
    #[error("line {line}: f_{{{head},{tail}}}: {violation}")]
    Class { line: usize, head: String, tail: String, violation: ClassViolation },
    #[error("line {line}: edge {tail} -> {head} has no coefficients while other edges do; give functions for every edge or for none")]
    MissingCoefficients { line: usize, head: String, tail: String },
}

impl NetFileError {
    /// Process exit status for `validate` and every command reading a file.
    pub fn exit_code(&self) -> i32 {
        match self {
            NetFileError::Io { .. } => 2,
            NetFileError::Parse { .. } => 3,
            NetFileError::Graph { source: GraphError::CycleDetected(_), .. } => 4,
            NetFileError::Graph { .. } | NetFileError::DuplicateName { .. } | NetFileError::UnknownName { .. } => 5,
            NetFileError::Class { violation, .. } => match violation {
                ClassViolation::NonFiniteCoefficient { .. } => 3,
                ClassViolation::ZeroViolation(_) => 6,
                ClassViolation::PurelyLinear => 7,
                ClassViolation::NotSurjective(_) => 8,
                ClassViolation::DegreeCap { .. } => 9,
            },
            NetFileError::MissingCoefficients { .. } => 9,
        }
    }
}

/// A parsed and validated network description.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFile {
    pub names: Vec<String>,
    pub dag: Dag,
    pub functions: Option<FunctionSet>,
    pub pattern: IdentificationPattern,
}

struct LineIndex(Vec<usize>);

impl LineIndex {
    fn new(src: &str) -> Self {
        LineIndex(src.match_indices('\n').map(|(i, _)| i).collect())
    }

    /// 1-based line holding byte `offset`.
    fn line(&self, offset: usize) -> usize {
        self.0.partition_point(|&nl| nl < offset) + 1
    }

    fn span(&self, span: Range<usize>) -> usize {
        self.line(span.start)
    }
}

impl NetworkFile {
    pub fn parse(src: &str) -> Result<Self, NetFileError> {
        let lines = LineIndex::new(src);
        let raw: RawFile = toml::from_str(src).map_err(|e| NetFileError::Parse {
            line: e.span().map(|s| lines.span(s)).unwrap_or(1),
            message: e.message().trim().to_string(),
        })?;

        let nodes_line = lines.span(raw.network.nodes.span());
        let mut names = Vec::new();
        for name in raw.network.nodes.into_inner() {
            let line = lines.span(name.span());
            let name = name.into_inner();
            if names.contains(&name) {
                return Err(NetFileError::DuplicateName { line, name });
            }
            names.push(name);
        }
        let resolve = |name: &Spanned<String>| -> Result<NodeId, NetFileError> {
            names.iter().position(|n| n == name.get_ref()).map(NodeId::from_index).ok_or_else(|| {
                NetFileError::UnknownName { line: lines.span(name.span()), name: name.get_ref().clone() }
            })
        };

        let mut edges = Vec::new();
        let mut edge_lines = Vec::new();
        for e in &raw.edge {
            let line = lines.span(e.span());
            let r = e.get_ref();
            edges.push(Edge { head: resolve(&r.head)?, tail: resolve(&r.tail)?, delay: r.delay });
            edge_lines.push(line);
        }
        let locate = |pred: &dyn Fn(&Edge) -> bool, last: bool| {
            let mut hits = edges.iter().zip(&edge_lines).filter(|(e, _)| pred(e)).map(|(_, &l)| l);
            if last { hits.last() } else { hits.next() }
        };
        let dag = Dag::new(names.len(), edges.clone()).map_err(|source| {
            let line = match &source {
                GraphError::Empty => Some(nodes_line),
                GraphError::SelfLoop(v) => locate(&|e| e.head == *v && e.tail == *v, false),
                GraphError::ZeroDelay { head, tail } => locate(&|e| e.head == *head && e.tail == *tail, false),
                GraphError::DuplicateEdge { head, tail } => locate(&|e| e.head == *head && e.tail == *tail, true),
                _ => None,
            };
            NetFileError::Graph { line, source }
        })?;

        let given = raw.edge.iter().filter(|e| e.get_ref().coefficients.is_some()).count();
        let functions = if given == 0 {
            if let Some(e) = raw.edge.iter().find(|e| e.get_ref().constant.is_some()) {
                return Err(NetFileError::Parse {
                    line: lines.span(e.span()),
                    message: "`constant` given without `coefficients`".into(),
                });
            }
            None
        } else {
            let mut set = FunctionSet::new();
            for ((e, raw_edge), &line) in edges.iter().zip(&raw.edge).zip(&edge_lines) {
                let r = raw_edge.get_ref();
                let (head, tail) = (r.head.get_ref().clone(), r.tail.get_ref().clone());
                let Some(coefficients) = &r.coefficients else {
                    return Err(NetFileError::MissingCoefficients { line, head, tail });
                };
                let mut taylor = vec![r.constant.unwrap_or(0.0)];
                taylor.extend(coefficients);
                let f = EdgeFunction::from_taylor(taylor);
                f.validate_class().map_err(|violation| NetFileError::Class { line, head, tail, violation })?;
                set.insert(e.head, e.tail, f);
            }
            Some(set)
        };

        let members = |list: &[Spanned<String>]| -> Result<NodeSet, NetFileError> { list.iter().map(&resolve).collect() };
        let pattern = IdentificationPattern { excited: members(&raw.pattern.excited)?, measured: members(&raw.pattern.measured)? };
        Ok(NetworkFile { names, dag, functions, pattern })
    }

    pub fn read(path: &Path) -> Result<Self, NetFileError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| NetFileError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&src)
    }

    /// Names `1..=n` for a bare graph. An empty function set on an edgeless
    /// graph is stored as `None`, the only form the text can express.
    pub fn from_parts(dag: Dag, functions: Option<FunctionSet>, pattern: IdentificationPattern) -> Self {
        let names = dag.nodes().map(|v| v.to_string()).collect();
        let functions = functions.filter(|f| !f.is_empty());
        NetworkFile { names, dag, functions, pattern }
    }

    pub fn name(&self, node: NodeId) -> &str {
        &self.names[node.index()]
    }

    /// Same network and pattern with `functions` on every edge.
    pub fn with_functions(&self, functions: FunctionSet) -> Self {
        NetworkFile { functions: Some(functions), ..self.clone() }
    }

    /// Canonical TOML text; [`NetworkFile::parse`] recovers `self` exactly.
    pub fn to_toml(&self) -> String {
        let quote = |s: &str| toml::Value::String(s.to_string()).to_string();
        let list = |nodes: &mut dyn Iterator<Item = NodeId>| {
            nodes.map(|v| quote(self.name(v))).collect::<Vec<_>>().join(", ")
        };
        let mut out = String::new();
        writeln!(out, "[network]").unwrap();
        writeln!(out, "nodes = [{}]", list(&mut self.dag.nodes())).unwrap();
        writeln!(out, "\n[pattern]").unwrap();
        writeln!(out, "excited = [{}]", list(&mut self.pattern.excited.iter().copied())).unwrap();
        writeln!(out, "measured = [{}]", list(&mut self.pattern.measured.iter().copied())).unwrap();
        for e in self.dag.edges() {
            writeln!(out, "\n[[edge]]").unwrap();
            writeln!(out, "tail = {}", quote(self.name(e.tail))).unwrap();
            writeln!(out, "head = {}", quote(self.name(e.head))).unwrap();
            writeln!(out, "delay = {}", e.delay).unwrap();
            if let Some(f) = self.functions.as_ref().and_then(|fs| fs.get(e.head, e.tail)) {
                if f.constant() != 0.0 {
                    writeln!(out, "constant = {}", float(f.constant())).unwrap();
                }
                let cs: Vec<String> = f.coefficients().iter().map(|&c| float(c)).collect();
                writeln!(out, "coefficients = [{}]", cs.join(", ")).unwrap();
            }
        }
        out
    }
}

// Shortest round-tripping decimal, spelled the TOML way for non-finite values.
fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const DIAMOND: &str = r#"
[network]
nodes = ["1", "2", "3", "4"]

[pattern]
excited = ["1"]
measured = ["2", "3", "4"]

[[edge]]
tail = "1"
head = "2"
coefficients = [0, 0, 1]

[[edge]]
tail = "1"
head = "3"
coefficients = [0, 0, 2]

[[edge]]
tail = "2"
head = "4"
coefficients = [0, 0, 1]

[[edge]]
tail = "3"
head = "4"
coefficients = [0, 0, 1]
"#;

    #[test]
    fn parses_diamond() {
        let f = NetworkFile::parse(DIAMOND).unwrap();
        assert_eq!(f.dag, fixtures::diamond());
        assert_eq!(f.pattern, fixtures::diamond_pattern());
        assert_eq!(f.functions.unwrap(), fixtures::diamond_cubics(1.0, 2.0, 1.0, 1.0));
    }

    #[test]
    fn round_trip_fixture() {
        let f = NetworkFile::parse(DIAMOND).unwrap();
        assert_eq!(NetworkFile::parse(&f.to_toml()).unwrap(), f);
        let bare = NetworkFile::from_parts(fixtures::model_network(), None, fixtures::model_pattern());
        assert_eq!(NetworkFile::parse(&bare.to_toml()).unwrap(), bare);
    }

    fn err(src: &str) -> NetFileError {
        NetworkFile::parse(src).unwrap_err()
    }

    #[test]
    fn error_codes_and_lines() {
        let e = err(&DIAMOND.replace("coefficients = [0, 0, 2]", "coefficients = [0, 2]"));
        assert_eq!(e.exit_code(), 8);
        assert!(matches!(e, NetFileError::Class { line: 14, .. }), "{e:?}");

        let e = err(&DIAMOND.replace("coefficients = [0, 0, 2]", "coefficients = [2]"));
        assert_eq!(e.exit_code(), 7);
        let e = err(&DIAMOND.replace("coefficients = [0, 0, 2]", "constant = 1.0\ncoefficients = [0, 0, 2]"));
        assert_eq!(e.exit_code(), 6);
        let e = err(&DIAMOND.replace("coefficients = [0, 0, 2]", "coefficients = [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]"));
        assert_eq!(e.exit_code(), 9);
        let e = err(&DIAMOND.replace("coefficients = [0, 0, 2]\n", ""));
        assert!(matches!(e, NetFileError::MissingCoefficients { line: 14, .. }), "{e:?}");

        let e = err(&DIAMOND.replace("tail = \"3\"\nhead = \"4\"", "tail = \"4\"\nhead = \"1\""));
        assert_eq!(e.exit_code(), 4);
        let e = err(&DIAMOND.replace("head = \"3\"", "head = \"9\""));
        assert!(matches!(e, NetFileError::UnknownName { line: 16, .. }), "{e:?}");
        assert_eq!(e.exit_code(), 5);

        let e = err(&DIAMOND.replace("delay", "lag").replace("head = \"3\"", "head = \"3\"\nweight = 2"));
        assert!(matches!(e, NetFileError::Parse { line: 17, .. }), "{e:?}");
        assert_eq!(e.exit_code(), 3);
        assert_eq!(err("[network").exit_code(), 3);
    }
}
