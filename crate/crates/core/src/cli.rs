//! `netident validate|analyze|patterns|witness|simulate|export <file>`.
//!
//! Exit codes: 0 success; 2 usage or I/O; 3 parse; 4 cycle; 5 other graph
//! or name errors; 6 `f(0) != 0`; 7 linear function; 8 even degree;
//! 9 degree cap or partial coefficients. `analyze` returns 0, 10 or 20 for
//! Identifiable, Unidentifiable, Inconclusive; `witness` returns 0 when
//! verified, 30 when the construction is refused, 31 when verification fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::engine::{
    analyze, detect_bridge, detect_collinear, witness_collinear, witness_from_bridge, witness_from_collinear, witness_scaling,
    witness_unexcited_source, witness_unmeasured_sink, AnalyzeOptions, Report, Summary, Verdict, Witness, WitnessError,
    BRIDGE_GAMMAS,
};
use crate::funclib::FunctionSet;
use crate::graph::{Dag, NodeId};
use crate::netfile::{NetFileError, NetworkFile};
use crate::patterns::{check_necessary, enumerate_valid_patterns, IdentificationPattern, Violation};
use crate::simkit::{simulate, Comparison, ExcitationSchedule};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNIDENTIFIABLE: i32 = 10;
pub const EXIT_INCONCLUSIVE: i32 = 20;
pub const EXIT_REFUSED: i32 = 30;
pub const EXIT_NOT_VERIFIED: i32 = 31;

#[derive(Parser, Debug)]
#[command(name = "netident", version, about = "Identifiability of nonlinear networks on directed acyclic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Network description (TOML).
    file: PathBuf,
    /// Seed for random functions, probe points and excitation schedules.
    #[arg(long, env = "NETIDENT_SEED", default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct Verification {
    /// Random schedules used to compare responses.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Absolute output tolerance for equal responses.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Simulation horizon; raised automatically to cover the longest path.
    #[arg(long, default_value_t = 20)]
    horizon: usize,
}

impl Verification {
    fn comparison(&self, seed: u64) -> Comparison {
        Comparison { trials: self.trials, horizon: self.horizon, tol: self.tol, seed }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse the file and check graph, function and pattern invariants.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Per-edge identifiability verdicts.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Random points tried by the genericity probe.
        #[arg(long, default_value_t = 10)]
        draws: usize,
        #[command(flatten)]
        verification: Verification,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Every pattern with one action per node, with its verdict.
    Patterns {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        limit: usize,
        #[arg(long, default_value_t = 10)]
        draws: usize,
        #[command(flatten)]
        verification: Verification,
        #[arg(long)]
        json: bool,
    },
    /// Build and verify an unidentifiability witness; prints the modified network.
    Witness {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        gamma: Option<f64>,
        /// Node the construction acts on (source, sink, uncovered node or join).
        #[arg(long)]
        node: Option<String>,
        /// Neighbor whose edge is replaced, for source and sink witnesses.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        verification: Verification,
        /// Write the modified network here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one random schedule and print the trajectory as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the network as canonical TOML, or as Graphviz DOT with --dot.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dot: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    #[value(alias = "UnexcitedSource")]
    UnexcitedSource,
    #[value(alias = "UnmeasuredSink")]
    UnmeasuredSink,
    #[value(alias = "ScalingGamma")]
    ScalingGamma,
    #[value(alias = "CollinearNeighbors")]
    CollinearNeighbors,
    #[value(alias = "CubicBridge")]
    CubicBridge,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

impl From<NetFileError> for Failure {
    fn from(e: NetFileError) -> Self {
        Failure(e.exit_code(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

fn load(common: &Common) -> Result<NetworkFile, Failure> {
    Ok(NetworkFile::read(&common.file)?)
}

/// The file's functions, or seeded random cubics when it has none.
fn functions(file: &NetworkFile, seed: u64) -> Result<FunctionSet, Failure> {
    match &file.functions {
        Some(f) => Ok(f.clone()),
        None => FunctionSet::random(&file.dag, seed, 3).map_err(|e| Failure(EXIT_USAGE, e.to_string())),
    }
}

fn resolve(file: &NetworkFile, name: &str) -> Result<NodeId, Failure> {
    file.names
        .iter()
        .position(|n| n == name)
        .map(NodeId::from_index)
        .ok_or_else(|| Failure(EXIT_USAGE, format!("unknown node {name:?}")))
}

fn edge_label(file: &NetworkFile, head: NodeId, tail: NodeId) -> String {
    format!("f_{{{},{}}}", file.name(head), file.name(tail))
}

fn pattern_text(file: &NetworkFile, p: &IdentificationPattern) -> String {
    let list = |s: &crate::graph::NodeSet| s.iter().map(|v| file.name(*v)).collect::<Vec<_>>().join(",");
    format!("excited {{{}}}, measured {{{}}}", list(&p.excited), list(&p.measured))
}

fn summary_code(s: Summary) -> i32 {
    match s {
        Summary::Identifiable => 0,
        Summary::Unidentifiable => EXIT_UNIDENTIFIABLE,
        Summary::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Validate { common } => {
            let file = load(&common)?;
            let check = check_necessary(&file.dag, &file.pattern);
            writeln!(
                out,
                "ok: {} nodes, {} edges, {}",
                file.dag.node_count(),
                file.dag.edge_count(),
                if file.functions.is_some() { "functions on every edge" } else { "no functions" }
            )?;
            writeln!(out, "pattern: {}", pattern_text(&file, &file.pattern))?;
            for v in &check.violations {
                writeln!(out, "note: {}", violation_text(&file, v))?;
            }
            Ok(0)
        }
        Command::Analyze { common, draws, verification, json } => {
            let file = load(&common)?;
            let opts = AnalyzeOptions { seed: common.seed, draws, verification: verification.comparison(common.seed) };
            let report = analyze(&file.dag, &file.pattern, file.functions.as_ref(), &opts)
                .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
            if json {
                let doc = JsonReport { seed: common.seed, nodes: &file.names, report: &report };
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("report serializes"))?;
            } else {
                print_report(&file, &report, out)?;
            }
            Ok(summary_code(report.summary))
        }
        Command::Patterns { common, limit, draws, verification, json } => {
            let file = load(&common)?;
            let list = enumerate_valid_patterns(&file.dag, limit).map_err(|e| Failure(5, e.to_string()))?;
            let opts = AnalyzeOptions { seed: common.seed, draws, verification: verification.comparison(common.seed) };
            let mut rows = Vec::new();
            for p in list {
                let r = analyze(&file.dag, &p, file.functions.as_ref(), &opts).map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
                rows.push(PatternRow { pattern: p, summary: r.summary });
            }
            if json {
                let doc = JsonPatterns { seed: common.seed, nodes: &file.names, patterns: &rows };
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("patterns serialize"))?;
            } else {
                writeln!(out, "netident patterns: seed {}", common.seed)?;
                writeln!(out, "{} patterns with {} actions", rows.len(), file.dag.node_count())?;
                for (k, row) in rows.iter().enumerate() {
                    writeln!(out, "{:>3}  {:<40}  {}", k + 1, pattern_text(&file, &row.pattern), row.summary)?;
                }
            }
            Ok(0)
        }
        Command::Witness { common, kind, gamma, node, target, verification, out: path } => {
            let file = load(&common)?;
            let funcs = functions(&file, common.seed)?;
            let cfg = verification.comparison(common.seed);
            let node = node.map(|n| resolve(&file, &n)).transpose()?;
            let target = target.map(|n| resolve(&file, &n)).transpose()?;
            let result = build_witness(&file, &funcs, kind, gamma, node, target, common.seed, &cfg)?;
            match result {
                Ok(w) => {
                    let text = file.with_functions(w.modified.clone()).to_toml();
                    match &path {
                        Some(p) => std::fs::write(p, text)?,
                        None => out.write_all(text.as_bytes())?,
                    }
                    writeln!(err, "seed {}", common.seed)?;
                    writeln!(err, "{} witness verified: max deviation {:e} over {} trials, horizon {}", w.kind, w.max_deviation, w.trials, w.horizon)?;
                    for c in &w.changes {
                        writeln!(err, "  {}: {} -> {}", edge_label(&file, c.head, c.tail), c.original, c.modified)?;
                    }
                    Ok(0)
                }
                Err(e @ WitnessError::NotVerified { .. }) => {
                    writeln!(err, "not verified: {e}")?;
                    Ok(EXIT_NOT_VERIFIED)
                }
                Err(e) if e.is_refusal() => {
                    writeln!(err, "refused: {e}")?;
                    Ok(EXIT_REFUSED)
                }
                Err(e) => {
                    writeln!(err, "not verified: {e}")?;
                    Ok(EXIT_NOT_VERIFIED)
                }
            }
        }
        Command::Simulate { common, horizon, out: path } => {
            let file = load(&common)?;
            let funcs = functions(&file, common.seed)?;
            let sched = ExcitationSchedule::random(&file.pattern.excited, horizon, common.seed, 1.0)
                .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
            let traj = simulate(&file.dag, &funcs, &sched).map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
            let csv = traj.to_csv(&file.names);
            writeln!(err, "seed {}", common.seed)?;
            match &path {
                Some(p) => std::fs::write(p, csv)?,
                None => out.write_all(csv.as_bytes())?,
            }
            Ok(0)
        }
        Command::Export { common, dot } => {
            let file = load(&common)?;
            if dot {
                out.write_all(to_dot(&file).as_bytes())?;
            } else {
                out.write_all(file.to_toml().as_bytes())?;
            }
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_witness(
    file: &NetworkFile,
    funcs: &FunctionSet,
    kind: Kind,
    gamma: Option<f64>,
    node: Option<NodeId>,
    target: Option<NodeId>,
    seed: u64,
    cfg: &Comparison,
) -> Result<Result<Witness, WitnessError>, Failure> {
    let (dag, p) = (&file.dag, &file.pattern);
    let need_node = || node.ok_or_else(|| Failure(EXIT_USAGE, "--node is required for this kind".into()));
    let not_found = |what: &str| WitnessError::NotDetected(what.to_string());
    Ok(match kind {
        Kind::UnexcitedSource => {
            let s = need_node()?;
            match target.or_else(|| dag.out_neighbors(s).next()) {
                Some(j) => witness_unexcited_source(dag, funcs, p, s, j, seed, cfg),
                None => Err(not_found("node has no out-neighbors")),
            }
        }
        Kind::UnmeasuredSink => {
            let t = need_node()?;
            match target.or_else(|| dag.in_neighbors(t).next()) {
                Some(j) => witness_unmeasured_sink(dag, funcs, p, t, j, seed, cfg),
                None => Err(not_found("node has no in-neighbors")),
            }
        }
        Kind::ScalingGamma => witness_scaling(dag, funcs, p, need_node()?, gamma.unwrap_or(2.0), cfg),
        Kind::CollinearNeighbors => match (gamma, node) {
            (Some(g), None) => witness_collinear(dag, funcs, p, g, cfg),
            _ => {
                let joins: Vec<NodeId> = node.map(|n| vec![n]).unwrap_or_else(|| dag.nodes().collect());
                let found = joins.into_iter().flat_map(|j| detect_collinear(dag, funcs, p, j)).find(|m| gamma.is_none_or(|g| m.gamma == g));
                match found {
                    Some(m) => witness_from_collinear(dag, funcs, p, &m, cfg),
                    None => Err(not_found("no nodes with proportional inputs feeding a join")),
                }
            }
        },
        Kind::CubicBridge => {
            let joins: Vec<NodeId> = node.map(|n| vec![n]).unwrap_or_else(|| dag.nodes().collect());
            let found = joins.into_iter().flat_map(|j| detect_bridge(dag, funcs, p, j)).next();
            match found {
                None => Err(not_found("no join fed by two monomial routes from a single excitation")),
                Some(m) => match gamma {
                    Some(g) => witness_from_bridge(dag, funcs, p, &m, g, cfg),
                    None => {
                        let mut last = Err(WitnessError::ZeroGamma);
                        for g in BRIDGE_GAMMAS {
                            last = witness_from_bridge(dag, funcs, p, &m, g, cfg);
                            if last.is_ok() {
                                break;
                            }
                        }
                        last
                    }
                },
            }
        }
    })
}

fn violation_text(file: &NetworkFile, v: &Violation) -> String {
    let n = file.name(v.node());
    match v {
        Violation::UnexcitedSource(_) => format!("source {n} is not excited"),
        Violation::UnmeasuredSink(_) => format!("sink {n} is not measured"),
        Violation::Uncovered(_) => format!("node {n} is neither excited nor measured"),
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    seed: u64,
    nodes: &'a [String],
    report: &'a Report,
}

#[derive(Serialize)]
struct PatternRow {
    pattern: IdentificationPattern,
    summary: Summary,
}

#[derive(Serialize)]
struct JsonPatterns<'a> {
    seed: u64,
    nodes: &'a [String],
    patterns: &'a [PatternRow],
}

fn print_report(file: &NetworkFile, r: &Report, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "netident analyze: seed {}", r.seed)?;
    writeln!(out, "pattern:      {}", pattern_text(file, &r.pattern))?;
    writeln!(out, "pattern used: {}", pattern_text(file, &r.pattern_used))?;
    for v in &r.necessary.violations {
        writeln!(out, "violation:    {}", violation_text(file, v))?;
    }
    writeln!(out)?;
    let label_width = r.per_edge.iter().map(|e| edge_label(file, e.head, e.tail).len()).max().unwrap_or(4).max(4);
    writeln!(out, "{:<label_width$}  {:<14}  reason", "edge", "verdict")?;
    for e in &r.per_edge {
        let reason = match &e.verdict {
            Verdict::Identifiable { reason } => reason.clone(),
            Verdict::Unidentifiable { witness, kind } => format!("{kind} witness #{witness}"),
            Verdict::Inconclusive { diagnostic } => diagnostic.clone(),
        };
        writeln!(out, "{:<label_width$}  {:<14}  {reason}", edge_label(file, e.head, e.tail), e.verdict.label())?;
    }
    for c in r.certificates.iter().filter(|c| c.satisfied() && !c.paths.is_empty()) {
        let paths: Vec<String> =
            c.paths.iter().map(|p| format!("[{}]", p.iter().map(|v| file.name(*v)).collect::<Vec<_>>().join(" -> "))).collect();
        writeln!(out, "paths to in-neighbors of {}: {}", file.name(c.node), paths.join(" "))?;
    }
    for (k, w) in r.witnesses.iter().enumerate() {
        let gamma = w.gamma.map(|g| format!(", gamma {g}")).unwrap_or_default();
        writeln!(
            out,
            "witness #{k}: {}{gamma}, max deviation {:e} over {} trials",
            w.kind, w.max_deviation, w.trials
        )?;
        for c in &w.changes {
            writeln!(out, "  {}: {} -> {}", edge_label(file, c.head, c.tail), c.original, c.modified)?;
        }
    }
    for n in &r.notes {
        writeln!(out, "note: {n}")?;
    }
    writeln!(out, "summary: {}", r.summary)
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: excited nodes white, measured gray, dual-role nodes
/// split white and gray, uncovered nodes dashed.
pub fn to_dot(file: &NetworkFile) -> String {
    dot_for(&file.dag, &file.pattern, &file.names)
}

pub fn dot_for(dag: &Dag, p: &IdentificationPattern, names: &[String]) -> String {
    let mut s = String::from("digraph network {\n  rankdir=LR;\n  node [shape=circle];\n");
    for v in dag.nodes() {
        let style = match (p.is_excited(v), p.is_measured(v)) {
            (true, true) => "style=wedged, fillcolor=\"white:gray\"",
            (true, false) => "style=filled, fillcolor=white",
            (false, true) => "style=filled, fillcolor=gray",
            (false, false) => "style=dashed",
        };
        s.push_str(&format!("  {} [{style}];\n", dot_id(&names[v.index()])));
    }
    for e in dag.edges() {
        let (h, t) = (&names[e.head.index()], &names[e.tail.index()]);
        let label = dot_id(&format!("f_{{{h},{t}}} (m={})", e.delay));
        s.push_str(&format!("  {} -> {} [label={label}];\n", dot_id(t), dot_id(h)));
    }
    s.push_str("}\n");
    s
}
