//! Every cargo example runs to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(bridge_witness);
example!(collinear_witness);
example!(disjoint_paths);
example!(graph_queries);
example!(network_file);
example!(pattern_survey);
example!(scaling_witness);
example!(simulate_network);

#[test]
fn bridge_witness_runs() {
    bridge_witness::run_example().expect("bridge_witness example");
}

#[test]
fn collinear_witness_runs() {
    collinear_witness::run_example().expect("collinear_witness example");
}

#[test]
fn disjoint_paths_runs() {
    disjoint_paths::run_example().expect("disjoint_paths example");
}

#[test]
fn graph_queries_runs() {
    graph_queries::run_example().expect("graph_queries example");
}

#[test]
fn network_file_runs() {
    network_file::run_example().expect("network_file example");
}

#[test]
fn pattern_survey_runs() {
    pattern_survey::run_example().expect("pattern_survey example");
}

#[test]
fn scaling_witness_runs() {
    scaling_witness::run_example().expect("scaling_witness example");
}

#[test]
fn simulate_network_runs() {
    simulate_network::run_example().expect("simulate_network example");
}
