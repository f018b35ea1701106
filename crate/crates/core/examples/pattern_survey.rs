// Analyzes every minimal valid pattern of a small network and tallies the
// verdicts.

use std::collections::BTreeMap;
use std::error::Error;

use netident::engine::{analyze, AnalyzeOptions};
use netident::fixtures;
use netident::patterns::{check_necessary, count_actions, enumerate_valid_patterns};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dag = fixtures::multipartite();
    let opts = AnalyzeOptions::default();
    let given = fixtures::multipartite_pattern();
    println!("given pattern {given}: necessary conditions hold = {}", check_necessary(&dag, &given).ok());

    let mut tally = BTreeMap::new();
    for p in enumerate_valid_patterns(&dag, 64)? {
        let report = analyze(&dag, &p, None, &opts)?;
        println!("{p} ({} actions): {}", count_actions(&p), report.summary);
        *tally.entry(report.summary.to_string()).or_insert(0) += 1;
    }
    println!("{tally:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
