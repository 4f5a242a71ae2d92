//! The full acceptance battery, one line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use ultradiff::config::RunConfig;
use ultradiff::suite::{determinism, run_suite};

fn main() {
    let run = RunConfig::default();
    let report = run_suite(&run);
    let mut results = report.results.clone();
    results.push(determinism(&run, &report));
    for r in &results {
        println!("{}", r.line());
    }
    let mut failed: Vec<String> = results.iter().filter(|r| !r.pass).map(|r| r.id.to_string()).collect();

    // randomized criteria must not depend on the default seed
    for seed in [1, 0xdead_beef] {
        let other = run_suite(&RunConfig { seed, ..RunConfig::default() });
        for r in other.results.iter().filter(|r| matches!(r.id, 1 | 4 | 7 | 9) && !r.pass) {
            println!("seed {seed}: {}", r.line());
            failed.push(format!("{}@{seed}", r.id));
        }
    }

    let passed = results.iter().filter(|r| r.pass).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
