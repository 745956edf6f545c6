//! Runs an experiment config through the harness and prints the outcome.
//! Pass a config path, or run the bundled F2 contraction config.

use std::path::PathBuf;

use coarsegeo::harness::{run_experiment, ExperimentConfig};

fn main() -> coarsegeo::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/contract_f2.toml")));
    let cfg = ExperimentConfig::load(&path)?;
    let report = run_experiment(&cfg)?;
    for c in &report.conditions {
        let mark = if c.pass { "pass" } else { "FAIL" };
        println!("{mark}  {}  [{}]", c.id, c.anchor);
    }
    println!("outcome: {:?} (exit code {})", report.outcome, report.outcome.exit_code());
    Ok(())
}
