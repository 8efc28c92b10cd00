//! Running a registered experiment from code with a partial config.
//!
//! ```bash
//! cargo run --release --example run_experiment
//! ```

use frharm::experiments::{list_experiments, run_experiment, Config, ExperimentId};

fn main() -> frharm::Result<()> {
    for e in list_experiments(Some("exact")) {
        println!("{} {}: {}", e.id, e.name, e.description);
    }
    let cfg = Config::from_toml("seed = 7\n[e6]\nn = [1]\ndegree = 6\n")?;
    let out = std::env::temp_dir().join("frharm_example_run");
    let summary = run_experiment(ExperimentId::E6, &cfg, &out)?;
    for c in &summary.checks {
        println!("[{}] {}", if c.passed { "pass" } else { "FAIL" }, c.name);
    }
    println!("summary sha256 {}", summary.sha256());
    Ok(())
}
