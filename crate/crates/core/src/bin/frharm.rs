use clap::{Parser, Subcommand};
use frharm::experiments::{list_experiments, run_experiment, Config, ExperimentId};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frharm", version, about = "Run weighted-extension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (E1..E6) or `all`.
    Run {
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Show the experiment registry, optionally filtered by a keyword.
    List { filter: Option<String> },
    /// Print the default configuration.
    PrintDefaults,
}

fn run(id: &str, config: Option<PathBuf>, out: PathBuf, seed: Option<u64>) -> frharm::Result<bool> {
    let mut cfg = match config {
        Some(p) => Config::load(&p)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let ids = if id.eq_ignore_ascii_case("all") {
        ExperimentId::ALL.to_vec()
    } else {
        vec![ExperimentId::parse(id)?]
    };
    let mut ok = true;
    for id in ids {
        let summary = run_experiment(id, &cfg, &out)?;
        let failed = summary.checks.iter().filter(|c| !c.passed).count();
        println!(
            "{id} {:<28} {} ({} checks, {failed} failed)",
            summary.name,
            if summary.passed { "PASS" } else { "FAIL" },
            summary.checks.len()
        );
        for c in summary.checks.iter().filter(|c| !c.passed) {
            println!("    failed: {} {}", c.name, c.detail);
        }
        for e in &summary.errors {
            println!("    error: {e}");
        }
        ok &= summary.passed;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { filter } => {
            println!("{:<4} {:<28} {:<10} topic", "id", "name", "criteria");
            for e in list_experiments(filter.as_deref()) {
                let crit: Vec<String> = e.criteria.iter().map(u8::to_string).collect();
                println!("{:<4} {:<28} {:<10} {}", e.id, e.name, crit.join(","), e.topic);
            }
            ExitCode::SUCCESS
        }
        Command::PrintDefaults => {
            print!("{}", Config::default().to_toml());
            ExitCode::SUCCESS
        }
        Command::Run { id, config, out, seed } => match run(&id, config, out, seed) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
