//! Named experiments, their configuration and their persisted summaries.

mod config;
mod dictionary;
mod exactness;
mod gauges;
mod growth;
mod verdicts;

pub use config::{Config, E1Config, E2Config, E3Config, E4Config, E5Config, E6Config, PerturbConfig};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [Self::E1, Self::E2, Self::E3, Self::E4, Self::E5, Self::E6];

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown experiment id {s:?}")))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::E3 => "E3",
            Self::E4 => "E4",
            Self::E5 => "E5",
            Self::E6 => "E6",
        }
    }

    pub fn info(&self) -> &'static ExperimentInfo {
        &REGISTRY[*self as usize]
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentInfo {
    pub id: ExperimentId,
    pub name: &'static str,
    pub topic: &'static str,
    pub description: &'static str,
    /// Acceptance criteria decided by this experiment.
    pub criteria: &'static [u8],
}

pub const REGISTRY: [ExperimentInfo; 6] = [
    ExperimentInfo {
        id: ExperimentId::E1,
        name: "harmonic-growth",
        topic: "growth exponents of even L_a-harmonic fields",
        description: "solve_dirichlet on random even data; tangential, normal and gradient-oscillation growth slopes",
        criteria: &[3],
    },
    ExperimentInfo {
        id: ExperimentId::E2,
        name: "signorini-growth",
        topic: "Signorini monotonicity and convergence (a <= 0)",
        description: "energy monotonicity of Signorini solutions; mesh convergence to the 3/2-homogeneous solution",
        criteria: &[4],
    },
    ExperimentInfo {
        id: ExperimentId::E3,
        name: "drift-gauge",
        topic: "gauge decay of drift problems; extension dictionary",
        description: "measured gauge of drift solutions with and without the thin obstacle; extension versus principal-value routes",
        criteria: &[5, 8],
    },
    ExperimentInfo {
        id: ExperimentId::E4,
        name: "almost-harmonic",
        topic: "almost L_a-harmonic verdicts and rigidity (s <= 1/2); trace machinery",
        description: "perturbed harmonic fields with prescribed gauge; weighted normal derivative traces; dyadic chains",
        criteria: &[6, 9],
    },
    ExperimentInfo {
        id: ExperimentId::E5,
        name: "obstacle-almost-minimizers",
        topic: "Signorini almost minimizers: Campanato and C^{1,beta} verdicts",
        description: "Campanato constants under refinement; thin-gradient Campanato finiteness for perturbed Signorini fields",
        criteria: &[7],
    },
    ExperimentInfo {
        id: ExperimentId::E6,
        name: "exact-basis",
        topic: "exact polynomial Dirichlet solves and harmonic basis",
        description: "rational-arithmetic Dirichlet solves, divisibility, Gram orthonormality, worked y^2 solve",
        criteria: &[1, 2],
    },
];

/// Registry rows whose id, name, topic or description contain `filter`
/// (case-insensitive). `None` lists everything.
pub fn list_experiments(filter: Option<&str>) -> Vec<&'static ExperimentInfo> {
    let needle = filter.map(str::to_lowercase);
    REGISTRY
        .iter()
        .filter(|e| match &needle {
            None => true,
            Some(f) => [e.id.as_str(), e.name, e.topic, e.description]
                .iter()
                .any(|t| t.to_lowercase().contains(f.as_str())),
        })
        .collect()
}

/// One pass/fail line of a summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Acceptance criterion this line contributes to, if any.
    pub criterion: Option<u8>,
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(criterion: Option<u8>, name: impl Into<String>, passed: bool) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed,
            value: None,
            threshold: None,
            detail: String::new(),
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(criterion: Option<u8>, name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            value: Some(value),
            threshold: Some(threshold),
            ..Self::new(criterion, name, value >= threshold)
        }
    }

    /// Passes when `value <= threshold`.
    pub fn at_most(criterion: Option<u8>, name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            value: Some(value),
            threshold: Some(threshold),
            ..Self::new(criterion, name, value <= threshold)
        }
    }

    pub fn failed(criterion: Option<u8>, name: impl Into<String>, err: &Error) -> Self {
        Self::new(criterion, name, false).detail(err.to_string())
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

/// Machine-readable outcome of one experiment. Contains no timing or paths,
/// so equal inputs give byte-equal files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: ExperimentId,
    pub name: String,
    pub seed: u64,
    pub criteria: Vec<u8>,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub errors: Vec<String>,
    pub artifacts: Vec<String>,
    pub passed: bool,
}

impl Summary {
    pub fn criterion_passed(&self, c: u8) -> Option<bool> {
        let lines: Vec<_> = self.checks.iter().filter(|k| k.criterion == Some(c)).collect();
        if lines.is_empty() {
            None
        } else {
            Some(lines.iter().all(|k| k.passed) && self.errors.is_empty())
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Output directory plus the list of files written into it.
pub struct RunContext {
    dir: PathBuf,
    pub seed: u64,
    artifacts: Vec<String>,
    checks: Vec<Check>,
    errors: Vec<String>,
}

impl RunContext {
    fn new(dir: PathBuf, seed: u64) -> Self {
        Self {
            dir,
            seed,
            artifacts: Vec::new(),
            checks: Vec::new(),
            errors: Vec::new(),
        }
    }

    /// Path for an artifact, recorded in the summary.
    pub fn artifact(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Records `r` as a failed check on error and returns its value otherwise.
    pub fn attempt<T>(&mut self, criterion: Option<u8>, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks.push(Check::failed(criterion, name, &e));
                None
            }
        }
    }

    /// Artifact write failures do not stop the run.
    pub fn write(&mut self, what: &str, r: Result<()>) {
        if let Err(e) = r {
            self.errors.push(format!("{what}: {e}"));
        }
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) {
        let path = self.artifact(name);
        let r = (|| -> Result<()> {
            let mut w = csv::Writer::from_path(path)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            Ok(())
        })();
        self.write(name, r);
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let path = self.artifact(name);
        let r = serde_json::to_string_pretty(value)
            .map_err(Error::from)
            .and_then(|s| std::fs::write(path, s).map_err(Error::from));
        self.write(name, r);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub experiment: ExperimentId,
    pub seconds: f64,
}

/// Runs one experiment, writing artifacts, `summary.json` and `timing.json`
/// into `out/<id>/`.
pub fn run_experiment(id: ExperimentId, cfg: &Config, out: &Path) -> Result<Summary> {
    cfg.validate()?;
    let dir = out.join(id.as_str());
    std::fs::create_dir_all(&dir)?;
    let mut ctx = RunContext::new(dir.clone(), cfg.seed);
    let start = Instant::now();
    let section = match id {
        ExperimentId::E1 => {
            growth::run_e1(&cfg.e1, &cfg.solver, &mut ctx);
            serde_json::to_value(&cfg.e1)?
        }
        ExperimentId::E2 => {
            growth::run_e2(&cfg.e2, &cfg.solver, &mut ctx);
            serde_json::to_value(&cfg.e2)?
        }
        ExperimentId::E3 => {
            gauges::run_e3(&cfg.e3, &cfg.solver, &mut ctx);
            dictionary::run(&cfg.e3, &mut ctx);
            serde_json::to_value(&cfg.e3)?
        }
        ExperimentId::E4 => {
            verdicts::run_e4(&cfg.e4, &cfg.solver, &mut ctx);
            serde_json::to_value(&cfg.e4)?
        }
        ExperimentId::E5 => {
            verdicts::run_e5(&cfg.e5, &cfg.solver, &mut ctx);
            serde_json::to_value(&cfg.e5)?
        }
        ExperimentId::E6 => {
            exactness::run(&cfg.e6, &mut ctx);
            serde_json::to_value(&cfg.e6)?
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let info = id.info();
    let config = serde_json::json!({ "solver": cfg.solver, id.as_str().to_lowercase(): section });
    let passed = ctx.errors.is_empty() && !ctx.checks.is_empty() && ctx.checks.iter().all(|c| c.passed);
    let summary = Summary {
        experiment: id,
        name: info.name.to_string(),
        seed: cfg.seed,
        criteria: info.criteria.to_vec(),
        config,
        checks: ctx.checks,
        errors: ctx.errors,
        artifacts: ctx.artifacts,
        passed,
    };
    std::fs::write(dir.join("summary.json"), summary.to_json())?;
    let timing = Timing { experiment: id, seconds };
    std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing)?)?;
    Ok(summary)
}

/// Thin-space points `-span, ..., span` along the first axis.
pub(crate) fn line_centers(n: usize, count: usize, span: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let t = if count == 1 { 0.0 } else { -span + 2.0 * span * i as f64 / (count - 1) as f64 };
            let mut c = vec![0.0; n];
            c[0] = t;
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_filters() {
        assert_eq!(list_experiments(None).len(), 6);
        let ids: Vec<_> = list_experiments(Some("Signorini")).iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![ExperimentId::E2, ExperimentId::E5]);
        assert!(list_experiments(Some("no-such-thing")).is_empty());
    }

    #[test]
    fn each_criterion_has_one_experiment() {
        for c in 1..=9u8 {
            let owners = REGISTRY.iter().filter(|e| e.criteria.contains(&c)).count();
            assert_eq!(owners, 1, "criterion {c}");
        }
    }

    #[test]
    fn ids_parse() {
        assert_eq!(ExperimentId::parse("e4").unwrap(), ExperimentId::E4);
        assert!(ExperimentId::parse("E7").is_err());
    }
}
