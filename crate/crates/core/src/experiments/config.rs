use crate::error::{Error, Result};
use crate::solver::SolverOptions;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Full run configuration. Every field has a default, so a config file only
/// needs the keys it changes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub solver: SolverOptions,
    pub e1: E1Config,
    pub e2: E2Config,
    pub e3: E3Config,
    pub e4: E4Config,
    pub e5: E5Config,
    pub e6: E6Config,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 20240517,
            solver: SolverOptions::default(),
            e1: E1Config::default(),
            e2: E2Config::default(),
            e3: E3Config::default(),
            e4: E4Config::default(),
            e5: E5Config::default(),
            e6: E6Config::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.e1.cells.iter().chain(&self.e2.cells).any(|&c| c < 8)
            || self.e3.cells < 8
            || self.e4.cells < 8
            || self.e5.cells.iter().any(|&c| c < 8)
        {
            return bad("grid resolutions must be at least 8 cells");
        }
        if self.e1.datasets == 0 {
            return bad("e1.datasets must be positive");
        }
        if self.e2.cells.is_empty() || self.e5.cells.is_empty() || self.e1.cells.is_empty() {
            return bad("resolution lists must not be empty");
        }
        if self.e6.n.contains(&0) {
            return bad("e6.n entries must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E1Config {
    pub a: Vec<f64>,
    pub datasets: usize,
    pub cells: Vec<usize>,
    pub half_width: f64,
    pub height: f64,
    pub center: f64,
    pub radii: usize,
    pub tolerance: f64,
}

impl Default for E1Config {
    fn default() -> Self {
        Self {
            a: vec![-0.5, 0.0, 0.5],
            datasets: 5,
            cells: vec![128, 256],
            half_width: 1.0,
            height: 1.0,
            center: 0.0,
            radii: 8,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E2Config {
    pub a: Vec<f64>,
    /// Resolutions of the convergence study; monotonicity runs on the last.
    pub cells: Vec<usize>,
    pub centers: Vec<f64>,
    pub radii: usize,
    pub min_ratio: f64,
    pub dump_fields: bool,
}

impl Default for E2Config {
    fn default() -> Self {
        Self {
            a: vec![-0.5, 0.0],
            cells: vec![64, 128, 256],
            centers: vec![-0.25, 0.0, 0.25],
            radii: 8,
            min_ratio: 1.7,
            dump_fields: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E3Config {
    pub s: Vec<f64>,
    pub cells: usize,
    pub half_width: f64,
    pub height: f64,
    pub drift: f64,
    pub centers: usize,
    pub radii: usize,
    pub slope_margin: f64,
    pub omega_floor: f64,
    pub dictionary_n: Vec<usize>,
    pub dictionary_s: Vec<f64>,
    pub route_tol: f64,
    pub poisson_heights: Vec<f64>,
    pub normalization_tol: f64,
}

impl Default for E3Config {
    fn default() -> Self {
        Self {
            s: vec![0.6, 0.75, 0.9],
            cells: 512,
            half_width: 2.0,
            height: 2.0,
            drift: 1.0,
            centers: 16,
            radii: 8,
            slope_margin: 0.1,
            omega_floor: -5e-3,
            dictionary_n: vec![1, 2],
            dictionary_s: vec![0.5, 0.6, 0.75, 0.9],
            route_tol: 1e-3,
            poisson_heights: vec![0.25, 1.0, 4.0],
            normalization_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbConfig {
    pub alpha: f64,
    pub constant: f64,
    pub amplitude: f64,
    pub support: f64,
    pub height: f64,
    pub centers: usize,
    pub center_span: f64,
    pub radii: usize,
    pub max_rounds: usize,
    pub slope_tol: f64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            constant: 0.05,
            amplitude: 0.1,
            support: 1.5,
            height: 1.5,
            centers: 9,
            center_span: 0.4,
            radii: 6,
            max_rounds: 20,
            slope_tol: 0.3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E4Config {
    pub s: f64,
    pub cells: usize,
    pub half_width: f64,
    pub height: f64,
    pub perturb: PerturbConfig,
    /// Coefficient of `h^2` in the trace tolerance for smooth fields.
    pub trace_h2: f64,
    /// Ratio of consecutive radii in the trace ladders.
    pub ladder_base: f64,
    pub shift: f64,
}

impl Default for E4Config {
    fn default() -> Self {
        Self {
            s: 0.25,
            cells: 512,
            half_width: 2.0,
            height: 2.0,
            perturb: PerturbConfig::default(),
            trace_h2: 10.0,
            ladder_base: std::f64::consts::SQRT_2,
            shift: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E5Config {
    pub s: f64,
    pub cells: Vec<usize>,
    pub half_width: f64,
    pub height: f64,
    pub ladder_base: f64,
    pub sigma: f64,
    pub m_ratio_max: f64,
    pub perturb: PerturbConfig,
}

impl Default for E5Config {
    fn default() -> Self {
        Self {
            s: 0.75,
            cells: vec![256, 512],
            half_width: 2.0,
            height: 2.0,
            ladder_base: std::f64::consts::SQRT_2,
            sigma: 0.99,
            m_ratio_max: 1.1,
            perturb: PerturbConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E6Config {
    pub n: Vec<usize>,
    /// Exact values of `a` as `p/q` strings.
    pub a: Vec<String>,
    pub degree: u32,
    pub gram_tol: f64,
}

impl Default for E6Config {
    fn default() -> Self {
        Self {
            n: vec![1, 2],
            a: vec!["-1/2".into(), "0".into(), "1/2".into()],
            degree: 8,
            gram_tol: 1e-10,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        let back = Config::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back.to_toml(), cfg.to_toml());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = Config::from_toml("seed = 3\n[e1]\ndatasets = 2\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.e1.datasets, 2);
        assert_eq!(cfg.e1.radii, 8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Config::from_toml("sed = 3"), Err(Error::Config(_))));
    }
}
