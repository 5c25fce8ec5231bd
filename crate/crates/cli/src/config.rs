//! Scenario configuration, read from a single JSON file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

pub const SCENARIOS: [&str; 11] = [
    "gaussian-mean",
    "lp-norm",
    "linf-norm",
    "psi-tail",
    "subgaussian-l2",
    "sample-mean-a1",
    "sample-mean-a2",
    "finite-max",
    "quadratic-form-sup",
    "covariance-opnorm",
    "empirical-gradient",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default)]
    pub n_grid: Vec<u64>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub replicates: u64,
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Worker threads; `None` uses the rayon default.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub params: Params,
}

fn default_delta() -> f64 {
    tailcert::verify::DEFAULT_DELTA
}

/// Scenario-specific knobs. Unset fields take scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// ψ-norm index for psi-tail.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Parameter radius `R` for empirical-gradient.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Net strategy name: greedy, angular or shell.
    #[serde(default)]
    pub net_strategy: Option<String>,
    /// Point budget for the parameter net of empirical-gradient.
    #[serde(default)]
    pub net_budget: Option<usize>,
    /// Probability level at which certified bounds are read off.
    #[serde(default)]
    pub certified_level: Option<f64>,
    /// Replicates per pointwise probe used to fit exponent constants.
    #[serde(default)]
    pub fit_replicates: Option<u64>,
    /// Local ascent steps after the net search.
    #[serde(default)]
    pub polish_steps: Option<usize>,
    /// Fixed symmetric matrix for quadratic-form-sup.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Skip Monte-Carlo probes and use closed-form oracles only.
    #[serde(default)]
    pub exact_only: bool,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn minimal(scenario: &str, seed: u64) -> Self {
        ScenarioConfig {
            scenario: scenario.to_string(),
            n_grid: vec![],
            t_grid: vec![],
            dims: vec![],
            replicates: 0,
            seed,
            delta: default_delta(),
            workers: None,
            out_dir: None,
            params: Params::default(),
        }
    }

    /// Fill empty grids with scenario defaults and validate.
    pub fn resolved(mut self) -> Result<Self, ScenarioError> {
        let d = defaults(&self.scenario)?;
        if self.n_grid.is_empty() {
            self.n_grid = d.n_grid;
        }
        if self.t_grid.is_empty() {
            self.t_grid = d.t_grid;
        }
        if self.dims.is_empty() {
            self.dims = d.dims;
        }
        if self.replicates == 0 {
            self.replicates = d.replicates;
        }
        if self.n_grid.is_empty() || self.t_grid.is_empty() {
            return Err(ScenarioError::Config("grids must be non-empty".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(ScenarioError::Config("n must be positive".into()));
        }
        if self.t_grid.windows(2).any(|w| !(w[0] < w[1])) || !(self.t_grid[0] > 0.0) {
            return Err(ScenarioError::Config("t grid must be positive and strictly ascending".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ScenarioError::Config(format!("delta {} outside (0, 1)", self.delta)));
        }
        if self.workers == Some(0) {
            return Err(ScenarioError::Config("workers must be at least 1".into()));
        }
        Ok(self)
    }
}

struct Defaults {
    n_grid: Vec<u64>,
    t_grid: Vec<f64>,
    dims: Vec<usize>,
    replicates: u64,
}

fn steps(a: f64, b: f64, h: f64) -> Vec<f64> {
    let k = ((b - a) / h).round() as usize;
    (0..=k).map(|i| ((a + i as f64 * h) * 1e9).round() / 1e9).collect()
}

fn defaults(scenario: &str) -> Result<Defaults, ScenarioError> {
    let e = std::f64::consts::E;
    Ok(match scenario {
        "gaussian-mean" => Defaults { n_grid: vec![100, 1000, 10000], t_grid: steps(1.0, 6.0, 0.1), dims: vec![], replicates: 1_000_000 },
        "lp-norm" | "linf-norm" => Defaults {
            n_grid: vec![10, 100, 1000],
            t_grid: vec![e, 3.0, 3.5, 4.0, 5.0, 6.0],
            dims: vec![],
            replicates: 100_000,
        },
        "psi-tail" => Defaults { n_grid: vec![1], t_grid: vec![e, 3.0, 4.0, 5.0, 6.0, 8.0], dims: vec![], replicates: 1_000_000 },
        "subgaussian-l2" => Defaults { n_grid: vec![1], t_grid: steps(2.75, 6.0, 0.25), dims: vec![10], replicates: 100_000 },
        "sample-mean-a1" | "sample-mean-a2" => {
            Defaults { n_grid: vec![100, 1000], t_grid: steps(1.0, 4.0, 0.1), dims: vec![], replicates: 1_000_000 }
        }
        "finite-max" => Defaults { n_grid: vec![10, 1000], t_grid: vec![e * e, 7.5, 7.75, 8.0], dims: vec![], replicates: 10_000 },
        "quadratic-form-sup" => Defaults { n_grid: vec![1], t_grid: steps(0.5, 10.0, 0.5), dims: vec![2], replicates: 1 },
        "covariance-opnorm" => Defaults { n_grid: vec![1], t_grid: steps(0.25, 6.0, 0.25), dims: vec![5, 10, 20], replicates: 1000 },
        "empirical-gradient" => Defaults {
            n_grid: vec![128, 512, 2048, 8192],
            t_grid: steps(0.2, 1.5, 0.05),
            dims: vec![2, 4, 8],
            replicates: 500,
        },
        other => return Err(ScenarioError::ScenarioUnknown(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scenario_has_defaults() {
        for s in SCENARIOS {
            let c = ScenarioConfig::minimal(s, 1).resolved().unwrap();
            assert!(!c.n_grid.is_empty() && !c.t_grid.is_empty() && c.replicates > 0);
        }
        assert!(matches!(
            ScenarioConfig::minimal("nope", 1).resolved(),
            Err(ScenarioError::ScenarioUnknown(_))
        ));
    }

    #[test]
    fn roundtrip() {
        let c = ScenarioConfig::minimal("gaussian-mean", 7);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&text).unwrap(), c);
    }
}
