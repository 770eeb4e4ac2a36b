//! Experiment configuration shared by the CLI and the evaluation harness.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{ClosureMode, EnvConfig};
use crate::error::{Error, Result};
use crate::fom_data::{generate_snapshots, Grid, SnapshotSet, TimeMesh};
use crate::pod::{compute_pod, PodBasis};
use crate::ppo::PpoConfig;

/// Training data and basis sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProblemConfig {
    pub n_points: usize,
    pub n_snapshots: usize,
    /// Viscosity of the training data (`1/Re`).
    pub nu_train: f64,
    pub r: usize,
    pub r_total: usize,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            n_points: 1024,
            n_snapshots: 500,
            nu_train: 0.001,
            r: 8,
            r_total: 16,
        }
    }
}

/// Training snapshots and the basis extracted from them.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ProblemConfig,
    pub snapshots: SnapshotSet,
    pub basis: Arc<PodBasis>,
}

impl ProblemConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::unit(self.n_points)
    }

    pub fn times(&self) -> Result<TimeMesh> {
        TimeMesh::unit(self.n_snapshots)
    }

    /// Generates the training snapshots and their POD basis.
    pub fn build(&self) -> Result<Problem> {
        let snapshots = generate_snapshots(&self.grid()?, &self.times()?, self.nu_train)?;
        let basis = Arc::new(compute_pod(&snapshots, self.r, self.r_total)?);
        Ok(Problem {
            config: self.clone(),
            snapshots,
            basis,
        })
    }

    /// Environment settings for `mode`: sizes, step and horizon come from
    /// the problem, agent-facing knobs from `base`.
    pub fn env_config(&self, mode: ClosureMode, base: &EnvConfig) -> Result<EnvConfig> {
        let times = self.times()?;
        let cfg = EnvConfig {
            mode,
            r: self.r,
            r_total: self.r_total,
            nu: self.nu_train,
            dt: times.dt(),
            horizon: self.n_snapshots - 1,
            reward_kind: mode.default_reward(),
            ..base.clone()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything needed to train and evaluate the closure models end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub modes: Vec<ClosureMode>,
    pub seeds: Vec<u64>,
    pub eval_reynolds: Vec<f64>,
    /// Output directory of `reproduce-table1`.
    pub out_dir: String,
    /// Subsampling of written field files in x and t.
    pub field_stride: (usize, usize),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemConfig::default(),
            env: EnvConfig::default(),
            ppo: PpoConfig::default(),
            modes: ClosureMode::ALL.to_vec(),
            seeds: (0..10).collect(),
            eval_reynolds: vec![1200.0, 1500.0, 2000.0],
            out_dir: "table1".into(),
            field_stride: (4, 5),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ppo.validate()?;
        for &m in &self.modes {
            self.problem.env_config(m, &self.env)?;
        }
        if self.eval_reynolds.iter().any(|re| !(re.is_finite() && *re > 0.0)) {
            return Err(Error::Config("Reynolds numbers must be positive".into()));
        }
        if self.field_stride.0 == 0 || self.field_stride.1 == 0 {
            return Err(Error::Config("field stride must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_consistent() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let env = cfg.problem.env_config(ClosureMode::Vmrl, &cfg.env).unwrap();
        assert_eq!(env.horizon, 499);
        assert!((env.dt - 1.0 / 499.0).abs() < 1e-15);
        assert_eq!(env.reward_kind, crate::env::RewardKind::Vms);
        assert_eq!(cfg.seeds.len(), 10);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"seeds": [3], "ppo": {"total_updates": 7}}"#).unwrap();
        assert_eq!(cfg.seeds, vec![3]);
        assert_eq!(cfg.ppo.total_updates, 7);
        assert_eq!(cfg.ppo.gamma, 0.99);
        assert_eq!(cfg.problem.r, 8);
        assert!(ExperimentConfig::from_json(r#"{"ppo": {"clip_epsilon": 1.5}}"#).is_err());
    }
}
