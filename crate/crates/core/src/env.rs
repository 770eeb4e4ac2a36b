//! Episodic closure environment.
//!
//! The agent observes the resolved modal coefficients of the closure ROM and
//! chooses eddy viscosities for the next integrator step. Three models are
//! advanced side by side from the same projected initial condition:
//!
//! * the closure ROM (`R` modes, action dependent),
//! * the base GP ROM (`R` modes, no closure),
//! * the test-scale model (GP on all `R̃` modes, first `R` entries compared).
//!
//! Rewards are either supervised (distance to the projected snapshot) or the
//! data-free multiscale indicator `±10` comparing base/ROM and base/test
//! distances.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fom_data::{exact_field, SnapshotSet};
use crate::galerkin::{build_tensors, check_bounded, integrate_gp, Rk4, RomTensors};
use crate::pod::PodBasis;

/// Closure parameterization exposed to the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosureMode {
    /// One amplitude, distributed over modes by the linear kernel `k/R`.
    Lmrl,
    /// One coefficient per resolved mode, supervised reward.
    Mmrl,
    /// One coefficient per resolved mode, multiscale reward.
    Vmrl,
}

impl ClosureMode {
    pub const ALL: [ClosureMode; 3] = [ClosureMode::Lmrl, ClosureMode::Mmrl, ClosureMode::Vmrl];

    pub fn name(self) -> &'static str {
        match self {
            ClosureMode::Lmrl => "LMRL",
            ClosureMode::Mmrl => "MMRL",
            ClosureMode::Vmrl => "VMRL",
        }
    }

    pub fn default_reward(self) -> RewardKind {
        match self {
            ClosureMode::Vmrl => RewardKind::Vms,
            _ => RewardKind::Supervised,
        }
    }
}

impl std::str::FromStr for ClosureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmrl" => Ok(ClosureMode::Lmrl),
            "mmrl" => Ok(ClosureMode::Mmrl),
            "vmrl" => Ok(ClosureMode::Vmrl),
            other => Err(Error::Config(format!("unknown closure mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for ClosureMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Supervised,
    Vms,
}

/// Reward magnitude of the multiscale indicator.
pub const VMS_REWARD: f64 = 10.0;
/// Reward assigned on the step a supervised episode blows up.
pub const SUPERVISED_DIVERGENCE_PENALTY: f64 = -1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub mode: ClosureMode,
    /// Resolved modes `R`.
    pub r: usize,
    /// Resolved plus test modes `R̃`.
    pub r_total: usize,
    /// Training viscosity; fixes observation scaling.
    pub nu: f64,
    pub dt: f64,
    /// Agent decisions per episode.
    pub horizon: usize,
    /// Upper bound of each modal eddy viscosity.
    pub eta_max: f64,
    pub sigma: f64,
    pub reward_kind: RewardKind,
    /// Center and scale observations by the base-GP statistics at `nu`.
    pub normalize_obs: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            mode: ClosureMode::Mmrl,
            r: 8,
            r_total: 16,
            nu: 0.001,
            dt: 1.0 / 499.0,
            horizon: 499,
            eta_max: 0.001,
            sigma: 1.6,
            reward_kind: RewardKind::Supervised,
            normalize_obs: true,
        }
    }
}

impl EnvConfig {
    /// Defaults for `mode`, with its natural reward.
    pub fn for_mode(mode: ClosureMode) -> Self {
        Self {
            mode,
            reward_kind: mode.default_reward(),
            ..Self::default()
        }
    }

    pub fn action_dim(&self) -> usize {
        match self.mode {
            ClosureMode::Lmrl => 1,
            ClosureMode::Mmrl | ClosureMode::Vmrl => self.r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.r == 0 || self.r >= self.r_total {
            return bad(format!("need 1 <= r ({}) < r_total ({})", self.r, self.r_total));
        }
        if !(self.sigma > 1.0) {
            return bad(format!("sigma must exceed 1, got {}", self.sigma));
        }
        if !(self.eta_max > 0.0 && self.eta_max.is_finite()) {
            return bad(format!("eta_max must be positive, got {}", self.eta_max));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.nu > 0.0) {
            return bad(format!("viscosity must be positive, got {}", self.nu));
        }
        Ok(())
    }
}

/// Maps agent outputs in `[-1, 1]` to modal eddy viscosities in `[0, eta_max]`.
pub fn map_action(raw: &[f64], config: &EnvConfig) -> Result<Vec<f64>> {
    if raw.len() != config.action_dim() {
        return Err(domain(format!(
            "{} mode expects {} action components, got {}",
            config.mode,
            config.action_dim(),
            raw.len()
        )));
    }
    if raw.iter().any(|a| !a.is_finite()) {
        return Err(domain("non-finite action"));
    }
    let scale = |a: f64| config.eta_max * (a.clamp(-1.0, 1.0) + 1.0) * 0.5;
    Ok(match config.mode {
        ClosureMode::Lmrl => {
            let amp = scale(raw[0]);
            (1..=config.r).map(|k| amp * k as f64 / config.r as f64).collect()
        }
        ClosureMode::Mmrl | ClosureMode::Vmrl => raw.iter().map(|&a| scale(a)).collect(),
    })
}

/// `Σ_t γ^t r_t`.
pub fn episode_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    total
}

/// Diagnostics attached to every step.
pub type StepInfo = BTreeMap<&'static str, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Minimal interface the PPO trainer needs from an environment.
pub trait Environment {
    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Starts a new episode and returns the first observation.
    fn reset(&mut self) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub t_index: usize,
    pub alpha_rom: Vec<f64>,
    pub alpha_base: Vec<f64>,
    pub alpha_test: Vec<f64>,
    pub done: bool,
    pub diverged: bool,
}

/// Per-mode `(mean, std)` of the base GP trajectory at the training viscosity.
pub fn observation_stats(basis: &PodBasis, config: &EnvConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let tensors = build_tensors(basis, config.nu, config.r)?;
    let alpha0 = basis.project(&exact_field(&basis.grid, 0.0, config.nu)?, config.r)?;
    let traj = integrate_gp(&tensors, &alpha0, config.dt, config.horizon)?;
    let n = traj.len() as f64;
    let mut mean = vec![0.0; config.r];
    for s in &traj.states {
        for (m, a) in mean.iter_mut().zip(s) {
            *m += a / n;
        }
    }
    let mut std = vec![0.0; config.r];
    for s in &traj.states {
        for ((v, a), m) in std.iter_mut().zip(s).zip(&mean) {
            *v += (a - m) * (a - m) / n;
        }
    }
    let std = std.into_iter().map(|v| v.sqrt().max(1e-12)).collect();
    Ok((mean, std))
}

/// The closure ROM environment at a fixed episode viscosity.
#[derive(Debug, Clone)]
pub struct ClosureEnv {
    config: EnvConfig,
    nu: f64,
    basis: Arc<PodBasis>,
    tensors: RomTensors,
    tensors_test: RomTensors,
    targets: Option<Vec<Vec<f64>>>,
    obs_mean: Vec<f64>,
    obs_scale: Vec<f64>,
    alpha0_test: Vec<f64>,
    state: EnvState,
    rk: Rk4,
    rk_test: Rk4,
    scratch_eta: Vec<f64>,
}

impl ClosureEnv {
    /// Builds the environment at episode viscosity `nu` and resets it.
    ///
    /// `snapshots` must be present for the supervised reward and is ignored
    /// otherwise. The basis stays the one extracted at the training
    /// viscosity; only the Galerkin operators are rebuilt for `nu`.
    pub fn new(config: EnvConfig, nu: f64, basis: Arc<PodBasis>, snapshots: Option<&SnapshotSet>) -> Result<Self> {
        config.validate()?;
        if config.r_total > basis.r_total {
            return Err(Error::Config(format!(
                "environment needs {} modes, basis has {}",
                config.r_total, basis.r_total
            )));
        }
        let targets = match (config.reward_kind, snapshots) {
            (RewardKind::Supervised, None) => {
                return Err(Error::Config("supervised reward requires snapshot data".into()))
            }
            (RewardKind::Supervised, Some(s)) => Some(supervision_targets(&config, nu, &basis, s)?),
            (RewardKind::Vms, _) => None,
        };
        let tensors_test = build_tensors(&basis, nu, config.r_total)?;
        let tensors = tensors_test.truncated(config.r)?;
        let (obs_mean, obs_scale) = if config.normalize_obs {
            observation_stats(&basis, &config)?
        } else {
            (vec![0.0; config.r], vec![1.0; config.r])
        };
        let alpha0_test = basis.project(&exact_field(&basis.grid, 0.0, nu)?, config.r_total)?;
        let state = initial_state(&config, &alpha0_test);
        Ok(Self {
            nu,
            tensors,
            tensors_test,
            targets,
            obs_mean,
            obs_scale,
            alpha0_test,
            state,
            rk: Rk4::new(config.r),
            rk_test: Rk4::new(config.r_total),
            scratch_eta: vec![0.0; config.r],
            basis,
            config,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn basis(&self) -> &Arc<PodBasis> {
        &self.basis
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn tensors(&self) -> &RomTensors {
        &self.tensors
    }

    pub fn time(&self) -> f64 {
        self.state.t_index as f64 * self.config.dt
    }

    /// Agent-facing view of the closure-ROM state.
    pub fn observe(&self) -> Vec<f64> {
        self.state
            .alpha_rom
            .iter()
            .zip(self.obs_mean.iter().zip(&self.obs_scale))
            .map(|(a, (m, s))| (a - m) / s)
            .collect()
    }

    fn apply(&mut self, raw_action: &[f64]) -> Result<StepResult> {
        if self.state.done {
            return Err(Error::Usage("step called on a finished episode".into()));
        }
        let eta = map_action(raw_action, &self.config)?;
        self.scratch_eta.copy_from_slice(&eta);
        let dt = self.config.dt;
        let r = self.config.r;

        let tensors = &self.tensors;
        let eta = &self.scratch_eta;
        self.rk.step(
            &mut |a: &[f64], out: &mut [f64]| tensors.closure_into(a, eta, out),
            &mut self.state.alpha_rom,
            dt,
        );
        self.rk.step(
            &mut |a: &[f64], out: &mut [f64]| tensors.gp_into(a, out),
            &mut self.state.alpha_base,
            dt,
        );
        let tt = &self.tensors_test;
        self.rk_test.step(
            &mut |a: &[f64], out: &mut [f64]| tt.gp_into(a, out),
            &mut self.state.alpha_test,
            dt,
        );
        self.state.t_index += 1;

        let mut info = StepInfo::new();
        info.insert("t", self.time());
        info.insert("eta_mean", eta.iter().sum::<f64>() / r as f64);

        let blown = check_bounded(&self.state.alpha_rom).is_err()
            || check_bounded(&self.state.alpha_base).is_err()
            || check_bounded(&self.state.alpha_test).is_err();
        if blown {
            self.state.done = true;
            self.state.diverged = true;
            info.insert("diverged", 1.0);
            let reward = match self.config.reward_kind {
                RewardKind::Supervised => SUPERVISED_DIVERGENCE_PENALTY,
                RewardKind::Vms => -VMS_REWARD,
            };
            return Ok(StepResult {
                observation: self.observe(),
                reward,
                done: true,
                info,
            });
        }

        let s = &self.state;
        let d_base_rom = distance(&s.alpha_base, &s.alpha_rom);
        let d_base_test = distance(&s.alpha_base, &s.alpha_test[..r]);
        info.insert("dist_base_rom", d_base_rom);
        info.insert("dist_base_test", d_base_test);
        info.insert("dist_rom_test", distance(&s.alpha_rom, &s.alpha_test[..r]));
        let truth_err = self.targets.as_ref().map(|t| distance(&s.alpha_rom, &t[s.t_index]));
        if let Some(e) = truth_err {
            info.insert("dist_rom_truth", e);
        }

        let reward = match self.config.reward_kind {
            RewardKind::Supervised => -truth_err.expect("targets exist for supervised reward"),
            RewardKind::Vms => vms_reward(self.config.sigma, d_base_rom, d_base_test),
        };
        if self.state.t_index >= self.config.horizon {
            self.state.done = true;
        }
        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.state.done,
            info,
        })
    }
}

impl Environment for ClosureEnv {
    fn observation_dim(&self) -> usize {
        self.config.r
    }

    fn action_dim(&self) -> usize {
        self.config.action_dim()
    }

    fn reset(&mut self) -> Vec<f64> {
        self.state = initial_state(&self.config, &self.alpha0_test);
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.apply(action)
    }
}

/// `+10` if `σ‖base − rom‖ < ‖base − test‖`, else `−10`.
pub fn vms_reward(sigma: f64, dist_base_rom: f64, dist_base_test: f64) -> f64 {
    if sigma * dist_base_rom < dist_base_test {
        VMS_REWARD
    } else {
        -VMS_REWARD
    }
}

fn initial_state(config: &EnvConfig, alpha0_test: &[f64]) -> EnvState {
    let alpha0 = alpha0_test[..config.r].to_vec();
    EnvState {
        t_index: 0,
        alpha_rom: alpha0.clone(),
        alpha_base: alpha0,
        alpha_test: alpha0_test.to_vec(),
        done: false,
        diverged: false,
    }
}

fn supervision_targets(
    config: &EnvConfig,
    nu: f64,
    basis: &PodBasis,
    snapshots: &SnapshotSet,
) -> Result<Vec<Vec<f64>>> {
    if (snapshots.nu - nu).abs() > 1e-12 * nu {
        return Err(Error::Config(format!(
            "snapshots were generated at nu = {}, episode runs at nu = {nu}",
            snapshots.nu
        )));
    }
    if snapshots.grid != basis.grid {
        return Err(Error::Config("snapshot grid differs from basis grid".into()));
    }
    if snapshots.times.n_snapshots < config.horizon + 1 {
        return Err(Error::Config(format!(
            "{} snapshots cannot supervise {} steps",
            snapshots.times.n_snapshots, config.horizon
        )));
    }
    if (snapshots.times.dt() - config.dt).abs() > 1e-9 * config.dt {
        return Err(Error::Config(format!(
            "snapshot spacing {} differs from step size {}",
            snapshots.times.dt(),
            config.dt
        )));
    }
    (0..=config.horizon)
        .map(|j| basis.project(snapshots.column(j), config.r))
        .collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom_data::{generate_snapshots, Grid, TimeMesh};
    use crate::galerkin::integrate_gp;
    use crate::pod::compute_pod;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    /// Small but non-trivial setup: 256 points, 101 snapshots at Re = 100.
    fn fixture() -> &'static (Arc<PodBasis>, SnapshotSet, EnvConfig) {
        static F: OnceLock<(Arc<PodBasis>, SnapshotSet, EnvConfig)> = OnceLock::new();
        F.get_or_init(|| {
            let nu = 0.01;
            let snaps = generate_snapshots(&Grid::unit(256).unwrap(), &TimeMesh::unit(101).unwrap(), nu).unwrap();
            let basis = Arc::new(compute_pod(&snaps, 4, 8).unwrap());
            let config = EnvConfig {
                r: 4,
                r_total: 8,
                nu,
                dt: 0.01,
                horizon: 100,
                eta_max: 10.0 * nu,
                ..EnvConfig::default()
            };
            (basis, snaps, config)
        })
    }

    fn env(mode: ClosureMode) -> ClosureEnv {
        let (basis, snaps, base) = fixture();
        let config = EnvConfig {
            mode,
            reward_kind: mode.default_reward(),
            ..base.clone()
        };
        ClosureEnv::new(config, base.nu, basis.clone(), Some(snaps)).unwrap()
    }

    #[test]
    fn map_action_examples() {
        let lmrl = EnvConfig {
            mode: ClosureMode::Lmrl,
            eta_max: 0.01,
            r: 8,
            ..EnvConfig::default()
        };
        let eta = map_action(&[1.0], &lmrl).unwrap();
        for (k, e) in eta.iter().enumerate() {
            assert_relative_eq!(*e, 0.01 * (k + 1) as f64 / 8.0, max_relative = 1e-14);
        }
        assert_relative_eq!(eta[0], 0.00125);

        let mmrl = EnvConfig {
            eta_max: 0.01,
            ..EnvConfig::for_mode(ClosureMode::Mmrl)
        };
        assert!(map_action(&[-1.0; 8], &mmrl).unwrap().iter().all(|e| *e == 0.0));
        assert!(map_action(&[0.0; 8], &mmrl).unwrap().iter().all(|e| *e == 0.005));
        assert!(map_action(&[-1.0], &lmrl).unwrap().iter().all(|e| *e == 0.0));

        assert!(map_action(&[0.0; 7], &mmrl).is_err());
        assert!(map_action(&[0.0; 8], &lmrl).is_err());
        assert!(map_action(&[f64::NAN; 8], &mmrl).is_err());
    }

    #[test]
    fn discounted_return() {
        assert_eq!(episode_return(&[1.0, 1.0, 1.0], 0.0), 1.0);
        assert_eq!(episode_return(&[1.0, 1.0, 1.0], 1.0), 3.0);
        assert_eq!(episode_return(&[1.0, 2.0], 0.5), 2.0);
    }

    #[test]
    fn vms_reward_cases() {
        assert_eq!(vms_reward(1.6, 0.001, 0.01), 10.0);
        assert_eq!(vms_reward(1.6, 0.01, 0.01), -10.0);
        assert_eq!(vms_reward(1.6, 0.0, 0.0), -10.0);
    }

    #[test]
    fn config_validation() {
        let ok = EnvConfig::default();
        assert!(ok.validate().is_ok());
        assert!(EnvConfig {
            sigma: 1.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(EnvConfig {
            eta_max: 0.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(EnvConfig {
            horizon: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(EnvConfig { r: 16, ..ok }.validate().is_err());
        assert_eq!("VmRl".parse::<ClosureMode>().unwrap(), ClosureMode::Vmrl);
        assert!("gp".parse::<ClosureMode>().is_err());
    }

    #[test]
    fn supervised_requires_snapshots() {
        let (basis, _, base) = fixture();
        let err = ClosureEnv::new(base.clone(), base.nu, basis.clone(), None).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let vms = EnvConfig::for_mode(ClosureMode::Vmrl);
        let vms = EnvConfig {
            mode: vms.mode,
            reward_kind: vms.reward_kind,
            ..base.clone()
        };
        assert!(ClosureEnv::new(vms, base.nu, basis.clone(), None).is_ok());
    }

    #[test]
    fn reset_state_is_projected_initial_condition() {
        let (basis, snaps, _) = fixture();
        let mut e = env(ClosureMode::Mmrl);
        e.reset();
        let s = e.state();
        assert_eq!(s.alpha_rom, basis.project(snaps.column(0), 4).unwrap());
        assert_eq!(s.alpha_base, s.alpha_rom);
        assert_eq!(&s.alpha_test[..4], &s.alpha_rom[..]);
        assert_eq!(s.alpha_test.len(), 8);
        assert_eq!(s.t_index, 0);
    }

    #[test]
    fn closure_off_reproduces_gp() {
        let mut e = env(ClosureMode::Mmrl);
        e.reset();
        let gp = integrate_gp(e.tensors(), &e.state().alpha_base.clone(), 0.01, 100).unwrap();
        let mut t = 0;
        loop {
            let res = e.step(&[-1.0; 4]).unwrap();
            t += 1;
            for (a, b) in e.state().alpha_rom.iter().zip(&gp.states[t]) {
                assert!((a - b).abs() <= 1e-12, "step {t}: {a} vs {b}");
            }
            assert_eq!(e.state().alpha_rom, e.state().alpha_base);
            assert!(res.reward <= 0.0);
            if res.done {
                break;
            }
        }
        assert_eq!(t, 100);
        assert!(matches!(e.step(&[-1.0; 4]), Err(Error::Usage(_))));
    }

    #[test]
    fn vms_reward_values_and_action_independence() {
        let mut a = env(ClosureMode::Vmrl);
        let mut b = env(ClosureMode::Vmrl);
        a.reset();
        b.reset();
        for t in 0..50 {
            let ra = a.step(&[0.3; 4]).unwrap();
            let rb = b.step(&[-0.8, 0.1, 0.9, -0.2]).unwrap();
            assert!(ra.reward == 10.0 || ra.reward == -10.0);
            assert!(rb.reward == 10.0 || rb.reward == -10.0);
            assert_eq!(a.state().alpha_base, b.state().alpha_base, "step {t}");
            assert_eq!(a.state().alpha_test, b.state().alpha_test);
            assert_ne!(a.state().alpha_rom, b.state().alpha_rom);
        }
    }

    #[test]
    fn step_is_deterministic() {
        let mut a = env(ClosureMode::Lmrl);
        let mut b = env(ClosureMode::Lmrl);
        a.reset();
        b.reset();
        for _ in 0..20 {
            assert_eq!(a.step(&[0.1]).unwrap(), b.step(&[0.1]).unwrap());
        }
    }

    #[test]
    fn supervised_reward_zero_at_truth() {
        // one step with the exact target placed in the ROM state
        let mut e = env(ClosureMode::Mmrl);
        e.reset();
        let res = e.step(&[-1.0; 4]).unwrap();
        let err = res.info["dist_rom_truth"];
        assert_relative_eq!(res.reward, -err);
        assert!(err > 0.0);
        assert_eq!(-distance(&[0.5, 0.25], &[0.5, 0.25]), 0.0);
    }

    #[test]
    fn divergence_ends_episode_with_penalty() {
        let (basis, snaps, base) = fixture();
        // absurd negative-free but huge viscosity with a huge step blows up RK4
        let config = EnvConfig {
            eta_max: 1e4,
            dt: 0.01,
            ..base.clone()
        };
        let mut e = ClosureEnv::new(config, base.nu, basis.clone(), Some(snaps)).unwrap();
        e.reset();
        let mut last = None;
        for _ in 0..100 {
            let res = e.step(&[1.0; 4]).unwrap();
            if res.done {
                last = Some(res);
                break;
            }
        }
        let res = last.expect("episode should terminate");
        assert_eq!(res.reward, SUPERVISED_DIVERGENCE_PENALTY);
        assert!(e.state().diverged);
        assert!(res.observation.len() == 4);
    }
}
