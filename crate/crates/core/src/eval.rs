//! Evaluation against the true reduced order representation (ROR), the
//! projection of the exact solution onto the training basis.

use std::sync::Arc;

use rayon::prelude::*;

use crate::env::{ClosureEnv, ClosureMode, EnvConfig, Environment, RewardKind};
use crate::error::{domain, Result};
use crate::fom_data::{exact_field, TimeMesh};
use crate::galerkin::{build_tensors, integrate_gp, Trajectory};
use crate::pod::PodBasis;
use crate::ppo::ActorCritic;

/// `α_k(t_j) = ⟨u(·, t_j; nu), ψ_k⟩` for `k < k_max` at every mesh instant.
pub fn true_projection_trajectory(nu: f64, basis: &PodBasis, times: &TimeMesh, k_max: usize) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(times.n_snapshots);
    for t in times.times() {
        states.push(basis.project(&exact_field(&basis.grid, t, nu)?, k_max)?);
    }
    Ok(Trajectory {
        times: times.times(),
        states,
    })
}

/// GP model with `r` modes from the projected initial condition at `nu`.
pub fn gp_trajectory(basis: &PodBasis, nu: f64, r: usize, times: &TimeMesh) -> Result<Trajectory> {
    let tensors = build_tensors(basis, nu, r)?;
    let alpha0 = basis.project(&exact_field(&basis.grid, times.t_min, nu)?, r)?;
    let mut traj = integrate_gp(&tensors, &alpha0, times.dt(), times.n_snapshots - 1)?;
    for t in &mut traj.times {
        *t += times.t_min;
    }
    Ok(traj)
}

/// Space-time RMSE of the reconstructed fields,
/// `sqrt(mean_{i,j} (u_a(x_i, t_j) − u_b(x_i, t_j))²)`.
///
/// Trajectories may carry different numbers of modes; missing coefficients
/// count as zero.
pub fn rmse_field(traj: &Trajectory, reference: &Trajectory, basis: &PodBasis) -> Result<f64> {
    if traj.len() != reference.len() || traj.is_empty() {
        return Err(domain(format!(
            "time meshes differ: {} vs {} instants",
            traj.len(),
            reference.len()
        )));
    }
    let tol = 1e-9 * traj.times.last().unwrap().abs().max(1.0);
    if traj
        .times
        .iter()
        .zip(&reference.times)
        .any(|(a, b)| (a - b).abs() > tol)
    {
        return Err(domain("time meshes differ"));
    }
    let k = traj.modes().max(reference.modes());
    if k > basis.r_total {
        return Err(domain(format!(
            "{k} coefficients for a basis of {} modes",
            basis.r_total
        )));
    }
    let n = basis.grid.n_points;
    let mut total = 0.0;
    let mut diff = vec![0.0; k];
    for (a, b) in traj.states.iter().zip(&reference.states) {
        for (m, d) in diff.iter_mut().enumerate() {
            *d = a.get(m).copied().unwrap_or(0.0) - b.get(m).copied().unwrap_or(0.0);
        }
        let field = basis.reconstruct(&diff)?;
        total += field.iter().map(|v| v * v).sum::<f64>();
    }
    Ok((total / (n * traj.len()) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutOutcome {
    /// Closure-ROM coefficients; truncated at the blow-up step on divergence.
    pub trajectory: Trajectory,
    pub diverged: bool,
}

/// Deterministic (mean action) rollout of `agent` through the closure
/// environment at viscosity `nu`.
pub fn rollout_policy(
    agent: &ActorCritic,
    env_config: &EnvConfig,
    nu: f64,
    basis: Arc<PodBasis>,
) -> Result<RolloutOutcome> {
    // rewards are not needed; the multiscale variant needs no snapshot data
    let config = EnvConfig {
        reward_kind: RewardKind::Vms,
        ..env_config.clone()
    };
    let mut env = ClosureEnv::new(config, nu, basis, None)?;
    let mut obs = env.reset();
    let mut times = vec![0.0];
    let mut states = vec![env.state().alpha_rom.clone()];
    loop {
        let res = env.step(&agent.policy.mean_action(&obs))?;
        obs = res.observation;
        if env.state().diverged {
            return Ok(RolloutOutcome {
                trajectory: Trajectory { times, states },
                diverged: true,
            });
        }
        times.push(env.time());
        states.push(env.state().alpha_rom.clone());
        if res.done {
            break;
        }
    }
    Ok(RolloutOutcome {
        trajectory: Trajectory { times, states },
        diverged: false,
    })
}

/// RMSE of a policy rollout against the ROR at `nu`; divergence yields
/// `f64::INFINITY`.
pub fn policy_rmse(
    agent: &ActorCritic,
    env_config: &EnvConfig,
    nu: f64,
    basis: Arc<PodBasis>,
) -> Result<(f64, RolloutOutcome)> {
    let times = env_times(env_config)?;
    let out = rollout_policy(agent, env_config, nu, basis.clone())?;
    if out.diverged {
        return Ok((f64::INFINITY, out));
    }
    let ror = true_projection_trajectory(nu, &basis, &times, env_config.r)?;
    Ok((rmse_field(&out.trajectory, &ror, &basis)?, out))
}

pub fn env_times(config: &EnvConfig) -> Result<TimeMesh> {
    TimeMesh::new(config.horizon + 1, 0.0, config.horizon as f64 * config.dt)
}

/// Summary of one (model, Re) cell over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub reynolds: f64,
    pub per_seed: Vec<f64>,
    pub mean: f64,
    /// Twice the sample standard deviation (0 for a single seed).
    pub two_std: f64,
    pub median: f64,
    pub diverged: usize,
}

impl CellStats {
    pub fn from_values(reynolds: f64, per_seed: Vec<f64>) -> Self {
        let n = per_seed.len();
        let diverged = per_seed.iter().filter(|v| !v.is_finite()).count();
        let mean = per_seed.iter().sum::<f64>() / n as f64;
        let two_std = if n > 1 {
            let var = per_seed.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            2.0 * var.sqrt()
        } else {
            0.0
        };
        Self {
            reynolds,
            median: median(&per_seed),
            per_seed,
            mean,
            two_std,
            diverged,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Index of the seed whose value is the (lower) median, used to pick the
/// trajectory written out for plotting.
pub fn representative_index(values: &[f64]) -> Option<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx.get(values.len().saturating_sub(1) / 2).copied()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    /// `GP`, `LMRL`, `MMRL` or `VMRL`.
    pub model: String,
    pub action: String,
    pub cells: Vec<CellStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub reynolds: Vec<f64>,
    pub rows: Vec<ModelRow>,
    /// Models requested but without any checkpoint.
    pub absent: Vec<String>,
}

/// A trained agent together with the environment it was trained in.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub seed: u64,
    pub agent: ActorCritic,
    pub env: EnvConfig,
}

pub fn action_label(mode: Option<ClosureMode>) -> &'static str {
    match mode {
        None => "-",
        Some(ClosureMode::Lmrl) => "eta_e(t)",
        Some(_) => "eta_1(t)..eta_R(t)",
    }
}

/// RMSE table: a GP row followed by one row per closure mode.
pub fn make_table(
    basis: Arc<PodBasis>,
    gp_env: &EnvConfig,
    models: &[(ClosureMode, Vec<TrainedModel>)],
    reynolds: &[f64],
) -> Result<EvalReport> {
    let times = env_times(gp_env)?;
    let mut rows = Vec::new();
    let mut gp_cells = Vec::new();
    for &re in reynolds {
        let nu = 1.0 / re;
        let ror = true_projection_trajectory(nu, &basis, &times, gp_env.r)?;
        let rmse = match gp_trajectory(&basis, nu, gp_env.r, &times) {
            Ok(gp) => rmse_field(&gp, &ror, &basis)?,
            Err(crate::Error::Divergence { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        gp_cells.push(CellStats::from_values(re, vec![rmse]));
    }
    rows.push(ModelRow {
        model: "GP".into(),
        action: action_label(None).into(),
        cells: gp_cells,
    });

    let mut absent = Vec::new();
    for (mode, trained) in models {
        if trained.is_empty() {
            absent.push(mode.name().to_string());
            continue;
        }
        let mut cells = Vec::new();
        for &re in reynolds {
            let values = trained
                .par_iter()
                .map(|m| policy_rmse(&m.agent, &m.env, 1.0 / re, basis.clone()).map(|(v, _)| v))
                .collect::<Result<Vec<_>>>()?;
            cells.push(CellStats::from_values(re, values));
        }
        rows.push(ModelRow {
            model: mode.name().into(),
            action: action_label(Some(*mode)).into(),
            cells,
        });
    }
    Ok(EvalReport {
        reynolds: reynolds.to_vec(),
        rows,
        absent,
    })
}

impl EvalReport {
    pub fn row(&self, model: &str) -> Option<&ModelRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// `model,action,re,mean,two_std,median,n_seeds,diverged,per_seed`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,action,re,rmse_mean,rmse_two_std,rmse_median,n_seeds,diverged,per_seed\n");
        for row in &self.rows {
            for c in &row.cells {
                let seeds: Vec<String> = c.per_seed.iter().map(|v| v.to_string()).collect();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    row.model,
                    row.action,
                    c.reynolds,
                    c.mean,
                    c.two_std,
                    c.median,
                    c.per_seed.len(),
                    c.diverged,
                    seeds.join(";")
                ));
            }
        }
        out
    }

    /// Aligned text table in units of 1e-3.
    pub fn to_text(&self) -> String {
        let mut header = format!("{:<6} {:<20}", "ROM", "Action");
        for re in &self.reynolds {
            header.push_str(&format!(" {:>22}", format!("RMSE (Re = {re})")));
        }
        let mut out = format!("{header}\n{}\n", "-".repeat(header.len()));
        for row in &self.rows {
            let mut line = format!("{:<6} {:<20}", row.model, row.action);
            for c in &row.cells {
                let cell = if c.per_seed.len() > 1 {
                    format!("{:.3} ± {:.3}", c.mean * 1e3, c.two_std * 1e3)
                } else {
                    format!("{:.3}", c.mean * 1e3)
                };
                line.push_str(&format!(" {cell:>22}"));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("values ×1e-3; closure rows show mean ± 2 std over seeds\n");
        for m in &self.absent {
            out.push_str(&format!("{m}: no checkpoints found\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom_data::{generate_snapshots, Grid};
    use crate::pod::compute_pod;
    use approx::assert_relative_eq;

    fn basis() -> Arc<PodBasis> {
        let s = generate_snapshots(&Grid::unit(128).unwrap(), &TimeMesh::unit(51).unwrap(), 0.01).unwrap();
        Arc::new(compute_pod(&s, 3, 6).unwrap())
    }

    #[test]
    fn ror_matches_columnwise_projection() {
        let b = basis();
        let times = TimeMesh::unit(51).unwrap();
        let s = generate_snapshots(&b.grid, &times, 0.01).unwrap();
        let ror = true_projection_trajectory(0.01, &b, &times, 6).unwrap();
        for j in 0..51 {
            assert_eq!(ror.states[j], b.project(s.column(j), 6).unwrap());
        }
    }

    #[test]
    fn rmse_of_identical_is_zero_and_offset_is_exact() {
        let b = basis();
        let times = TimeMesh::unit(51).unwrap();
        let ror = true_projection_trajectory(0.01, &b, &times, 3).unwrap();
        assert_eq!(rmse_field(&ror, &ror, &b).unwrap(), 0.0);

        let c = 0.013;
        let mut shifted = ror.clone();
        for s in &mut shifted.states {
            s[0] += c;
        }
        let rms_psi1 = (b.mode(0).iter().map(|v| v * v).sum::<f64>() / b.grid.n_points as f64).sqrt();
        assert_relative_eq!(
            rmse_field(&shifted, &ror, &b).unwrap(),
            c * rms_psi1,
            max_relative = 1e-10
        );

        let short = Trajectory {
            times: ror.times[..10].to_vec(),
            states: ror.states[..10].to_vec(),
        };
        assert!(rmse_field(&short, &ror, &b).is_err());
    }

    #[test]
    fn cell_statistics() {
        let one = CellStats::from_values(1500.0, vec![0.02]);
        assert_eq!(one.two_std, 0.0);
        assert_eq!(one.mean, 0.02);
        let many = CellStats::from_values(1500.0, vec![1.0, 2.0, 3.0, 10.0]);
        assert_eq!(many.median, 2.5);
        assert!(many.mean >= 1.0 && many.mean <= 10.0);
        assert_eq!(CellStats::from_values(1.0, vec![1.0, f64::INFINITY]).diverged, 1);
        assert_eq!(representative_index(&[5.0, 1.0, 3.0]), Some(2));
        assert_eq!(representative_index(&[5.0, 1.0]), Some(1));
        assert_eq!(representative_index(&[]), None);
    }

    #[test]
    fn zero_closure_policy_is_gp() {
        let b = basis();
        // actor whose mean output saturates at -1 => eta = 0
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let mut agent = ActorCritic::random(3, 3, &[4], 0.0, &mut rng).unwrap();
        let n = agent.policy.mean_net.n_params();
        let params = agent.policy.mean_net.params_mut();
        params.fill(0.0);
        for p in &mut params[n - 3..] {
            *p = -1e3;
        }
        let env = EnvConfig {
            r: 3,
            r_total: 6,
            nu: 0.01,
            dt: 0.02,
            horizon: 50,
            ..EnvConfig::default()
        };
        let out = rollout_policy(&agent, &env, 0.01, b.clone()).unwrap();
        let gp = gp_trajectory(&b, 0.01, 3, &TimeMesh::unit(51).unwrap()).unwrap();
        assert!(!out.diverged);
        assert_eq!(out.trajectory.len(), gp.len());
        for (a, g) in out.trajectory.states.iter().zip(&gp.states) {
            for (x, y) in a.iter().zip(g) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let again = rollout_policy(&agent, &env, 0.01, b).unwrap();
        assert_eq!(again, out);
    }
}
