use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use romclosure::config::{ExperimentConfig, Problem, ProblemConfig};
use romclosure::env::{ClosureEnv, ClosureMode, EnvConfig, Environment, RewardKind};
use romclosure::eval::{
    gp_trajectory, make_table, policy_rmse, representative_index, rmse_field, true_projection_trajectory, EvalReport,
    TrainedModel,
};
use romclosure::fom_data::{generate_snapshots, Grid, TimeMesh};
use romclosure::galerkin::Trajectory;
use romclosure::io;
use romclosure::pod::{compute_pod, PodBasis};
use romclosure::ppo::{self, ActorCritic, Checkpoint, PpoConfig};

use crate::RomModel;

pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn generate_data(nu: f64, n_points: usize, n_snapshots: usize, out: &Path) -> Result<()> {
    let s = generate_snapshots(&Grid::unit(n_points)?, &TimeMesh::unit(n_snapshots)?, nu)?;
    io::write_snapshots(out, &s)?;
    eprintln!(
        "wrote {n_points}x{n_snapshots} snapshots (Re = {}) to {}",
        1.0 / nu,
        out.display()
    );
    Ok(())
}

pub fn pod(data: &Path, r: usize, r_total: usize, out: &Path) -> Result<()> {
    let s = io::read_snapshots(data)?;
    let basis = compute_pod(&s, r, r_total)?;
    io::write_basis(out, &basis, s.nu)?;
    eprintln!(
        "RIC({r}) = {:.4}%, RIC({r_total}) = {:.4}%; wrote {}",
        basis.ric(r)?,
        basis.ric(r_total)?,
        out.display()
    );
    Ok(())
}

pub fn rom(basis_path: &Path, re: f64, model: RomModel, n_snapshots: usize, out: &Path) -> Result<()> {
    let (basis, _) = io::read_basis(basis_path)?;
    let times = TimeMesh::unit(n_snapshots)?;
    let r = match model {
        RomModel::Gp => basis.r_resolved,
        RomModel::Test => basis.r_total,
    };
    let traj = gp_trajectory(&basis, 1.0 / re, r, &times)?;
    let ror = true_projection_trajectory(1.0 / re, &basis, &times, r)?;
    io::write_text(out, &io::trajectory_to_csv(&traj))?;
    eprintln!(
        "{r}-mode GP at Re = {re}: RMSE vs true projection {:.4e}",
        rmse_field(&traj, &ror, &basis)?
    );
    Ok(())
}

fn env_for(problem: &Problem, mode: ClosureMode, cfg: &ExperimentConfig) -> Result<EnvConfig> {
    Ok(problem.config.env_config(mode, &cfg.env)?)
}

/// Trains one agent and writes `reward_history.csv`, `policy.ckpt`,
/// periodic checkpoints and a config echo into `out_dir`.
pub fn train(
    cfg: &ExperimentConfig,
    mode: ClosureMode,
    seed: u64,
    out_dir: &Path,
    trace: bool,
) -> Result<TrainedModel> {
    let problem = cfg.problem.build()?;
    train_on(&problem, cfg, mode, seed, out_dir, trace)
}

fn train_on(
    problem: &Problem,
    cfg: &ExperimentConfig,
    mode: ClosureMode,
    seed: u64,
    out_dir: &Path,
    trace: bool,
) -> Result<TrainedModel> {
    let env_cfg = env_for(problem, mode, cfg)?;
    let ppo_cfg = PpoConfig {
        seed,
        ..cfg.ppo.clone()
    };
    let snapshots = match env_cfg.reward_kind {
        RewardKind::Supervised => Some(&problem.snapshots),
        RewardKind::Vms => None,
    };
    let nu = problem.config.nu_train;
    let make_env = || ClosureEnv::new(env_cfg.clone(), nu, problem.basis.clone(), snapshots);

    fs::create_dir_all(out_dir)?;
    let echo = ExperimentConfig {
        ppo: ppo_cfg.clone(),
        modes: vec![mode],
        seeds: vec![seed],
        ..cfg.clone()
    };
    fs::write(out_dir.join("config.json"), serde_json::to_string_pretty(&echo)?)?;

    let report = ppo::train(make_env, &ppo_cfg, |p| {
        let done = p.update + 1;
        if done % ppo_cfg.checkpoint_every == 0 || done == ppo_cfg.total_updates {
            let ckpt = Checkpoint::new(
                p.agent,
                &ppo_cfg,
                done,
                Some(env_cfg.clone()),
                Some(problem.config.clone()),
            );
            ckpt.save(&out_dir.join(format!("checkpoints/update_{done:05}.ckpt")))?;
            if trace {
                let text = trace_episode(p.agent, make_env()?)?;
                io::write_text(&out_dir.join(format!("trace/episode_{done:05}.csv")), &text)?;
            }
            let last = p.history.last().map(|h| h.moving_avg).unwrap_or(0.0);
            eprintln!(
                "{mode} seed {seed}: update {done}/{}, moving-average reward {last:.4}",
                ppo_cfg.total_updates
            );
        }
        Ok(())
    })?;

    io::write_text(
        &out_dir.join("reward_history.csv"),
        &io::reward_history_to_csv(&report.history),
    )?;
    let ckpt = Checkpoint::new(
        &report.agent,
        &ppo_cfg,
        ppo_cfg.total_updates,
        Some(env_cfg.clone()),
        Some(problem.config.clone()),
    );
    ckpt.save(&out_dir.join("policy.ckpt"))?;
    Ok(TrainedModel {
        seed,
        agent: report.agent,
        env: env_cfg,
    })
}

/// Deterministic episode with the step diagnostics as CSV columns.
fn trace_episode(agent: &ActorCritic, mut env: ClosureEnv) -> romclosure::Result<String> {
    let mut obs = env.reset();
    let mut rows = Vec::new();
    loop {
        let res = env.step(&agent.policy.mean_action(&obs))?;
        rows.push((res.reward, res.info));
        obs = res.observation;
        if res.done {
            break;
        }
    }
    let mut keys: Vec<&str> = rows.iter().flat_map(|(_, info)| info.keys().copied()).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut out = format!("step,reward,{}\n", keys.join(","));
    for (i, (reward, info)) in rows.iter().enumerate() {
        write!(out, "{},{reward}", i + 1).unwrap();
        for k in &keys {
            match info.get(k) {
                Some(v) => write!(out, ",{v}").unwrap(),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn find_policies(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            find_policies(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == "policy.ckpt") {
            found.push(path);
        }
    }
    Ok(())
}

pub fn evaluate(dir: &Path, reynolds: &[f64], out: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let mut paths = Vec::new();
    find_policies(dir, &mut paths)?;
    let mut problem_cfg: Option<ProblemConfig> = None;
    let mut models: Vec<(ClosureMode, Vec<TrainedModel>)> = ClosureMode::ALL.iter().map(|m| (*m, vec![])).collect();
    for path in &paths {
        let ckpt = Checkpoint::load(path)?;
        let (Some(env), Some(pc)) = (ckpt.header.env.clone(), ckpt.header.problem.clone()) else {
            bail!("{} lacks the environment or problem description", path.display());
        };
        match &problem_cfg {
            Some(p) if *p != pc => bail!("{} was trained on a different problem", path.display()),
            _ => problem_cfg = Some(pc),
        }
        let slot = models.iter_mut().find(|(m, _)| *m == env.mode).unwrap();
        slot.1.push(TrainedModel {
            seed: ckpt.header.seed,
            agent: ckpt.agent,
            env,
        });
    }
    eprintln!("found {} checkpoints below {}", paths.len(), dir.display());
    let problem_cfg = problem_cfg.unwrap_or_else(|| cfg.problem.clone());
    let basis = problem_cfg.build()?.basis;
    let report = write_evaluation(&basis, &problem_cfg, cfg, &models, reynolds, out)?;
    print!("{}", report.to_text());
    Ok(())
}

fn write_evaluation(
    basis: &Arc<PodBasis>,
    problem: &ProblemConfig,
    cfg: &ExperimentConfig,
    models: &[(ClosureMode, Vec<TrainedModel>)],
    reynolds: &[f64],
    out: &Path,
) -> Result<EvalReport> {
    let gp_env = problem.env_config(ClosureMode::Mmrl, &cfg.env)?;
    let report = make_table(basis.clone(), &gp_env, models, reynolds)?;
    io::write_text(&out.join("rmse_table.csv"), &report.to_csv())?;
    io::write_text(&out.join("rmse_table.txt"), &report.to_text())?;

    let times = romclosure::eval::env_times(&gp_env)?;
    for (j, &re) in reynolds.iter().enumerate() {
        let nu = 1.0 / re;
        let ror = true_projection_trajectory(nu, basis, &times, gp_env.r)?;
        let write = |label: &str, traj: &Trajectory| -> Result<()> {
            let re_tag = format!("{re}");
            io::write_text(
                &out.join(format!("modal_trajectories_{label}_{re_tag}.csv")),
                &io::modal_comparison_to_csv(label, traj, &ror),
            )?;
            io::write_text(
                &out.join(format!("field_{label}_{re_tag}.csv")),
                &io::field_to_csv(basis, traj, cfg.field_stride)?,
            )?;
            Ok(())
        };
        write("ror", &ror)?;
        if let Ok(gp) = gp_trajectory(basis, nu, gp_env.r, &times) {
            write("gp", &gp)?;
        }
        for (mode, trained) in models {
            let Some(row) = report.row(mode.name()) else { continue };
            let Some(k) = representative_index(&row.cells[j].per_seed) else {
                continue;
            };
            let m = &trained[k];
            let (_, outcome) = policy_rmse(&m.agent, &m.env, nu, basis.clone())?;
            write(&mode.name().to_ascii_lowercase(), &outcome.trajectory)?;
        }
    }
    Ok(report)
}

pub fn reproduce_table1(cfg: &ExperimentConfig) -> Result<()> {
    let out = PathBuf::from(&cfg.out_dir);
    let problem = cfg.problem.build()?;
    io::write_basis(&out.join("pod"), &problem.basis, problem.config.nu_train)?;
    fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg)?)?;

    let mut models = Vec::new();
    for &mode in &cfg.modes {
        let mut trained = Vec::new();
        for &seed in &cfg.seeds {
            let dir = out.join(mode.name().to_ascii_lowercase()).join(format!("seed_{seed}"));
            trained.push(train_on(&problem, cfg, mode, seed, &dir, false)?);
        }
        models.push((mode, trained));
    }
    let report = write_evaluation(&problem.basis, &problem.config, cfg, &models, &cfg.eval_reynolds, &out)?;
    print!("{}", report.to_text());
    Ok(())
}
