use std::sync::Arc;

use romclosure::config::ProblemConfig;
use romclosure::env::{ClosureEnv, ClosureMode, EnvConfig};
use romclosure::eval::{make_table, policy_rmse, TrainedModel};
use romclosure::galerkin::{build_tensors, integrate_gp};
use romclosure::io;
use romclosure::ppo::{self, Checkpoint, PpoConfig};

fn small_problem() -> ProblemConfig {
    ProblemConfig {
        n_points: 256,
        n_snapshots: 101,
        nu_train: 1e-3,
        r: 4,
        r_total: 8,
    }
}

#[test]
fn train_save_load_evaluate() {
    let problem = small_problem().build().unwrap();
    let env_cfg = problem
        .config
        .env_config(ClosureMode::Mmrl, &EnvConfig::default())
        .unwrap();
    let ppo_cfg = PpoConfig {
        total_updates: 3,
        episodes_per_update: 2,
        ..PpoConfig::default()
    };
    let make_env = || ClosureEnv::new(env_cfg.clone(), 1e-3, problem.basis.clone(), Some(&problem.snapshots));
    let mut seen = Vec::new();
    let report = ppo::train(make_env, &ppo_cfg, |p| {
        seen.push(p.update);
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, vec![0, 1, 2]);
    assert_eq!(report.history.len(), 6);
    assert!(report.history.iter().all(|h| h.episode_reward < 0.0 && h.steps == 100));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.ckpt");
    Checkpoint::new(
        &report.agent,
        &ppo_cfg,
        3,
        Some(env_cfg.clone()),
        Some(problem.config.clone()),
    )
    .save(&path)
    .unwrap();
    let back = Checkpoint::load(&path).unwrap();
    assert_eq!(back.header.update, 3);
    assert_eq!(back.header.env.as_ref().unwrap(), &env_cfg);

    let before = policy_rmse(&report.agent, &env_cfg, 1.0 / 1500.0, problem.basis.clone())
        .unwrap()
        .0;
    let after = policy_rmse(&back.agent, &env_cfg, 1.0 / 1500.0, problem.basis.clone())
        .unwrap()
        .0;
    assert_eq!(before.to_bits(), after.to_bits());

    let models = vec![
        (ClosureMode::Lmrl, vec![]),
        (
            ClosureMode::Mmrl,
            vec![TrainedModel {
                seed: 0,
                agent: back.agent,
                env: env_cfg.clone(),
            }],
        ),
    ];
    let report = make_table(problem.basis.clone(), &env_cfg, &models, &[1200.0, 2000.0]).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.absent, vec!["LMRL".to_string()]);
    let gp = report.row("GP").unwrap();
    assert!(gp.cells[0].mean < gp.cells[1].mean);
    assert_eq!(report.row("MMRL").unwrap().cells[1].two_std, 0.0);
    assert_eq!(report.to_csv().lines().count(), 1 + 2 * 2);
    assert!(report.to_text().contains("LMRL: no checkpoints found"));
}

#[test]
fn basis_file_reproduces_rom() {
    let problem = small_problem().build().unwrap();
    let dir = tempfile::tempdir().unwrap();
    io::write_basis(dir.path(), &problem.basis, 1e-3).unwrap();
    let (basis, nu) = io::read_basis(&dir.path().join("basis.csv")).unwrap();
    assert_eq!(nu, 1e-3);
    let basis = Arc::new(basis);
    let a = build_tensors(&problem.basis, 1.0 / 1500.0, 4).unwrap();
    let b = build_tensors(&basis, 1.0 / 1500.0, 4).unwrap();
    assert_eq!(a, b);
    let alpha0 = vec![0.1, -0.05, 0.02, 0.0];
    assert_eq!(
        integrate_gp(&a, &alpha0, 0.01, 100).unwrap(),
        integrate_gp(&b, &alpha0, 0.01, 100).unwrap()
    );
}

#[test]
fn vms_training_runs_without_snapshots() {
    let problem = small_problem().build().unwrap();
    let env_cfg = problem
        .config
        .env_config(ClosureMode::Vmrl, &EnvConfig::default())
        .unwrap();
    let ppo_cfg = PpoConfig {
        total_updates: 2,
        episodes_per_update: 2,
        ..PpoConfig::default()
    };
    let make_env = || ClosureEnv::new(env_cfg.clone(), 1e-3, problem.basis.clone(), None);
    let report = ppo::train(make_env, &ppo_cfg, |_| Ok(())).unwrap();
    for h in &report.history {
        assert_eq!(h.episode_reward % 10.0, 0.0);
        assert!(h.episode_reward.abs() <= 10.0 * h.steps as f64);
    }
}
