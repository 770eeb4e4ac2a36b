use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn romclosure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_romclosure"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = romclosure(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &str = r#"
seeds = [4]
modes = ["mmrl", "vmrl"]
eval_reynolds = [1500.0]
field_stride = [32, 50]

[problem]
n_points = 128
n_snapshots = 51
r = 4
r_total = 8

[ppo]
total_updates = 2
episodes_per_update = 2
checkpoint_every = 1
"#;

#[test]
fn data_pod_rom_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&[
        "generate-data",
        "--nu",
        "0.001",
        "--n-points",
        "64",
        "--n-snapshots",
        "21",
        "--out",
        p(&d.join("snap.csv")),
    ]);
    let snap = fs::read_to_string(d.join("snap.csv")).unwrap();
    assert!(snap.starts_with("# {\"kind\":\"snapshots\""));
    assert_eq!(snap.lines().count(), 2 + 64);

    ok(&[
        "pod",
        "--data",
        p(&d.join("snap.csv")),
        "--r",
        "3",
        "--r-total",
        "6",
        "--out",
        p(&d.join("pod")),
    ]);
    let spectrum = fs::read_to_string(d.join("pod/singular_values.csv")).unwrap();
    assert!(spectrum
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("index,singular_value,ric_percent"));

    for model in ["gp", "test"] {
        let out = d.join(format!("{model}.csv"));
        ok(&[
            "rom",
            "--basis",
            p(&d.join("pod/basis.csv")),
            "--re",
            "1200",
            "--model",
            model,
            "--n-snapshots",
            "21",
            "--out",
            p(&out),
        ]);
        let text = fs::read_to_string(out).unwrap();
        let width = if model == "gp" { 3 } else { 6 };
        assert_eq!(text.lines().next().unwrap().split(',').count(), 1 + width);
        assert_eq!(text.lines().count(), 1 + 21);
    }
}

#[test]
fn train_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("small.toml"), SMALL).unwrap();
    let cfg = d.join("small.toml");
    ok(&[
        "train",
        "--mode",
        "mmrl",
        "--config",
        p(&cfg),
        "--seed",
        "4",
        "--out-dir",
        p(&d.join("runs/mmrl")),
        "--trace",
    ]);
    for f in [
        "reward_history.csv",
        "policy.ckpt",
        "config.json",
        "checkpoints/update_00001.ckpt",
        "trace/episode_00002.csv",
    ] {
        assert!(d.join("runs/mmrl").join(f).exists(), "{f}");
    }
    let history = fs::read_to_string(d.join("runs/mmrl/reward_history.csv")).unwrap();
    assert_eq!(
        history.lines().next().unwrap(),
        "update,episode,episode_reward,moving_avg"
    );
    assert_eq!(history.lines().count(), 1 + 4);

    // identical seed, identical checkpoint
    ok(&[
        "train",
        "--mode",
        "mmrl",
        "--config",
        p(&cfg),
        "--seed",
        "4",
        "--out-dir",
        p(&d.join("again")),
    ]);
    assert_eq!(
        fs::read(d.join("runs/mmrl/policy.ckpt")).unwrap(),
        fs::read(d.join("again/policy.ckpt")).unwrap()
    );

    let out = ok(&[
        "evaluate",
        "--checkpoints",
        p(&d.join("runs")),
        "--re",
        "1200,2000",
        "--out",
        p(&d.join("eval")),
    ]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("MMRL") && table.contains("VMRL: no checkpoints found"));
    let csv = fs::read_to_string(d.join("eval/rmse_table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    for f in [
        "modal_trajectories_mmrl_1200.csv",
        "field_gp_2000.csv",
        "modal_trajectories_ror_2000.csv",
    ] {
        assert!(d.join("eval").join(f).exists(), "{f}");
    }
    let modal = fs::read_to_string(d.join("eval/modal_trajectories_mmrl_1200.csv")).unwrap();
    assert_eq!(
        modal.lines().next().unwrap(),
        "t,mmrl_1,mmrl_2,mmrl_3,mmrl_4,ror_1,ror_2,ror_3,ror_4"
    );
}

#[test]
fn reproduce_table_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("small.toml"), SMALL).unwrap();
    ok(&[
        "reproduce-table1",
        "--config",
        p(&d.join("small.toml")),
        "--out",
        p(&d.join("t1")),
    ]);
    let csv = fs::read_to_string(d.join("t1/rmse_table.csv")).unwrap();
    let models: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(models, vec!["GP", "MMRL", "VMRL"]);
    assert!(d.join("t1/vmrl/seed_4/policy.ckpt").exists());
    assert!(d.join("t1/pod/basis.csv").exists());
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"ppo": {"clip_epsilon": 2.0}}"#).unwrap();
    let out = romclosure(&[
        "train",
        "--mode",
        "mmrl",
        "--config",
        p(&bad),
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("clip"));

    let out = romclosure(&["train", "--mode", "smagorinsky", "--out-dir", p(dir.path())]);
    assert!(!out.status.success());

    let out = romclosure(&[
        "rom",
        "--basis",
        p(&bad),
        "--re",
        "1000",
        "--out",
        p(&dir.path().join("x.csv")),
    ]);
    assert!(!out.status.success());
}
