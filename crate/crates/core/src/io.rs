//! CSV file formats.
//!
//! Every file starts with `#` comment lines; where a file must be read back,
//! the first comment line carries a JSON header describing its shape.
//! Floats use shortest round-trip formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom_data::{Grid, SnapshotSet, TimeMesh};
use crate::galerkin::Trajectory;
use crate::pod::PodBasis;
use crate::ppo::EpisodeRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SnapshotHeader {
    kind: String,
    nu: f64,
    grid: Grid,
    times: TimeMesh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BasisHeader {
    kind: String,
    nu_train: f64,
    grid: Grid,
    r_resolved: usize,
    r_total: usize,
    singular_values: Vec<f64>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

/// Splits a file into its JSON header and the numeric body rows
/// (comment lines and the column-name line are skipped).
fn parse_table<H: for<'de> Deserialize<'de>>(text: &str, path: &Path, kind: &str) -> Result<(H, Vec<Vec<f64>>)> {
    let fail = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| fail("empty file".into()))?;
    let json = first
        .strip_prefix('#')
        .ok_or_else(|| fail("missing header line".into()))?;
    let value: serde_json::Value = serde_json::from_str(json.trim()).map_err(|e| fail(format!("bad header: {e}")))?;
    if value.get("kind").and_then(|k| k.as_str()) != Some(kind) {
        return Err(fail(format!("not a {kind} file")));
    }
    let header = serde_json::from_value(value).map_err(|e| fail(format!("bad header: {e}")))?;
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| fail(format!("line {}: {e}", n + 2)))?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// One row per grid point: `x, u(x, t_0), …, u(x, t_{M−1})`.
pub fn snapshots_to_csv(s: &SnapshotSet) -> Result<String> {
    let header = SnapshotHeader {
        kind: "snapshots".into(),
        nu: s.nu,
        grid: s.grid,
        times: s.times,
    };
    let mut out = format!("# {}\n", serde_json::to_string(&header)?);
    out.push('x');
    for j in 0..s.times.n_snapshots {
        write!(out, ",t{j}").unwrap();
    }
    out.push('\n');
    for i in 0..s.grid.n_points {
        writeln!(out, "{},{}", s.grid.x(i), join(s.values.row(i).iter().copied())).unwrap();
    }
    Ok(out)
}

pub fn write_snapshots(path: &Path, s: &SnapshotSet) -> Result<()> {
    write_file(path, &snapshots_to_csv(s)?)
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotSet> {
    let text = fs::read_to_string(path)?;
    let (h, rows): (SnapshotHeader, _) = parse_table(&text, path, "snapshots")?;
    let (n, m) = (h.grid.n_points, h.times.n_snapshots);
    check_shape(&rows, n, m + 1, path)?;
    let values = DMatrix::from_fn(n, m, |i, j| rows[i][j + 1]);
    Ok(SnapshotSet {
        grid: Grid::new(n, h.grid.x_min, h.grid.x_max)?,
        times: h.times,
        values,
        nu: h.nu,
    })
}

fn check_shape(rows: &[Vec<f64>], n_rows: usize, n_cols: usize, path: &Path) -> Result<()> {
    if rows.len() != n_rows || rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("expected {n_rows} rows of {n_cols} values"),
        });
    }
    Ok(())
}

/// `x, ψ_1(x), …, ψ_R̃(x)`; the header also stores the singular values.
pub fn basis_to_csv(b: &PodBasis, nu_train: f64) -> Result<String> {
    let header = BasisHeader {
        kind: "pod_basis".into(),
        nu_train,
        grid: b.grid,
        r_resolved: b.r_resolved,
        r_total: b.r_total,
        singular_values: b.singular_values.clone(),
    };
    let mut out = format!("# {}\nx", serde_json::to_string(&header)?);
    for k in 1..=b.r_total {
        write!(out, ",psi_{k}").unwrap();
    }
    out.push('\n');
    for i in 0..b.grid.n_points {
        writeln!(out, "{},{}", b.grid.x(i), join(b.modes.row(i).iter().copied())).unwrap();
    }
    Ok(out)
}

/// `index, singular_value, ric_percent`
pub fn singular_values_to_csv(b: &PodBasis) -> String {
    let mut out = String::from("# POD spectrum\nindex,singular_value,ric_percent\n");
    for (k, (s, ric)) in b.singular_values.iter().zip(b.ric_curve()).enumerate() {
        writeln!(out, "{},{s},{ric}", k + 1).unwrap();
    }
    out
}

/// Writes `basis.csv` and `singular_values.csv` into `dir`.
pub fn write_basis(dir: &Path, b: &PodBasis, nu_train: f64) -> Result<()> {
    write_file(&dir.join("basis.csv"), &basis_to_csv(b, nu_train)?)?;
    write_file(&dir.join("singular_values.csv"), &singular_values_to_csv(b))
}

/// Reads a basis file; returns the basis and its training viscosity.
pub fn read_basis(path: &Path) -> Result<(PodBasis, f64)> {
    let text = fs::read_to_string(path)?;
    let (h, rows): (BasisHeader, _) = parse_table(&text, path, "pod_basis")?;
    let n = h.grid.n_points;
    check_shape(&rows, n, h.r_total + 1, path)?;
    let modes = DMatrix::from_fn(n, h.r_total, |i, k| rows[i][k + 1]);
    let grid = Grid::new(n, h.grid.x_min, h.grid.x_max)?;
    Ok((
        PodBasis::from_parts(grid, modes, h.singular_values, h.r_resolved, h.r_total)?,
        h.nu_train,
    ))
}

/// `t, alpha_1, …, alpha_r`
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for k in 1..=traj.modes() {
        write!(out, ",alpha_{k}").unwrap();
    }
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        writeln!(out, "{t},{}", join(s.iter().copied())).unwrap();
    }
    out
}

/// `t, <label>_1.., ror_1..` for a model trajectory next to the ROR.
pub fn modal_comparison_to_csv(label: &str, traj: &Trajectory, ror: &Trajectory) -> String {
    let mut out = String::from("t");
    for k in 1..=traj.modes() {
        write!(out, ",{label}_{k}").unwrap();
    }
    for k in 1..=ror.modes() {
        write!(out, ",ror_{k}").unwrap();
    }
    out.push('\n');
    for (j, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        let r = ror.states.get(j).map(|v| v.as_slice()).unwrap_or(&[]);
        writeln!(out, "{t},{}", join(s.iter().chain(r).copied())).unwrap();
    }
    out
}

/// Long-format reconstructed field `x, t, u`, every `stride.0`-th grid point
/// and `stride.1`-th instant.
pub fn field_to_csv(basis: &PodBasis, traj: &Trajectory, stride: (usize, usize)) -> Result<String> {
    let mut out = String::from("x,t,u\n");
    for (t, s) in traj.times.iter().zip(&traj.states).step_by(stride.1.max(1)) {
        let u = basis.reconstruct(s)?;
        for i in (0..basis.grid.n_points).step_by(stride.0.max(1)) {
            writeln!(out, "{},{t},{}", basis.grid.x(i), u[i]).unwrap();
        }
    }
    Ok(out)
}

/// `update, episode, episode_reward, moving_avg`
pub fn reward_history_to_csv(history: &[EpisodeRecord]) -> String {
    let mut out = String::from("update,episode,episode_reward,moving_avg\n");
    for h in history {
        writeln!(out, "{},{},{},{}", h.update, h.episode, h.episode_reward, h.moving_avg).unwrap();
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom_data::generate_snapshots;
    use crate::pod::compute_pod;

    #[test]
    fn snapshots_round_trip_bitwise() {
        let s = generate_snapshots(&Grid::unit(33).unwrap(), &TimeMesh::unit(7).unwrap(), 0.01).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshots(&path, &s).unwrap();
        let back = read_snapshots(&path).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!(back.nu, s.nu);
        assert_eq!(back.times, s.times);
    }

    #[test]
    fn basis_round_trip_bitwise() {
        let s = generate_snapshots(&Grid::unit(64).unwrap(), &TimeMesh::unit(20).unwrap(), 0.01).unwrap();
        let b = compute_pod(&s, 2, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_basis(dir.path(), &b, 0.01).unwrap();
        let (back, nu) = read_basis(&dir.path().join("basis.csv")).unwrap();
        assert_eq!(nu, 0.01);
        assert_eq!(back.modes, b.modes);
        assert_eq!(back.singular_values, b.singular_values);
        assert_eq!(back.r_resolved, 2);
        let spectrum = fs::read_to_string(dir.path().join("singular_values.csv")).unwrap();
        assert_eq!(spectrum.lines().count(), 2 + b.singular_values.len());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let s = generate_snapshots(&Grid::unit(8).unwrap(), &TimeMesh::unit(3).unwrap(), 0.1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshots(&path, &s).unwrap();
        assert!(matches!(read_basis(&path), Err(Error::Format { .. })));
        fs::write(&path, "x,t0\n0,1\n").unwrap();
        assert!(read_snapshots(&path).is_err());
    }

    #[test]
    fn trajectory_layout() {
        let traj = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![vec![1.0, 2.0], vec![3.0, 4.5]],
        };
        assert_eq!(trajectory_to_csv(&traj), "t,alpha_1,alpha_2\n0,1,2\n0.5,3,4.5\n");
        let cmp = modal_comparison_to_csv("gp", &traj, &traj);
        assert_eq!(cmp.lines().next().unwrap(), "t,gp_1,gp_2,ror_1,ror_2");
    }
}
