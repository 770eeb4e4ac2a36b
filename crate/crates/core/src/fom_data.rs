//! Full-order Burgers data.
//!
//! The viscous Burgers problem on `x ∈ [0, 1]` used here has a closed form
//! solution, so "high fidelity" snapshots are produced by direct evaluation
//! rather than by a PDE solver.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Vertex-centered uniform grid, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 3 {
            return Err(domain(format!("grid needs at least 3 points, got {n_points}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(domain(format!("invalid grid extent [{x_min}, {x_max}]")));
        }
        Ok(Self { n_points, x_min, x_max })
    }

    /// The unit interval with `n_points` vertices.
    pub fn unit(n_points: usize) -> Result<Self> {
        Self::new(n_points, 0.0, 1.0)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }
}

/// Uniform snapshot instants `t_min = t_0 < ... < t_{n-1} = t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    pub n_snapshots: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl TimeMesh {
    pub fn new(n_snapshots: usize, t_min: f64, t_max: f64) -> Result<Self> {
        if n_snapshots < 2 {
            return Err(domain(format!(
                "time mesh needs at least 2 snapshots, got {n_snapshots}"
            )));
        }
        if !(t_min.is_finite() && t_max.is_finite() && t_max > t_min) {
            return Err(domain(format!("invalid time interval [{t_min}, {t_max}]")));
        }
        Ok(Self {
            n_snapshots,
            t_min,
            t_max,
        })
    }

    pub fn unit(n_snapshots: usize) -> Result<Self> {
        Self::new(n_snapshots, 0.0, 1.0)
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_snapshots - 1) as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_snapshots).map(|j| self.t(j)).collect()
    }
}

/// Velocity snapshots, one column per time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub grid: Grid,
    pub times: TimeMesh,
    /// `n_points × n_snapshots`
    pub values: DMatrix<f64>,
    pub nu: f64,
}

impl SnapshotSet {
    pub fn reynolds(&self) -> f64 {
        1.0 / self.nu
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.grid.n_points;
        &self.values.as_slice()[j * n..(j + 1) * n]
    }
}

/// Closed-form Burgers velocity.
///
/// The textbook form carries `t0 = exp(1/(8 nu))`, which overflows for
/// `nu ≲ 0.0016`. The same expression is evaluated here as
/// `x/(t+1) / (1 + exp(E))` with
/// `E = x²/(4 nu (t+1)) + ln(t+1)/2 − 1/(16 nu)`.
pub fn exact_solution(x: f64, t: f64, nu: f64) -> Result<f64> {
    if !(x.is_finite() && t.is_finite() && nu.is_finite()) {
        return Err(domain(format!("non-finite input (x={x}, t={t}, nu={nu})")));
    }
    if nu <= 0.0 {
        return Err(domain(format!("viscosity must be positive, got {nu}")));
    }
    if t < 0.0 {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    Ok(burgers(x, t, nu))
}

#[inline]
fn burgers(x: f64, t: f64, nu: f64) -> f64 {
    let tp1 = t + 1.0;
    let e = x * x / (4.0 * nu * tp1) + 0.5 * tp1.ln() - 1.0 / (16.0 * nu);
    (x / tp1) / (1.0 + e.exp())
}

/// Field `u(·, t; nu)` sampled on `grid`.
pub fn exact_field(grid: &Grid, t: f64, nu: f64) -> Result<Vec<f64>> {
    exact_solution(grid.x_min, t, nu)?;
    Ok((0..grid.n_points).map(|i| burgers(grid.x(i), t, nu)).collect())
}

pub fn generate_snapshots(grid: &Grid, times: &TimeMesh, nu: f64) -> Result<SnapshotSet> {
    exact_solution(grid.x_min, times.t_min, nu)?;
    let n = grid.n_points;
    let mut values = DMatrix::zeros(n, times.n_snapshots);
    values
        .as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, col)| {
            let t = times.t(j);
            for (i, v) in col.iter_mut().enumerate() {
                *v = burgers(grid.x(i), t, nu);
            }
        });
    Ok(SnapshotSet {
        grid: *grid,
        times: *times,
        values,
        nu,
    })
}

/// Discrete L² inner product `Σ f_i g_i dx` (uniform rectangle rule).
pub fn inner_product(f: &[f64], g: &[f64], grid: &Grid) -> Result<f64> {
    if f.len() != grid.n_points || g.len() != grid.n_points {
        return Err(domain(format!(
            "inner product length mismatch: {} and {} on a grid of {}",
            f.len(),
            g.len(),
            grid.n_points
        )));
    }
    Ok(dot(f, g) * grid.dx())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
