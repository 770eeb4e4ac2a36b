//! Proper orthogonal decomposition of snapshot data.
//!
//! Modes are orthonormal under the weighted inner product of
//! [`fom_data::inner_product`](crate::fom_data::inner_product), i.e. the unit
//! Euclidean singular vectors rescaled by `1/sqrt(dx)`. No mean field is
//! subtracted.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::fom_data::{dot, Grid, SnapshotSet};

#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    pub grid: Grid,
    /// `n_points × r_total`, column `k` is mode `k+1`.
    pub modes: DMatrix<f64>,
    /// Full spectrum of the snapshot matrix, non-increasing.
    pub singular_values: Vec<f64>,
    /// Number of resolved modes (`R`).
    pub r_resolved: usize,
    /// Resolved plus test-scale modes (`R̃`).
    pub r_total: usize,
}

impl PodBasis {
    /// Assembles a basis from precomputed parts (file input, analytic bases).
    pub fn from_parts(
        grid: Grid,
        modes: DMatrix<f64>,
        singular_values: Vec<f64>,
        r_resolved: usize,
        r_total: usize,
    ) -> Result<Self> {
        if modes.nrows() != grid.n_points || modes.ncols() != r_total {
            return Err(domain(format!(
                "mode matrix is {}x{}, expected {}x{}",
                modes.nrows(),
                modes.ncols(),
                grid.n_points,
                r_total
            )));
        }
        if r_resolved == 0 || r_resolved >= r_total {
            return Err(domain(format!("need 1 <= r ({r_resolved}) < r_total ({r_total})")));
        }
        if singular_values.windows(2).any(|w| w[1] > w[0]) || singular_values.iter().any(|s| *s < 0.0) {
            return Err(domain("singular values must be non-negative and non-increasing"));
        }
        Ok(Self {
            grid,
            modes,
            singular_values,
            r_resolved,
            r_total,
        })
    }

    /// Mode `k` (zero-based) as a grid field.
    pub fn mode(&self, k: usize) -> &[f64] {
        let n = self.grid.n_points;
        &self.modes.as_slice()[k * n..(k + 1) * n]
    }

    /// Gram matrix `⟨ψ_i, ψ_j⟩` of the stored modes.
    pub fn gram(&self) -> DMatrix<f64> {
        self.modes.transpose() * &self.modes * self.grid.dx()
    }

    /// `max |⟨ψ_i, ψ_j⟩ − δ_ij|` over all stored modes.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - delta).abs());
            }
        }
        worst
    }

    /// Energy fraction (percent) captured by the leading `k` modes.
    pub fn ric(&self, k: usize) -> Result<f64> {
        ric(&self.singular_values, k)
    }

    /// Full RIC curve, entry `k-1` is `ric(k)`.
    pub fn ric_curve(&self) -> Vec<f64> {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        let mut acc = 0.0;
        self.singular_values
            .iter()
            .map(|s| {
                acc += s * s;
                if total > 0.0 {
                    100.0 * acc / total
                } else {
                    100.0
                }
            })
            .collect()
    }

    pub fn project(&self, field: &[f64], k_max: usize) -> Result<Vec<f64>> {
        if field.len() != self.grid.n_points {
            return Err(domain(format!(
                "field has {} points, basis grid has {}",
                field.len(),
                self.grid.n_points
            )));
        }
        if k_max > self.r_total {
            return Err(domain(format!("k_max {k_max} exceeds r_total {}", self.r_total)));
        }
        let dx = self.grid.dx();
        Ok((0..k_max).map(|k| dot(field, self.mode(k)) * dx).collect())
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() > self.r_total {
            return Err(domain(format!(
                "{} coefficients for a basis of {} modes",
                coeffs.len(),
                self.r_total
            )));
        }
        let mut field = vec![0.0; self.grid.n_points];
        for (k, &a) in coeffs.iter().enumerate() {
            if a != 0.0 {
                for (f, p) in field.iter_mut().zip(self.mode(k)) {
                    *f += a * p;
                }
            }
        }
        Ok(field)
    }
}

/// `100 · Σ_{i≤k} σ_i² / Σ_i σ_i²`.
pub fn ric(singular_values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > singular_values.len() {
        return Err(domain(format!("RIC index {k} outside 1..={}", singular_values.len())));
    }
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Ok(100.0);
    }
    let head: f64 = singular_values[..k].iter().map(|s| s * s).sum();
    Ok(100.0 * head / total)
}

/// Leading left singular vectors of the snapshot matrix.
///
/// Each mode is flipped so that its largest-magnitude entry is positive.
pub fn compute_pod(snapshots: &SnapshotSet, r_resolved: usize, r_total: usize) -> Result<PodBasis> {
    let m = snapshots.times.n_snapshots;
    if r_resolved == 0 || r_resolved >= r_total || r_total > m {
        return Err(domain(format!(
            "need 1 <= r ({r_resolved}) < r_total ({r_total}) <= n_snapshots ({m})"
        )));
    }
    let grid = snapshots.grid;
    let svd = snapshots.values.clone().svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| domain("SVD failed to produce left singular vectors"))?;

    // nalgebra does not guarantee ordering
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let smax = singular_values.first().copied().unwrap_or(0.0);
    let tol = smax * f64::EPSILON * (grid.n_points.max(m) as f64);
    let rank = singular_values.iter().filter(|&&s| s > tol).count();
    if rank < r_total {
        return Err(Error::RankDeficient {
            achievable: rank,
            requested: r_total,
        });
    }

    let scale = 1.0 / grid.dx().sqrt();
    let mut modes = DMatrix::zeros(grid.n_points, r_total);
    for (k, &src) in order.iter().take(r_total).enumerate() {
        let mut col: DVector<f64> = u.column(src).into_owned() * scale;
        let peak = col
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if peak < 0.0 {
            col.neg_mut();
        }
        modes.set_column(k, &col);
    }
    PodBasis::from_parts(grid, modes, singular_values, r_resolved, r_total)
}
