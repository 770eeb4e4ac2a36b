//! Browser bindings for the interactive demo in `www/`.
//!
//! Three operations are exposed: sampling the exact Burgers solution,
//! inspecting the POD basis, and running a closure ROM with a constant
//! eddy viscosity against the GP model and the true projection.

use std::sync::Arc;

use romclosure::eval::{gp_trajectory, rmse_field, true_projection_trajectory};
use romclosure::fom_data::{exact_field, generate_snapshots, Grid, TimeMesh};
use romclosure::galerkin::{build_tensors, integrate_closure, Trajectory};
use romclosure::pod::{compute_pod, PodBasis};
use wasm_bindgen::prelude::*;

fn js_err(e: impl ToString) -> JsError {
    JsError::new(&e.to_string())
}

/// `u(x_i, t)` on `n_points` uniform points of [0, 1].
#[wasm_bindgen]
pub fn burgers_field(n_points: usize, t: f64, reynolds: f64) -> Result<Vec<f64>, JsError> {
    let grid = Grid::unit(n_points).map_err(js_err)?;
    exact_field(&grid, t, 1.0 / reynolds).map_err(js_err)
}

/// POD basis extracted from training snapshots.
#[wasm_bindgen]
pub struct Demo {
    basis: Arc<PodBasis>,
    times: TimeMesh,
}

/// Closure ROM, GP and true projection at one Reynolds number.
#[wasm_bindgen]
pub struct Comparison {
    basis: Arc<PodBasis>,
    ror: Trajectory,
    gp: Trajectory,
    closure: Option<Trajectory>,
    rmse_gp: f64,
    rmse_closure: f64,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n_points: usize, n_snapshots: usize, re_train: f64, r: usize, r_total: usize) -> Result<Demo, JsError> {
        let grid = Grid::unit(n_points).map_err(js_err)?;
        let times = TimeMesh::unit(n_snapshots).map_err(js_err)?;
        let snaps = generate_snapshots(&grid, &times, 1.0 / re_train).map_err(js_err)?;
        let basis = compute_pod(&snaps, r, r_total).map_err(js_err)?;
        Ok(Demo {
            basis: Arc::new(basis),
            times,
        })
    }

    pub fn n_points(&self) -> usize {
        self.basis.grid.n_points
    }

    pub fn n_snapshots(&self) -> usize {
        self.times.n_snapshots
    }

    pub fn r(&self) -> usize {
        self.basis.r_resolved
    }

    pub fn r_total(&self) -> usize {
        self.basis.r_total
    }

    /// RIC in percent for k = 1..=rank.
    pub fn ric(&self) -> Vec<f64> {
        self.basis.ric_curve()
    }

    /// Mode `k` (1-based) sampled on the grid.
    pub fn mode(&self, k: usize) -> Result<Vec<f64>, JsError> {
        self.mode_values(k).map_err(js_err)
    }

    /// Runs the R-mode ROM with constant `eta_over_nu · ν` on every mode.
    pub fn compare(&self, reynolds: f64, eta_over_nu: f64) -> Result<Comparison, JsError> {
        compare(self.basis.clone(), &self.times, reynolds, eta_over_nu).map_err(js_err)
    }
}

impl Demo {
    fn mode_values(&self, k: usize) -> Result<Vec<f64>, String> {
        if k == 0 || k > self.basis.r_total {
            return Err(format!("mode index {k} outside 1..={}", self.basis.r_total));
        }
        Ok(self.basis.mode(k - 1).to_vec())
    }
}

fn compare(basis: Arc<PodBasis>, times: &TimeMesh, reynolds: f64, eta_over_nu: f64) -> romclosure::Result<Comparison> {
    let nu = 1.0 / reynolds;
    let r = basis.r_resolved;
    let ror = true_projection_trajectory(nu, &basis, times, r)?;
    let gp = gp_trajectory(&basis, nu, r, times)?;
    let rmse_gp = rmse_field(&gp, &ror, &basis)?;
    let tensors = build_tensors(&basis, nu, r)?;
    let eta = vec![eta_over_nu * nu; r];
    let (closure, rmse_closure) =
        match integrate_closure(&tensors, &eta, &ror.states[0], times.dt(), times.n_snapshots - 1) {
            Ok(t) => {
                let e = rmse_field(&t, &ror, &basis)?;
                (Some(t), e)
            }
            Err(romclosure::Error::Divergence { .. }) => (None, f64::INFINITY),
            Err(e) => return Err(e),
        };
    Ok(Comparison {
        basis,
        ror,
        gp,
        closure,
        rmse_gp,
        rmse_closure,
    })
}

#[wasm_bindgen]
impl Comparison {
    pub fn rmse_gp(&self) -> f64 {
        self.rmse_gp
    }

    /// Infinite when the closure ROM blew up.
    pub fn rmse_closure(&self) -> f64 {
        self.rmse_closure
    }

    /// Reconstructed field of `which` ("ror", "gp" or "closure") at instant `j`.
    pub fn field(&self, which: &str, j: usize) -> Result<Vec<f64>, JsError> {
        self.field_values(which, j).map_err(js_err)
    }

    /// Time series of coefficient `k` (1-based).
    pub fn coefficient(&self, which: &str, k: usize) -> Result<Vec<f64>, JsError> {
        self.coefficient_values(which, k).map_err(js_err)
    }
}

impl Comparison {
    fn pick(&self, which: &str) -> Result<&Trajectory, String> {
        match which {
            "ror" => Ok(&self.ror),
            "gp" => Ok(&self.gp),
            "closure" => self.closure.as_ref().ok_or_else(|| "closure ROM diverged".to_string()),
            other => Err(format!("unknown model '{other}'")),
        }
    }

    fn field_values(&self, which: &str, j: usize) -> Result<Vec<f64>, String> {
        let traj = self.pick(which)?;
        let state = traj.states.get(j).ok_or("time index out of range")?;
        self.basis.reconstruct(state).map_err(|e| e.to_string())
    }

    fn coefficient_values(&self, which: &str, k: usize) -> Result<Vec<f64>, String> {
        let traj = self.pick(which)?;
        if k == 0 || k > traj.modes() {
            return Err("coefficient index out of range".into());
        }
        Ok(traj.states.iter().map(|s| s[k - 1]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> Demo {
        let grid = Grid::unit(128).unwrap();
        let times = TimeMesh::unit(41).unwrap();
        let snaps = generate_snapshots(&grid, &times, 1e-3).unwrap();
        Demo {
            basis: Arc::new(compute_pod(&snaps, 4, 8).unwrap()),
            times,
        }
    }

    #[test]
    fn exact_field_has_zero_boundaries() {
        let u = exact_field(&Grid::unit(65).unwrap(), 0.3, 1e-3).unwrap();
        assert_eq!(u.len(), 65);
        assert_eq!(u[0], 0.0);
        assert!(u[64].abs() < 1e-12);
        assert!(u.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn basis_queries() {
        let d = demo();
        let ric = d.ric();
        assert!(ric.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert_eq!(d.mode_values(1).unwrap().len(), 128);
        assert!(d.mode_values(0).is_err() && d.mode_values(9).is_err());
    }

    #[test]
    fn zero_eta_reproduces_gp() {
        let d = demo();
        let c = compare(d.basis.clone(), &d.times, 1500.0, 0.0).unwrap();
        assert_eq!(c.rmse_closure, c.rmse_gp);
        let mild = compare(d.basis.clone(), &d.times, 1500.0, 0.5).unwrap();
        assert!(mild.rmse_closure < mild.rmse_gp);
        assert_eq!(mild.coefficient_values("ror", 1).unwrap().len(), 41);
        assert_eq!(mild.field_values("closure", 40).unwrap().len(), 128);
        assert!(mild.field_values("les", 0).is_err());
    }
}
