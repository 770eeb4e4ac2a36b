//! Galerkin reduced order models of Burgers flow.
//!
//! For modes `ψ_k` the projected dynamics read
//!
//! ```text
//! dα_k/dt = Σ_i L[k][i] α_i + Σ_ij N[k][i][j] α_i α_j + Σ_i η_k B[k][i] α_i
//! ```
//!
//! with `L = ν B`, `B[k][i] = ⟨ψ_i'', ψ_k⟩` and `N[k][i][j] = ⟨−ψ_i ψ_j', ψ_k⟩`.
//! The last term is the modal eddy-viscosity closure; it vanishes for the
//! plain GP model.

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::fom_data::{dot, Grid};
use crate::pod::PodBasis;

/// States whose sup-norm exceeds this are treated as blown up.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

/// Second-order finite-difference `f''`, one-sided four-point stencils at
/// the two boundaries.
pub fn second_derivative(f: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let n = f.len();
    if n != grid.n_points {
        return Err(domain(format!("field has {n} points, grid has {}", grid.n_points)));
    }
    if n < 5 {
        return Err(domain(format!("second derivative needs at least 5 points, got {n}")));
    }
    let inv = 1.0 / (grid.dx() * grid.dx());
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv;
    }
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
    Ok(out)
}

/// Second-order finite-difference `f'`: central inside, one-sided at the ends.
pub fn first_derivative(f: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let n = f.len();
    if n != grid.n_points {
        return Err(domain(format!("field has {n} points, grid has {}", grid.n_points)));
    }
    if n < 3 {
        return Err(domain(format!("first derivative needs at least 3 points, got {n}")));
    }
    let inv = 0.5 / grid.dx();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) * inv;
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv;
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv;
    Ok(out)
}

/// Precomputed Galerkin operators for `r` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct RomTensors {
    pub r: usize,
    pub nu: f64,
    /// `lin[(k, i)] = ν ⟨ψ_i'', ψ_k⟩`
    pub lin: DMatrix<f64>,
    /// `nonlin[(k * r + i) * r + j] = ⟨−ψ_i ψ_j', ψ_k⟩`
    pub nonlin: Vec<f64>,
    /// `closure_kernel[(k, i)] = ⟨ψ_i'', ψ_k⟩`, viscosity free.
    pub closure_kernel: DMatrix<f64>,
}

impl RomTensors {
    pub fn from_parts(nu: f64, closure_kernel: DMatrix<f64>, nonlin: Vec<f64>) -> Result<Self> {
        let r = closure_kernel.nrows();
        if closure_kernel.ncols() != r || nonlin.len() != r * r * r {
            return Err(domain("tensor shapes are inconsistent"));
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(domain(format!("invalid viscosity {nu}")));
        }
        let lin = &closure_kernel * nu;
        Ok(Self {
            r,
            nu,
            lin,
            nonlin,
            closure_kernel,
        })
    }

    #[inline]
    pub fn nonlin_at(&self, k: usize, i: usize, j: usize) -> f64 {
        self.nonlin[(k * self.r + i) * self.r + j]
    }

    /// Same modes, different viscosity.
    pub fn with_viscosity(&self, nu: f64) -> Result<Self> {
        Self::from_parts(nu, self.closure_kernel.clone(), self.nonlin.clone())
    }

    /// Operators of the leading `r` modes. Entries only involve the modes
    /// they index, so this equals building directly with `r` modes.
    pub fn truncated(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.r {
            return Err(domain(format!("cannot truncate {} modes to {r}", self.r)));
        }
        let kernel = self.closure_kernel.view((0, 0), (r, r)).into_owned();
        let mut nonlin = Vec::with_capacity(r * r * r);
        for k in 0..r {
            for i in 0..r {
                for j in 0..r {
                    nonlin.push(self.nonlin_at(k, i, j));
                }
            }
        }
        Self::from_parts(self.nu, kernel, nonlin)
    }

    fn check_len(&self, alpha: &[f64]) -> Result<()> {
        if alpha.len() != self.r {
            return Err(domain(format!(
                "state has {} entries, model has {} modes",
                alpha.len(),
                self.r
            )));
        }
        Ok(())
    }

    /// GP right-hand side written into `out`. Lengths are not checked.
    pub fn gp_into(&self, alpha: &[f64], out: &mut [f64]) {
        let r = self.r;
        for k in 0..r {
            let mut acc = 0.0;
            for i in 0..r {
                acc += self.lin[(k, i)] * alpha[i];
            }
            let block = &self.nonlin[k * r * r..(k + 1) * r * r];
            for i in 0..r {
                if alpha[i] != 0.0 {
                    acc += alpha[i] * dot(&block[i * r..(i + 1) * r], alpha);
                }
            }
            out[k] = acc;
        }
    }

    /// Closure-augmented right-hand side written into `out`.
    pub fn closure_into(&self, alpha: &[f64], eta: &[f64], out: &mut [f64]) {
        self.gp_into(alpha, out);
        for k in 0..self.r {
            if eta[k] != 0.0 {
                let mut acc = 0.0;
                for i in 0..self.r {
                    acc += self.closure_kernel[(k, i)] * alpha[i];
                }
                out[k] += eta[k] * acc;
            }
        }
    }
}

pub fn build_tensors(basis: &PodBasis, nu: f64, r: usize) -> Result<RomTensors> {
    if r == 0 || r > basis.r_total {
        return Err(domain(format!("r = {r} outside 1..={}", basis.r_total)));
    }
    let grid = &basis.grid;
    let dx = grid.dx();
    let d2: Vec<Vec<f64>> = (0..r)
        .map(|i| second_derivative(basis.mode(i), grid))
        .collect::<Result<_>>()?;
    let d1: Vec<Vec<f64>> = (0..r)
        .map(|i| first_derivative(basis.mode(i), grid))
        .collect::<Result<_>>()?;

    let kernel = DMatrix::from_fn(r, r, |k, i| dot(&d2[i], basis.mode(k)) * dx);

    let n = grid.n_points;
    let mut nonlin = vec![0.0; r * r * r];
    let mut prod = vec![0.0; n];
    for i in 0..r {
        let psi_i = basis.mode(i);
        for j in 0..r {
            for (p, (a, b)) in prod.iter_mut().zip(psi_i.iter().zip(&d1[j])) {
                *p = -a * b;
            }
            for k in 0..r {
                nonlin[(k * r + i) * r + j] = dot(&prod, basis.mode(k)) * dx;
            }
        }
    }
    RomTensors::from_parts(nu, kernel, nonlin)
}

/// Base Galerkin model right-hand side.
pub fn rhs_gp(alpha: &[f64], tensors: &RomTensors) -> Result<Vec<f64>> {
    tensors.check_len(alpha)?;
    let mut out = vec![0.0; tensors.r];
    tensors.gp_into(alpha, &mut out);
    Ok(out)
}

/// Galerkin model with modal eddy viscosities `eta`.
pub fn rhs_closure(alpha: &[f64], tensors: &RomTensors, eta: &[f64]) -> Result<Vec<f64>> {
    tensors.check_len(alpha)?;
    if eta.len() != tensors.r {
        return Err(domain(format!(
            "{} eddy viscosities for {} modes",
            eta.len(),
            tensors.r
        )));
    }
    if eta.iter().any(|e| !e.is_finite()) {
        return Err(domain("non-finite eddy viscosity"));
    }
    let mut out = vec![0.0; tensors.r];
    tensors.closure_into(alpha, eta, &mut out);
    Ok(out)
}

/// Test-scale model: the GP system over all `R̃` modes. Its first `R`
/// components define the test state.
pub fn rhs_test(alpha_tilde: &[f64], tensors_tilde: &RomTensors) -> Result<Vec<f64>> {
    rhs_gp(alpha_tilde, tensors_tilde)
}

/// Coefficient history on a uniform time mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One state per entry of `times`.
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    /// Keeps only the leading `r` coefficients of every state.
    pub fn leading(&self, r: usize) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(|s| s[..r.min(s.len())].to_vec()).collect(),
        }
    }
}

/// Reusable classical RK4 stepper.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `state` by `dt` in place.
    pub fn step<F>(&mut self, rhs: &mut F, state: &mut [f64], dt: f64)
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let n = state.len();
        rhs(state, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = state[i] + 0.5 * dt * self.k1[i];
        }
        rhs(&self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = state[i] + 0.5 * dt * self.k2[i];
        }
        rhs(&self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = state[i] + dt * self.k3[i];
        }
        rhs(&self.tmp, &mut self.k4);
        for i in 0..n {
            state[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Fails with the offending sup-norm if any entry is non-finite or the
/// state exceeds [`DIVERGENCE_LIMIT`].
pub fn check_bounded(state: &[f64]) -> std::result::Result<(), f64> {
    let mut norm = 0.0f64;
    for v in state {
        if !v.is_finite() {
            return Err(f64::INFINITY);
        }
        norm = norm.max(v.abs());
    }
    if norm > DIVERGENCE_LIMIT {
        Err(norm)
    } else {
        Ok(())
    }
}

/// Integrates `dα/dt = rhs(α)` with RK4 from `t = 0`. The returned
/// trajectory has `n_steps + 1` states including `alpha0`.
pub fn integrate<F>(mut rhs: F, alpha0: &[f64], dt: f64, n_steps: usize) -> Result<Trajectory>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain(format!("time step must be positive, got {dt}")));
    }
    if n_steps == 0 {
        return Err(domain("need at least one step"));
    }
    let mut rk = Rk4::new(alpha0.len());
    let mut state = alpha0.to_vec();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    states.push(state.clone());
    for step in 1..=n_steps {
        rk.step(&mut rhs, &mut state, dt);
        check_bounded(&state).map_err(|norm| Error::Divergence { step, norm })?;
        times.push(step as f64 * dt);
        states.push(state.clone());
    }
    Ok(Trajectory { times, states })
}

/// Plain GP rollout from `alpha0` using all modes of `tensors`.
pub fn integrate_gp(tensors: &RomTensors, alpha0: &[f64], dt: f64, n_steps: usize) -> Result<Trajectory> {
    tensors.check_len(alpha0)?;
    integrate(|a, out| tensors.gp_into(a, out), alpha0, dt, n_steps)
}

/// Closure-ROM rollout with time-independent modal viscosities.
pub fn integrate_closure(
    tensors: &RomTensors,
    eta: &[f64],
    alpha0: &[f64],
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    tensors.check_len(alpha0)?;
    rhs_closure(alpha0, tensors, eta)?;
    integrate(|a, out| tensors.closure_into(a, eta, out), alpha0, dt, n_steps)
}
