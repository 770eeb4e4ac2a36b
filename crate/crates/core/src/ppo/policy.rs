//! Tanh-squashed diagonal Gaussian policy and the actor-critic pair.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, MlpCache};
use crate::error::{domain, Result};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `a = tanh(z)`, `z ~ N(μ(s), diag(exp(log_std))²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicy {
    pub mean_net: Mlp,
    pub log_std: Vec<f64>,
}

/// One draw from the policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    /// Gaussian draw before squashing.
    pub pre_tanh: Vec<f64>,
    /// Action handed to the environment, in `(-1, 1)`.
    pub action: Vec<f64>,
    /// Log-density of `action`, including the tanh Jacobian.
    pub log_prob: f64,
}

/// `ln(1 − tanh²z)` without cancellation for large `|z|`.
pub fn log_tanh_jacobian(z: f64) -> f64 {
    let a = z.abs();
    2.0 * (std::f64::consts::LN_2 - a - softplus(-2.0 * a))
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

impl GaussianPolicy {
    pub fn new(mean_net: Mlp, log_std: Vec<f64>) -> Result<Self> {
        if log_std.len() != mean_net.output_dim() {
            return Err(domain(format!(
                "{} log-std entries for {} action dimensions",
                log_std.len(),
                mean_net.output_dim()
            )));
        }
        let mut p = Self { mean_net, log_std };
        p.clamp_log_std();
        Ok(p)
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn clamp_log_std(&mut self) {
        for v in &mut self.log_std {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    pub fn mean(&self, obs: &[f64]) -> Vec<f64> {
        self.mean_net.forward(obs)
    }

    /// Deterministic action `tanh(μ(s))`.
    pub fn mean_action(&self, obs: &[f64]) -> Vec<f64> {
        self.mean(obs).into_iter().map(f64::tanh).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> PolicySample {
        let mu = self.mean(obs);
        let pre_tanh: Vec<f64> = mu
            .iter()
            .zip(&self.log_std)
            .map(|(m, ls)| {
                let eps: f64 = StandardNormal.sample(rng);
                m + ls.exp() * eps
            })
            .collect();
        let log_prob = self.log_prob_with_mean(&mu, &pre_tanh);
        let action = pre_tanh.iter().map(|z| z.tanh()).collect();
        PolicySample {
            pre_tanh,
            action,
            log_prob,
        }
    }

    /// Log-density of the squashed action whose Gaussian pre-image is `pre_tanh`.
    pub fn log_prob(&self, obs: &[f64], pre_tanh: &[f64]) -> f64 {
        self.log_prob_with_mean(&self.mean(obs), pre_tanh)
    }

    fn log_prob_with_mean(&self, mu: &[f64], pre_tanh: &[f64]) -> f64 {
        gaussian_log_prob(mu, &self.log_std, pre_tanh) - pre_tanh.iter().map(|&z| log_tanh_jacobian(z)).sum::<f64>()
    }

    /// Differential entropy of the unsquashed Gaussian.
    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|ls| 0.5 + HALF_LN_2PI + ls).sum()
    }
}

pub fn gaussian_log_prob(mu: &[f64], log_std: &[f64], z: &[f64]) -> f64 {
    mu.iter()
        .zip(log_std)
        .zip(z)
        .map(|((m, ls), x)| {
            let u = (x - m) * (-ls).exp();
            -0.5 * u * u - ls - HALF_LN_2PI
        })
        .sum()
}

/// Policy plus state-value network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    pub policy: GaussianPolicy,
    pub critic: Mlp,
}

impl ActorCritic {
    /// Fresh networks `obs → hidden… → out`. Actor output weights start
    /// small so the initial policy mean is near zero.
    pub fn random<R: Rng + ?Sized>(
        obs_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        init_log_std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend_from_slice(hidden);
        actor_sizes.push(action_dim);
        let mut critic_sizes = actor_sizes.clone();
        *critic_sizes.last_mut().unwrap() = 1;
        let mean_net = Mlp::random(&actor_sizes, 0.01, rng)?;
        let critic = Mlp::random(&critic_sizes, 1.0, rng)?;
        let policy = GaussianPolicy::new(mean_net, vec![init_log_std; action_dim])?;
        Ok(Self { policy, critic })
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        value_estimate(&self.critic, obs)
    }

    /// Number of actor parameters (mean network plus log-std).
    pub fn n_actor_params(&self) -> usize {
        self.policy.mean_net.n_params() + self.policy.log_std.len()
    }
}

pub fn value_estimate(critic: &Mlp, obs: &[f64]) -> f64 {
    critic.forward(obs)[0]
}

/// Mean and gradient bookkeeping for one policy evaluation.
pub(crate) struct PolicyEval {
    pub cache: MlpCache,
    pub log_prob: f64,
}

impl GaussianPolicy {
    pub(crate) fn eval(&self, obs: &[f64], pre_tanh: &[f64], cache: MlpCache) -> PolicyEval {
        let mut cache = cache;
        self.mean_net.forward_cached(obs, &mut cache);
        let log_prob = self.log_prob_with_mean(cache.output(), pre_tanh);
        PolicyEval { cache, log_prob }
    }

    /// Accumulates `scale · ∂ log π / ∂θ` into `grad` (mean net params,
    /// then log-std).
    pub(crate) fn backward_log_prob(&self, ev: &PolicyEval, pre_tanh: &[f64], scale: f64, grad: &mut [f64]) {
        let n_net = self.mean_net.n_params();
        let mu = ev.cache.output();
        let mut d_mu = vec![0.0; mu.len()];
        for (d, ((m, ls), z)) in mu.iter().zip(&self.log_std).zip(pre_tanh).enumerate() {
            let inv_var = (-2.0 * ls).exp();
            let diff = z - m;
            d_mu[d] = scale * diff * inv_var;
            grad[n_net + d] += scale * (diff * diff * inv_var - 1.0);
        }
        self.mean_net.backward(&ev.cache, &d_mu, &mut grad[..n_net]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn policy(log_std: f64) -> GaussianPolicy {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::random(&[3, 8, 2], 1.0, &mut rng).unwrap();
        GaussianPolicy::new(net, vec![log_std; 2]).unwrap()
    }

    #[test]
    fn near_deterministic_policy_stays_at_mean() {
        // σ = e⁻⁵ ≈ 6.7e-3; tanh is 1-Lipschitz so |a − tanh μ| ≤ |z − μ| < 3σ w.p. 0.997
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = GaussianPolicy::new(Mlp::random(&[3, 8, 1], 1.0, &mut rng).unwrap(), vec![-5.0]).unwrap();
        let obs = [0.2, -0.1, 0.5];
        let target = p.mean_action(&obs)[0];
        let tol = 3.0 * (-5.0f64).exp();
        let hits = (0..1000)
            .filter(|_| (p.sample(&obs, &mut rng).action[0] - target).abs() < tol)
            .count();
        assert!(hits > 990, "{hits}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = policy(0.0);
        let obs = [1.0, 0.0, -1.0];
        let a = p.sample(&obs, &mut ChaCha8Rng::seed_from_u64(77));
        let b = p.sample(&obs, &mut ChaCha8Rng::seed_from_u64(77));
        assert_eq!(a, b);
    }

    #[test]
    fn log_prob_matches_hand_density() {
        let p = policy(-0.3);
        let obs = [0.3, 0.3, -0.9];
        let s = p.sample(&obs, &mut ChaCha8Rng::seed_from_u64(5));
        let mu = p.mean(&obs);
        let sigma = (-0.3f64).exp();
        let mut want = 0.0;
        for d in 0..2 {
            let a = s.action[d];
            let z = a.atanh();
            let gauss =
                (-(z - mu[d]).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            // density of a = tanh(z): p(z) / (1 - a²)
            want += (gauss / (1.0 - a * a)).ln();
        }
        assert!((s.log_prob - want).abs() < 1e-10, "{} vs {want}", s.log_prob);
        assert!((p.log_prob(&obs, &s.pre_tanh) - s.log_prob).abs() < 1e-15);
    }

    #[test]
    fn jacobian_term_is_stable() {
        for z in [0.0f64, 0.5, -3.0, 20.0, -400.0] {
            let naive = (1.0 - z.tanh().powi(2)).ln();
            let stable = log_tanh_jacobian(z);
            if naive.is_finite() {
                assert!((naive - stable).abs() < 1e-9 * naive.abs().max(1.0), "{z}");
            }
            assert!(stable.is_finite());
        }
    }

    #[test]
    fn log_std_is_clamped() {
        let net = Mlp::zeros(&[1, 1]).unwrap();
        let p = GaussianPolicy::new(net, vec![-9.0]).unwrap();
        assert_eq!(p.log_std, vec![LOG_STD_MIN]);
        assert!(GaussianPolicy::new(Mlp::zeros(&[1, 2]).unwrap(), vec![0.0]).is_err());
    }
}
