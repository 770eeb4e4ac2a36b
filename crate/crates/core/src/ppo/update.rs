use rand::seq::SliceRandom;
use rand::Rng;

use super::adam::{clip_grad_norm, Adam};
use super::buffer::{compute_advantages, normalize_advantages, RolloutBuffer};
use super::mlp::MlpCache;
use super::policy::ActorCritic;
use super::PpoConfig;
use crate::error::{Error, Result};

/// `min(ρA, clip(ρ, 1−ε, 1+ε)A)`
pub fn clipped_surrogate(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    (ratio * advantage).min(clipped * advantage)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossBreakdown {
    /// `policy + value_coef·value − entropy_coef·entropy`
    pub total: f64,
    /// Negated mean clipped surrogate.
    pub policy: f64,
    /// Mean squared value error.
    pub value: f64,
    pub entropy: f64,
    /// Mean of `log π_old − log π_new`.
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Minibatch loss over transitions `idx`; gradients are accumulated into
/// `grad_actor` (mean net, then log-std) and `grad_critic`.
#[allow(clippy::too_many_arguments)]
pub fn minibatch_loss(
    agent: &ActorCritic,
    buffer: &RolloutBuffer,
    advantages: &[f64],
    returns: &[f64],
    idx: &[usize],
    config: &PpoConfig,
    grad_actor: &mut [f64],
    grad_critic: &mut [f64],
) -> LossBreakdown {
    let policy = &agent.policy;
    let n_net = policy.mean_net.n_params();
    let inv_b = 1.0 / idx.len() as f64;
    let eps = config.clip_epsilon;
    let mut out = LossBreakdown::default();
    let mut actor_cache = MlpCache::default();
    let mut critic_cache = MlpCache::default();

    for &i in idx {
        let tr = &buffer.transitions[i];
        let a = advantages[i];

        let ev = policy.eval(&tr.observation, &tr.pre_tanh, std::mem::take(&mut actor_cache));
        let log_ratio = ev.log_prob - tr.log_prob;
        let ratio = log_ratio.exp();
        let surrogate = clipped_surrogate(ratio, a, eps);
        out.policy -= surrogate * inv_b;
        out.approx_kl -= log_ratio * inv_b;
        if (ratio - 1.0).abs() > eps {
            out.clip_fraction += inv_b;
        }
        // gradient flows only through the unclipped branch when it is active
        if ratio * a <= ratio.clamp(1.0 - eps, 1.0 + eps) * a {
            policy.backward_log_prob(&ev, &tr.pre_tanh, -a * ratio * inv_b, grad_actor);
        }
        actor_cache = ev.cache;

        agent.critic.forward_cached(&tr.observation, &mut critic_cache);
        let v = critic_cache.output()[0];
        let err = v - returns[i];
        out.value += err * err * inv_b;
        let dv = config.value_coef * 2.0 * err * inv_b;
        agent.critic.backward(&critic_cache, &[dv], grad_critic);
    }

    out.entropy = policy.entropy();
    for g in &mut grad_actor[n_net..] {
        *g -= config.entropy_coef;
    }
    out.total = out.policy + config.value_coef * out.value - config.entropy_coef * out.entropy;
    out
}

/// Adam state for both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizers {
    actor_net: Adam,
    log_std: Adam,
    critic: Adam,
}

impl Optimizers {
    pub fn new(agent: &ActorCritic, lr: f64) -> Self {
        Self {
            actor_net: Adam::new(agent.policy.mean_net.n_params(), lr),
            log_std: Adam::new(agent.policy.log_std.len(), lr),
            critic: Adam::new(agent.critic.n_params(), lr),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    /// Ratio statistics of the very first minibatch (before any step).
    pub first_ratio_max_dev: f64,
    pub n_minibatches: usize,
}

/// One PPO update: GAE, advantage normalization, then
/// `epochs × minibatches` Adam steps on the clipped objective.
pub fn ppo_update<R: Rng + ?Sized>(
    agent: &mut ActorCritic,
    opt: &mut Optimizers,
    buffer: &RolloutBuffer,
    config: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    let (mut adv, returns) = compute_advantages(buffer, config.gamma, config.gae_lambda)?;
    normalize_advantages(&mut adv);

    let n_net = agent.policy.mean_net.n_params();
    let mut grad_actor = vec![0.0; n_net + agent.policy.log_std.len()];
    let mut grad_critic = vec![0.0; agent.critic.n_params()];
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut stats = UpdateStats::default();

    for epoch in 0..config.epochs_per_update {
        order.shuffle(rng);
        for chunk in order.chunks(config.minibatch_size) {
            if stats.n_minibatches == 0 {
                stats.first_ratio_max_dev = chunk
                    .iter()
                    .map(|&i| {
                        let t = &buffer.transitions[i];
                        (agent.policy.log_prob(&t.observation, &t.pre_tanh) - t.log_prob).exp() - 1.0
                    })
                    .fold(0.0f64, |m, d| m.max(d.abs()));
            }
            grad_actor.fill(0.0);
            grad_critic.fill(0.0);
            let loss = minibatch_loss(
                agent,
                buffer,
                &adv,
                &returns,
                chunk,
                config,
                &mut grad_actor,
                &mut grad_critic,
            );
            if !loss.total.is_finite() || grad_actor.iter().chain(&grad_critic).any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch });
            }
            clip_grad_norm(&mut grad_actor, config.max_grad_norm);
            clip_grad_norm(&mut grad_critic, config.max_grad_norm);
            opt.actor_net
                .step(agent.policy.mean_net.params_mut(), &grad_actor[..n_net]);
            opt.log_std.step(&mut agent.policy.log_std, &grad_actor[n_net..]);
            agent.policy.clamp_log_std();
            opt.critic.step(agent.critic.params_mut(), &grad_critic);

            stats.policy_loss += loss.policy;
            stats.value_loss += loss.value;
            stats.entropy += loss.entropy;
            stats.approx_kl += loss.approx_kl;
            stats.clip_fraction += loss.clip_fraction;
            stats.n_minibatches += 1;
        }
    }
    let n = stats.n_minibatches.max(1) as f64;
    stats.policy_loss /= n;
    stats.value_loss /= n;
    stats.entropy /= n;
    stats.approx_kl /= n;
    stats.clip_fraction /= n;
    Ok(stats)
}
