use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::buffer::{RolloutBuffer, Transition};
use super::policy::ActorCritic;
use super::update::{ppo_update, Optimizers, UpdateStats};
use super::PpoConfig;
use crate::env::Environment;
use crate::error::{Error, Result};

/// Episodes longer than this are cut off; only reachable with a broken
/// environment.
const MAX_EPISODE_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub update: usize,
    pub episode: usize,
    /// Undiscounted sum of rewards.
    pub episode_reward: f64,
    /// Mean of the last `moving_average_window` episode rewards.
    pub moving_avg: f64,
    pub steps: usize,
}

/// Passed to the per-update observer.
pub struct TrainProgress<'a> {
    pub update: usize,
    pub agent: &'a ActorCritic,
    pub stats: &'a UpdateStats,
    pub history: &'a [EpisodeRecord],
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub agent: ActorCritic,
    pub history: Vec<EpisodeRecord>,
    pub stats: Vec<UpdateStats>,
}

/// Runs one stochastic episode and records it.
pub fn collect_episode<E: Environment + ?Sized>(
    env: &mut E,
    agent: &ActorCritic,
    rng: &mut ChaCha8Rng,
) -> Result<(RolloutBuffer, f64)> {
    let mut buffer = RolloutBuffer::default();
    let mut obs = env.reset();
    let mut total = 0.0;
    for _ in 0..MAX_EPISODE_STEPS {
        let sample = agent.policy.sample(&obs, rng);
        let value = agent.value(&obs);
        let res = env.step(&sample.action)?;
        total += res.reward;
        buffer.push(Transition {
            observation: std::mem::replace(&mut obs, res.observation),
            pre_tanh: sample.pre_tanh,
            log_prob: sample.log_prob,
            reward: res.reward,
            value,
            done: res.done,
        });
        if res.done {
            return Ok((buffer, total));
        }
    }
    buffer.bootstrap_value = agent.value(&obs);
    Ok((buffer, total))
}

pub fn moving_average(values: &[f64], window: usize) -> f64 {
    let tail = &values[values.len().saturating_sub(window)..];
    if tail.is_empty() {
        0.0
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// Trains a fresh actor-critic on environments built by `make_env`.
///
/// Every update collects `episodes_per_update` episodes (in parallel, each
/// on its own environment and random stream) and then performs one PPO
/// update. The result depends only on `config` (including its seed).
pub fn train<E, F, C>(make_env: F, config: &PpoConfig, mut on_update: C) -> Result<TrainReport>
where
    E: Environment + Send,
    F: Fn() -> Result<E> + Sync,
    C: FnMut(&TrainProgress<'_>) -> Result<()>,
{
    config.validate()?;
    let mut envs: Vec<E> = (0..config.episodes_per_update)
        .map(|_| make_env())
        .collect::<Result<_>>()?;
    let (obs_dim, action_dim) = (envs[0].observation_dim(), envs[0].action_dim());

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut agent = ActorCritic::random(obs_dim, action_dim, &config.hidden, config.init_log_std, &mut init_rng)?;
    let mut opt = Optimizers::new(&agent, config.learning_rate);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(u64::MAX);

    let mut history: Vec<EpisodeRecord> = Vec::new();
    let mut rewards: Vec<f64> = Vec::new();
    let mut all_stats = Vec::with_capacity(config.total_updates);

    for update in 0..config.total_updates {
        let snapshot = &agent;
        let episodes: Vec<Result<(RolloutBuffer, f64)>> = envs
            .par_iter_mut()
            .enumerate()
            .map(|(e, env)| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream((update * config.episodes_per_update + e) as u64);
                collect_episode(env, snapshot, &mut rng)
            })
            .collect();

        let mut buffer = RolloutBuffer::default();
        for (e, ep) in episodes.into_iter().enumerate() {
            let (b, total) = ep?;
            rewards.push(total);
            history.push(EpisodeRecord {
                update,
                episode: e,
                episode_reward: total,
                moving_avg: moving_average(&rewards, config.moving_average_window),
                steps: b.len(),
            });
            buffer.extend(b);
        }

        let stats = ppo_update(&mut agent, &mut opt, &buffer, config, &mut shuffle_rng)?;
        if agent.policy.mean_net.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss {
                epoch: config.epochs_per_update,
            });
        }
        all_stats.push(stats);
        on_update(&TrainProgress {
            update,
            agent: &agent,
            stats: &stats,
            history: &history,
        })?;
    }
    Ok(TrainReport {
        agent,
        history,
        stats: all_stats,
    })
}
