//! Proximal policy optimization with a tanh-Gaussian actor and a separate
//! critic, both small dense networks with exact gradients.

mod adam;
mod buffer;
mod checkpoint;
mod mlp;
mod policy;
mod train;
mod update;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adam::{clip_grad_norm, Adam};
pub use buffer::{compute_advantages, normalize_advantages, RolloutBuffer, Transition};
pub use checkpoint::{Checkpoint, CheckpointHeader, CHECKPOINT_MAGIC};
pub use mlp::{param_count, Mlp, MlpCache};
pub use policy::{
    gaussian_log_prob, log_tanh_jacobian, value_estimate, ActorCritic, GaussianPolicy, PolicySample, LOG_STD_MAX,
    LOG_STD_MIN,
};
pub use train::{collect_episode, moving_average, train, EpisodeRecord, TrainProgress, TrainReport};
pub use update::{clipped_surrogate, minibatch_loss, ppo_update, LossBreakdown, Optimizers, UpdateStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub learning_rate: f64,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    pub episodes_per_update: usize,
    pub total_updates: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Per-network global gradient-norm cap; `0` disables clipping.
    pub max_grad_norm: f64,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
    /// Updates between periodic checkpoints; `0` disables them.
    pub checkpoint_every: usize,
    pub moving_average_window: usize,
    pub seed: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            learning_rate: 3e-4,
            epochs_per_update: 10,
            minibatch_size: 64,
            episodes_per_update: 4,
            total_updates: 300,
            entropy_coef: 0.0,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            hidden: vec![64, 64],
            init_log_std: 0.0,
            checkpoint_every: 50,
            moving_average_window: 50,
            seed: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad(format!("clip_epsilon must lie in (0, 1), got {}", self.clip_epsilon));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!("gae_lambda must lie in [0, 1], got {}", self.gae_lambda));
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.epochs_per_update == 0 || self.minibatch_size == 0 || self.episodes_per_update == 0 {
            return bad("epochs, minibatch size and episodes per update must be positive".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!("invalid hidden layer sizes {:?}", self.hidden));
        }
        if self.moving_average_window == 0 {
            return bad("moving_average_window must be positive".into());
        }
        Ok(())
    }
}
