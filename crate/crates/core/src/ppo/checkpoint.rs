//! Versioned checkpoint files.
//!
//! Layout (UTF-8 text, three lines):
//!
//! ```text
//! ROMCLOSURE-CHECKPOINT v1
//! {"actor_sizes": [...], "critic_sizes": [...], "seed": .., "update": .., ...}
//! {"actor": [...], "log_std": [...], "critic": [...]}
//! ```
//!
//! Floats are written in shortest round-trip form, so loading restores the
//! parameters bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::policy::{ActorCritic, GaussianPolicy};
use super::PpoConfig;
use crate::config::ProblemConfig;
use crate::env::EnvConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "ROMCLOSURE-CHECKPOINT v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub actor_sizes: Vec<usize>,
    pub critic_sizes: Vec<usize>,
    pub seed: u64,
    /// Number of completed PPO updates.
    pub update: usize,
    pub ppo: PpoConfig,
    #[serde(default)]
    pub env: Option<EnvConfig>,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Params {
    actor: Vec<f64>,
    log_std: Vec<f64>,
    critic: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub agent: ActorCritic,
}

impl Checkpoint {
    pub fn new(
        agent: &ActorCritic,
        ppo: &PpoConfig,
        update: usize,
        env: Option<EnvConfig>,
        problem: Option<ProblemConfig>,
    ) -> Self {
        Self {
            header: CheckpointHeader {
                actor_sizes: agent.policy.mean_net.sizes().to_vec(),
                critic_sizes: agent.critic.sizes().to_vec(),
                seed: ppo.seed,
                update,
                ppo: ppo.clone(),
                env,
                problem,
            },
            agent: agent.clone(),
        }
    }

    pub fn to_text(&self) -> Result<String> {
        let params = Params {
            actor: self.agent.policy.mean_net.params().to_vec(),
            log_std: self.agent.policy.log_std.clone(),
            critic: self.agent.critic.params().to_vec(),
        };
        Ok(format!(
            "{CHECKPOINT_MAGIC}\n{}\n{}\n",
            serde_json::to_string(&self.header)?,
            serde_json::to_string(&params)?
        ))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let fail = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        let mut lines = text.lines();
        match lines.next() {
            Some(l) if l.trim_end() == CHECKPOINT_MAGIC => {}
            Some(l) => return Err(fail(format!("unknown checkpoint format '{l}'"))),
            None => return Err(fail("empty file".into())),
        }
        let header: CheckpointHeader =
            serde_json::from_str(lines.next().ok_or_else(|| fail("missing header".into()))?)?;
        let params: Params = serde_json::from_str(lines.next().ok_or_else(|| fail("missing parameters".into()))?)?;
        let mean_net = Mlp::from_params(&header.actor_sizes, params.actor)?;
        let critic = Mlp::from_params(&header.critic_sizes, params.critic)?;
        let policy = GaussianPolicy::new(mean_net, params.log_std)?;
        Ok(Self {
            header,
            agent: ActorCritic { policy, critic },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_preserves_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let agent = ActorCritic::random(8, 8, &[64, 64], -0.5, &mut rng).unwrap();
        let ckpt = Checkpoint::new(&agent, &PpoConfig::default(), 17, Some(EnvConfig::default()), None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/policy.ckpt");
        ckpt.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ckpt);
        let obs = [0.1, -0.2, 0.3, 0.0, 1.0, -1.0, 0.5, 0.25];
        assert_eq!(back.agent.policy.mean(&obs), agent.policy.mean(&obs));
        assert_eq!(back.agent.value(&obs).to_bits(), agent.value(&obs).to_bits());
        assert_eq!(back.to_text().unwrap(), ckpt.to_text().unwrap());
    }

    #[test]
    fn rejects_foreign_files() {
        let p = Path::new("x.ckpt");
        assert!(matches!(
            Checkpoint::parse("hello\n{}\n{}", p),
            Err(Error::Format { .. })
        ));
        assert!(Checkpoint::parse("", p).is_err());
        assert!(Checkpoint::parse(CHECKPOINT_MAGIC, p).is_err());
    }
}
