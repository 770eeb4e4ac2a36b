use crate::error::{Error, Result};

/// One environment transition as seen by the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    /// Gaussian pre-image of the executed action.
    pub pre_tanh: Vec<f64>,
    /// Behavior-policy log-probability of the executed action.
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    /// The episode ended on this transition.
    pub done: bool,
}

/// Transitions of one or more consecutive episodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutBuffer {
    pub transitions: Vec<Transition>,
    /// Value of the state following the last transition, used only when the
    /// last transition is not terminal.
    pub bootstrap_value: f64,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    /// Appends another buffer; its bootstrap value replaces ours.
    pub fn extend(&mut self, other: RolloutBuffer) {
        self.transitions.extend(other.transitions);
        self.bootstrap_value = other.bootstrap_value;
    }
}

/// Generalized advantage estimation. Returns raw (unnormalized) advantages
/// and the value targets `A + V`.
pub fn compute_advantages(buffer: &RolloutBuffer, gamma: f64, gae_lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if buffer.is_empty() {
        return Err(Error::Usage("cannot estimate advantages of an empty buffer".into()));
    }
    let n = buffer.len();
    let mut adv = vec![0.0; n];
    let mut next_value = buffer.bootstrap_value;
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let tr = &buffer.transitions[t];
        let live = if tr.done { 0.0 } else { 1.0 };
        let delta = tr.reward + gamma * next_value * live - tr.value;
        next_adv = delta + gamma * gae_lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = tr.value;
    }
    let returns = adv.iter().zip(&buffer.transitions).map(|(a, t)| a + t.value).collect();
    Ok((adv, returns))
}

/// Shifts to zero mean and, when the spread is non-degenerate, scales to
/// unit (population) variance.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.len() < 2 {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let inv = if std > 1e-12 { 1.0 / std } else { 1.0 };
    for a in adv.iter_mut() {
        *a = (*a - mean) * inv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn buffer(rewards: &[f64], values: &[f64], dones: &[bool]) -> RolloutBuffer {
        RolloutBuffer {
            transitions: rewards
                .iter()
                .zip(values)
                .zip(dones)
                .map(|((&reward, &value), &done)| Transition {
                    observation: vec![],
                    pre_tanh: vec![],
                    log_prob: 0.0,
                    reward,
                    value,
                    done,
                })
                .collect(),
            bootstrap_value: 0.0,
        }
    }

    #[test]
    fn lambda_zero_gives_td_errors() {
        let mut b = buffer(&[1.0, -0.5, 2.0], &[0.3, 0.7, -0.2], &[false, false, false]);
        b.bootstrap_value = 0.9;
        let (adv, ret) = compute_advantages(&b, 0.9, 0.0).unwrap();
        let want = [1.0 + 0.9 * 0.7 - 0.3, -0.5 + 0.9 * -0.2 - 0.7, 2.0 + 0.9 * 0.9 + 0.2];
        for (a, w) in adv.iter().zip(want) {
            assert!((a - w).abs() < 1e-14);
        }
        assert!((ret[0] - (adv[0] + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_limit_is_return_to_go() {
        let b = buffer(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4], &[false, false, false, true]);
        let (adv, ret) = compute_advantages(&b, 1.0, 1.0).unwrap();
        assert_eq!(adv, vec![10.0, 9.0, 7.0, 4.0]);
        assert_eq!(ret, adv);
    }

    #[test]
    fn episode_boundary_blocks_credit() {
        let b = buffer(&[1.0, 5.0], &[0.0, 0.0], &[true, true]);
        let (adv, _) = compute_advantages(&b, 1.0, 1.0).unwrap();
        assert_eq!(adv, vec![1.0, 5.0]);
    }

    #[test]
    fn zero_rewards_zero_advantages() {
        let b = buffer(&[0.0; 5], &[0.0; 5], &[false, false, true, false, true]);
        let (adv, _) = compute_advantages(&b, 0.99, 0.95).unwrap();
        assert!(adv.iter().all(|a| *a == 0.0));
    }

    #[test]
    fn empty_buffer_is_an_error() {
        assert!(compute_advantages(&RolloutBuffer::default(), 0.99, 0.95).is_err());
    }

    proptest! {
        #[test]
        fn normalization_moments(mut adv in prop::collection::vec(-100.0..100.0f64, 2..300)) {
            let spread = adv.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - adv.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assume!(spread > 1e-6);
            normalize_advantages(&mut adv);
            let n = adv.len() as f64;
            let mean = adv.iter().sum::<f64>() / n;
            let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-10);
            prop_assert!((var - 1.0).abs() < 1e-8);
        }
    }
}
