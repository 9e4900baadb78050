use rand::Rng;
use serde::{Deserialize, Serialize};

use super::losses::q_regression_grad;
use super::{argmax, LearnerConfig, LossReport};
use crate::envlab::Action;
use crate::neuronet::{soft_update, Activation, Adam, AdamConfig, MlpGenome, NetError};
use crate::replay::Transition;

/// Ensemble of Q-heads with per-head targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maxmin {
    pub heads: Vec<MlpGenome>,
    pub targets: Vec<MlpGenome>,
    pub opts: Vec<Adam>,
    n_actions: usize,
}

impl Maxmin {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, n_actions: usize, config: &LearnerConfig, rng: &mut R) -> Result<Self, NetError> {
        let heads = (0..config.heads)
            .map(|_| {
                let mut h = MlpGenome::build(obs_dim, &config.hidden, n_actions, config.hidden_activation, Activation::Identity)?;
                h.randomize(rng);
                Ok(h)
            })
            .collect::<Result<Vec<_>, NetError>>()?;
        let opts = heads
            .iter()
            .map(|h| Adam::new(h.total_params(), AdamConfig::with_lr(config.actor_lr)))
            .collect();
        Ok(Maxmin {
            targets: heads.clone(),
            heads,
            opts,
            n_actions,
        })
    }

    /// Builds a learner around explicitly given heads (targets start as copies).
    pub fn from_heads(heads: Vec<MlpGenome>, lr: f64) -> Self {
        let n_actions = heads[0].output_dim();
        let opts = heads
            .iter()
            .map(|h| Adam::new(h.total_params(), AdamConfig::with_lr(lr)))
            .collect();
        Maxmin {
            targets: heads.clone(),
            heads,
            opts,
            n_actions,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Per-action minimum over target heads.
    pub fn min_target_values(&self, state: &[f64]) -> Vec<f64> {
        let mut mins = vec![f64::INFINITY; self.n_actions];
        for t in &self.targets {
            for (m, q) in mins.iter_mut().zip(t.forward(state)) {
                *m = m.min(q);
            }
        }
        mins
    }

    /// `y_i = r_i + gamma * (1 - done_i) * max_a' min_h Q'_h(s'_i, a')`.
    pub fn td_targets(&self, batch: &[Transition], rewards: &[f64], gamma: f64) -> Vec<f64> {
        batch
            .iter()
            .zip(rewards)
            .map(|(t, r)| {
                if t.done || gamma == 0.0 {
                    return *r;
                }
                let mins = self.min_target_values(&t.next_state);
                r + gamma * mins.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    pub(super) fn update(&mut self, batch: &[Transition], rewards: &[f64], config: &LearnerConfig) -> LossReport {
        let targets = self.td_targets(batch, rewards, config.gamma);
        let inputs: Vec<Vec<f64>> = batch.iter().map(|t| t.state.clone()).collect();
        let outputs: Vec<usize> = batch
            .iter()
            .map(|t| match t.action {
                Action::Discrete(a) => a,
                Action::Continuous(_) => panic!("discrete learner fed a continuous action"),
            })
            .collect();
        let mut report = LossReport {
            td_targets: targets.clone(),
            ..Default::default()
        };
        for (head, opt) in self.heads.iter_mut().zip(&mut self.opts) {
            let (loss, grads) = q_regression_grad(head, &inputs, &outputs, &targets);
            report.critic_losses.push(loss);
            if !loss.is_finite() || opt.step(head.params_mut(), &grads).is_err() {
                report.skipped_steps += 1;
            }
        }
        for (target, head) in self.targets.iter_mut().zip(&self.heads) {
            soft_update(target, head, config.tau).expect("target shares architecture");
        }
        report
    }

    /// Mean Q-value across heads for every action.
    pub fn mean_values(&self, state: &[f64]) -> Vec<f64> {
        let mut sum = vec![0.0; self.n_actions];
        for h in &self.heads {
            for (s, q) in sum.iter_mut().zip(h.forward(state)) {
                *s += q;
            }
        }
        let k = self.heads.len() as f64;
        sum.into_iter().map(|s| s / k).collect()
    }

    /// Epsilon-greedy over the head-averaged Q-values.
    pub fn act<R: Rng + ?Sized>(&self, state: &[f64], epsilon: f64, rng: &mut R) -> Action {
        if epsilon > 0.0 && rng.random::<f64>() < epsilon {
            return Action::Discrete(rng.random_range(0..self.n_actions));
        }
        Action::Discrete(argmax(&self.mean_values(state)))
    }

    pub fn is_finite(&self) -> bool {
        self.heads.iter().chain(&self.targets).all(MlpGenome::is_finite)
    }
}
