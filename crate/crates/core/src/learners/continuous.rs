use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::losses::{actor_action, actor_loss_grad, q_regression_grad};
use super::{ActionScale, LearnerConfig, LossReport};
use crate::envlab::Action;
use crate::neuronet::{soft_update, Activation, Adam, AdamConfig, MlpGenome, NetError};
use crate::replay::Transition;

/// Deterministic actor with two critics and target copies of all three.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinCritic {
    pub actor: MlpGenome,
    pub actor_target: MlpGenome,
    pub critics: [MlpGenome; 2],
    pub critic_targets: [MlpGenome; 2],
    pub actor_opt: Adam,
    pub critic_opts: [Adam; 2],
    pub scale: ActionScale,
    obs_dim: usize,
}

impl TwinCritic {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, action_dim: usize, scale: ActionScale, config: &LearnerConfig, rng: &mut R) -> Result<Self, NetError> {
        let mut actor = MlpGenome::build(obs_dim, &config.hidden, action_dim, config.hidden_activation, Activation::Tanh)?;
        actor.randomize(rng);
        let mut critic = || -> Result<MlpGenome, NetError> {
            let mut c = MlpGenome::build(obs_dim + action_dim, &config.hidden, 1, config.hidden_activation, Activation::Identity)?;
            c.randomize(rng);
            Ok(c)
        };
        let critics = [critic()?, critic()?];
        let actor_opt = Adam::new(actor.total_params(), AdamConfig::with_lr(config.actor_lr));
        let critic_opts = [
            Adam::new(critics[0].total_params(), AdamConfig::with_lr(config.critic_lr)),
            Adam::new(critics[1].total_params(), AdamConfig::with_lr(config.critic_lr)),
        ];
        Ok(TwinCritic {
            actor_target: actor.clone(),
            critic_targets: critics.clone(),
            actor,
            critics,
            actor_opt,
            critic_opts,
            scale,
            obs_dim,
        })
    }

    /// `y_i = r_i + gamma * (1 - done_i) * min_j Q'_j(s'_i, actor'(s'_i))`.
    pub fn td_targets(&self, batch: &[Transition], rewards: &[f64], gamma: f64) -> Vec<f64> {
        batch
            .iter()
            .zip(rewards)
            .map(|(t, r)| {
                if t.done || gamma == 0.0 {
                    return *r;
                }
                let a = actor_action(&self.actor_target, &self.scale, &t.next_state);
                let mut x = t.next_state.clone();
                x.extend_from_slice(&a);
                let q1 = self.critic_targets[0].forward(&x)[0];
                let q2 = self.critic_targets[1].forward(&x)[0];
                r + gamma * q1.min(q2)
            })
            .collect()
    }

    pub(super) fn update(&mut self, batch: &[Transition], rewards: &[f64], config: &LearnerConfig) -> LossReport {
        let targets = self.td_targets(batch, rewards, config.gamma);
        let inputs: Vec<Vec<f64>> = batch
            .iter()
            .map(|t| {
                let mut x = t.state.clone();
                match &t.action {
                    Action::Continuous(a) => x.extend_from_slice(a),
                    Action::Discrete(_) => panic!("continuous learner fed a discrete action"),
                }
                x
            })
            .collect();
        let outputs = vec![0; batch.len()];
        let mut report = LossReport {
            td_targets: targets.clone(),
            ..Default::default()
        };
        for (critic, opt) in self.critics.iter_mut().zip(&mut self.critic_opts) {
            let (loss, grads) = q_regression_grad(critic, &inputs, &outputs, &targets);
            report.critic_losses.push(loss);
            if !loss.is_finite() || opt.step(critic.params_mut(), &grads).is_err() {
                report.skipped_steps += 1;
            }
        }
        let states: Vec<Vec<f64>> = batch.iter().map(|t| t.state.clone()).collect();
        let (actor_loss, grads) = actor_loss_grad(&self.actor, &self.critics[0], &self.scale, &states);
        report.actor_objective = Some(-actor_loss);
        if !actor_loss.is_finite() || self.actor_opt.step(self.actor.params_mut(), &grads).is_err() {
            report.skipped_steps += 1;
        }
        let tau = config.tau;
        soft_update(&mut self.actor_target, &self.actor, tau).expect("target shares architecture");
        for (target, source) in self.critic_targets.iter_mut().zip(&self.critics) {
            soft_update(target, source, tau).expect("target shares architecture");
        }
        report
    }

    /// Actor output, plus clipped Gaussian noise with standard deviation
    /// `noise * (high - low)` when `noise` is given.
    pub fn act<R: Rng + ?Sized>(&self, state: &[f64], noise: Option<f64>, rng: &mut R) -> Action {
        let mut a = actor_action(&self.actor, &self.scale, state);
        if let Some(frac) = noise {
            let sigma = frac * (self.scale.high - self.scale.low);
            if sigma > 0.0 {
                let dist = Normal::new(0.0, sigma).expect("finite noise scale");
                for x in &mut a {
                    *x = (*x + dist.sample(rng)).clamp(self.scale.low, self.scale.high);
                }
            }
        }
        Action::Continuous(a)
    }

    pub fn is_finite(&self) -> bool {
        self.actor.is_finite()
            && self.actor_target.is_finite()
            && self.critics.iter().chain(&self.critic_targets).all(MlpGenome::is_finite)
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }
}
