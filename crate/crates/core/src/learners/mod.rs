//! Policy-gradient learners trained only on symbolic intrinsic rewards.
//!
//! Continuous action spaces use a deterministic actor with twin critics and a
//! min-over-critics TD target. Discrete action spaces use an ensemble of
//! Q-heads whose target takes the max over actions of the min over heads.

mod continuous;
mod discrete;
mod losses;
mod reward;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envlab::{Action, ActionSpace, EnvSpec};
use crate::neuronet::{Activation, MlpGenome, NetError};
use crate::replay::Transition;
use crate::symtree::SymTree;

pub use continuous::TwinCritic;
pub use discrete::Maxmin;
pub use losses::{actor_action, actor_loss_grad, actor_objective, q_regression_grad, q_regression_loss, ActionScale};
pub use reward::{intrinsic_reward, FeatureLayout, RewardSanitizer};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("tree expects {tree} features but the environment layout provides {layout}")]
    FeatureMismatch { tree: usize, layout: usize },
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub tau: f64,
    /// Also the rate of the Q-heads of discrete learners.
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    /// Q-heads for discrete learners.
    pub heads: usize,
    /// Gaussian action noise as a fraction of the action range.
    pub explore_noise: f64,
    /// Epsilon-greedy rate for discrete learners.
    pub epsilon: f64,
    pub sanitizer: RewardSanitizer,
    pub layout: FeatureLayout,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            gamma: 0.99,
            tau: 1e-3,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            hidden: vec![256, 256],
            hidden_activation: Activation::Tanh,
            heads: 2,
            explore_noise: 0.1,
            epsilon: 0.1,
            sanitizer: RewardSanitizer::default(),
            layout: FeatureLayout::default(),
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err("learning rates must be positive".into());
        }
        if self.heads == 0 {
            return Err("at least one Q-head is required".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon) || !(self.explore_noise >= 0.0) {
            return Err("epsilon must lie in [0, 1] and explore_noise be non-negative".into());
        }
        if !(self.sanitizer.clamp_bound > 0.0) || !self.sanitizer.nonfinite_value.is_finite() {
            return Err("reward clamp bound must be positive and the non-finite replacement finite".into());
        }
        if self.sanitizer.nonfinite_value.abs() > self.sanitizer.clamp_bound {
            return Err("non-finite replacement must lie within the clamp bound".into());
        }
        Ok(())
    }
}

/// Fresh, randomly initialised policy network for `spec`: a tanh actor for
/// continuous actions, a linear Q-network (argmax policy) for discrete ones.
pub fn policy_genome<R: Rng + ?Sized>(spec: &EnvSpec, hidden: &[usize], activation: Activation, rng: &mut R) -> Result<MlpGenome, NetError> {
    let mut net = match &spec.action {
        ActionSpace::Continuous { dim, .. } => {
            MlpGenome::build(spec.observation_dim, hidden, *dim, activation, Activation::Tanh)?
        }
        ActionSpace::Discrete { n } => MlpGenome::build(spec.observation_dim, hidden, *n, activation, Activation::Identity)?,
    };
    net.randomize(rng);
    Ok(net)
}

/// Greedy action of a single policy network.
pub fn genome_action(net: &MlpGenome, space: &ActionSpace, state: &[f64]) -> Action {
    match space {
        ActionSpace::Continuous { low, high, .. } => {
            Action::Continuous(actor_action(net, &ActionScale { low: *low, high: *high }, state))
        }
        ActionSpace::Discrete { .. } => Action::Discrete(argmax(&net.forward(state))),
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// What one call to [`LearnerState::update`] did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossReport {
    /// One entry per critic / Q-head.
    pub critic_losses: Vec<f64>,
    /// Mean critic value of the actor's actions (continuous learners only).
    pub actor_objective: Option<f64>,
    pub mean_reward: f64,
    pub td_targets: Vec<f64>,
    /// Optimiser steps rejected for non-finite losses or gradients.
    pub skipped_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerCore {
    Continuous(TwinCritic),
    Discrete(Maxmin),
}

/// One SR learner: its networks, optimiser state and reward tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub tree: SymTree,
    pub core: LearnerCore,
    pub config: LearnerConfig,
    pub updates: u64,
}

impl LearnerState {
    pub fn new<R: Rng + ?Sized>(tree: SymTree, spec: &EnvSpec, config: LearnerConfig, rng: &mut R) -> Result<Self, LearnerError> {
        config.validate().map_err(LearnerError::Config)?;
        let layout_dim = config
            .layout
            .feature_dim(spec.observation_dim, spec.action.feature_len());
        if tree.feature_dim() != layout_dim {
            return Err(LearnerError::FeatureMismatch {
                tree: tree.feature_dim(),
                layout: layout_dim,
            });
        }
        let core = Self::fresh_core(spec, &config, rng)?;
        Ok(LearnerState {
            tree,
            core,
            config,
            updates: 0,
        })
    }

    fn fresh_core<R: Rng + ?Sized>(spec: &EnvSpec, config: &LearnerConfig, rng: &mut R) -> Result<LearnerCore, NetError> {
        Ok(match &spec.action {
            ActionSpace::Continuous { dim, low, high } => LearnerCore::Continuous(TwinCritic::new(
                spec.observation_dim,
                *dim,
                ActionScale { low: *low, high: *high },
                config,
                rng,
            )?),
            ActionSpace::Discrete { n } => {
                LearnerCore::Discrete(Maxmin::new(spec.observation_dim, *n, config, rng)?)
            }
        })
    }

    /// Replaces every network and optimiser with a fresh draw, keeping the tree.
    pub fn reinitialize<R: Rng + ?Sized>(&mut self, spec: &EnvSpec, rng: &mut R) -> Result<(), NetError> {
        self.core = Self::fresh_core(spec, &self.config, rng)?;
        Ok(())
    }

    pub fn intrinsic_reward(&self, t: &Transition) -> f64 {
        intrinsic_reward(&self.tree, self.config.layout, &self.config.sanitizer, t)
    }

    /// One gradient update on `batch`, supervised by the tree's rewards.
    pub fn update(&mut self, batch: &[Transition]) -> LossReport {
        assert!(!batch.is_empty(), "update needs at least one transition");
        let rewards: Vec<f64> = batch.iter().map(|t| self.intrinsic_reward(t)).collect();
        let mut report = match &mut self.core {
            LearnerCore::Continuous(tc) => tc.update(batch, &rewards, &self.config),
            LearnerCore::Discrete(mm) => mm.update(batch, &rewards, &self.config),
        };
        report.mean_reward = rewards.iter().sum::<f64>() / rewards.len() as f64;
        if report.skipped_steps > 0 {
            log::warn!(
                "learner tree {:?}: skipped {} optimiser step(s) on non-finite values",
                self.tree.id(),
                report.skipped_steps
            );
        }
        self.updates += 1;
        report
    }

    pub fn act<R: Rng + ?Sized>(&self, state: &[f64], explore: bool, rng: &mut R) -> Action {
        match &self.core {
            LearnerCore::Continuous(tc) => tc.act(state, explore.then_some(self.config.explore_noise), rng),
            LearnerCore::Discrete(mm) => mm.act(state, if explore { self.config.epsilon } else { 0.0 }, rng),
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.core {
            LearnerCore::Continuous(tc) => tc.is_finite(),
            LearnerCore::Discrete(mm) => mm.is_finite(),
        }
    }

    /// The networks that define this learner's behaviour: the actor, or every
    /// Q-head.
    pub fn policy_networks(&self) -> Vec<&MlpGenome> {
        match &self.core {
            LearnerCore::Continuous(tc) => vec![&tc.actor],
            LearnerCore::Discrete(mm) => mm.heads.iter().collect(),
        }
    }
}
