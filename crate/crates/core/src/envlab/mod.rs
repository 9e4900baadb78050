//! Built-in sparse-reward environments with a shared episodic interface.
//!
//! Every environment is deterministic given the seed passed to
//! [`Environment::reset`] and the actions taken afterwards.

mod catcher;
mod gridworld;
mod pointmass;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use catcher::{CatcherConfig, SparseCatcher};
pub use gridworld::{GridworldConfig, SparseGridworld};
pub use pointmass::{PointmassConfig, SparsePointmass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Continuous(Vec<f64>),
    Discrete(usize),
}

impl Action {
    /// Appends the action's tree-feature encoding: continuous components
    /// as-is, a discrete action as its index.
    pub fn push_features(&self, out: &mut Vec<f64>) {
        match self {
            Action::Continuous(v) => out.extend_from_slice(v),
            Action::Discrete(i) => out.push(*i as f64),
        }
    }

    pub fn feature_len(&self) -> usize {
        match self {
            Action::Continuous(v) => v.len(),
            Action::Discrete(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionSpace {
    /// Box `[low, high]^dim`.
    Continuous { dim: usize, low: f64, high: f64 },
    Discrete { n: usize },
}

impl ActionSpace {
    /// Number of tree features an action contributes.
    pub fn feature_len(&self) -> usize {
        match self {
            ActionSpace::Continuous { dim, .. } => *dim,
            ActionSpace::Discrete { .. } => 1,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            ActionSpace::Continuous { dim, low, high } => {
                Action::Continuous((0..*dim).map(|_| rng.random_range(*low..=*high)).collect())
            }
            ActionSpace::Discrete { n } => Action::Discrete(rng.random_range(0..*n)),
        }
    }

    pub fn contains(&self, action: &Action) -> bool {
        match (self, action) {
            (ActionSpace::Continuous { dim, low, high }, Action::Continuous(v)) => {
                v.len() == *dim && v.iter().all(|x| (*low..=*high).contains(x))
            }
            (ActionSpace::Discrete { n }, Action::Discrete(i)) => i < n,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub observation_dim: usize,
    pub action: ActionSpace,
    pub max_steps: usize,
    /// Human-readable names of the observation components, in order.
    pub observation_names: Vec<String>,
    pub reward_semantics: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// The episode is over, either terminally or by truncation.
    pub done: bool,
    /// The episode hit `max_steps` without reaching a terminal state.
    pub truncated: bool,
    pub step: usize,
}

impl StepResult {
    /// Whether the transition ends in a true terminal state (no bootstrap).
    pub fn terminal(&self) -> bool {
        self.done && !self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode and returns the first observation.
    fn reset(&mut self, seed: u64) -> Vec<f64>;

    /// # Panics
    ///
    /// Implementations panic when called after the episode is done or with an
    /// action outside the action space.
    fn step(&mut self, action: &Action) -> StepResult;
}

/// Environment selection, as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "env", rename_all = "snake_case")]
pub enum EnvConfig {
    SparsePointmass(PointmassConfig),
    SparseGridworld(GridworldConfig),
    SparseCatcher(CatcherConfig),
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig::SparseGridworld(GridworldConfig::default())
    }
}

impl EnvConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EnvConfig::SparsePointmass(_) => "sparse_pointmass",
            EnvConfig::SparseGridworld(_) => "sparse_gridworld",
            EnvConfig::SparseCatcher(_) => "sparse_catcher",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            EnvConfig::SparsePointmass(c) => c.validate(),
            EnvConfig::SparseGridworld(c) => c.validate(),
            EnvConfig::SparseCatcher(c) => c.validate(),
        }
    }

    pub fn build(&self) -> Box<dyn Environment> {
        match self {
            EnvConfig::SparsePointmass(c) => Box::new(SparsePointmass::new(c.clone())),
            EnvConfig::SparseGridworld(c) => Box::new(SparseGridworld::new(c.clone())),
            EnvConfig::SparseCatcher(c) => Box::new(SparseCatcher::new(c.clone())),
        }
    }

    pub fn spec(&self) -> EnvSpec {
        self.build().spec().clone()
    }
}
