use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::envlab::{Action, Environment};
use crate::learners::{genome_action, LearnerState};
use crate::neuronet::MlpGenome;
use crate::replay::{CyclicBuffer, ReplayError, Transition};

/// Undiscounted episodic return, averaged over `episodes_averaged` episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessScore {
    pub value: f64,
    pub episodes_averaged: usize,
}

/// Something that picks actions during an evaluation episode.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Genome(&'a MlpGenome),
    Learner { learner: &'a LearnerState, explore: bool },
    /// Uniform random actions (the warm-up phase of SR learners).
    Uniform,
}

impl Policy<'_> {
    fn act<R: Rng + ?Sized>(&self, env: &dyn Environment, state: &[f64], rng: &mut R) -> Action {
        match self {
            Policy::Genome(net) => genome_action(net, &env.spec().action, state),
            Policy::Learner { learner, explore } => learner.act(state, *explore, rng),
            Policy::Uniform => env.spec().action.sample(rng),
        }
    }
}

/// Result of running a policy without touching the shared buffer.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub fitness: FitnessScore,
    /// Every transition in the order it happened.
    pub transitions: Vec<Transition>,
}

/// Runs `episodes` full episodes. Episode start states and any stochastic
/// action choices derive from `seed` alone.
pub fn rollout(policy: Policy<'_>, env: &mut dyn Environment, episodes: usize, seed: u64) -> Rollout {
    assert!(episodes > 0, "at least one episode per evaluation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    let mut transitions = Vec::new();
    for _ in 0..episodes {
        let mut state = env.reset(rng.random());
        loop {
            let action = policy.act(env, &state, &mut rng);
            let step = env.step(&action);
            total += step.reward;
            let terminal = step.terminal();
            let done = step.done;
            transitions.push(Transition {
                state,
                action,
                env_reward: step.reward,
                next_state: step.observation.clone(),
                done: terminal,
            });
            state = step.observation;
            if done {
                break;
            }
        }
    }
    Rollout {
        fitness: FitnessScore {
            value: total / episodes as f64,
            episodes_averaged: episodes,
        },
        transitions,
    }
}

/// Runs the episodes and appends every transition, with its true
/// environment reward, to `buffer`.
pub fn evaluate<R: Rng + ?Sized>(
    policy: Policy<'_>,
    env: &mut dyn Environment,
    buffer: &mut CyclicBuffer,
    episodes: usize,
    rng: &mut R,
) -> Result<(FitnessScore, usize), ReplayError> {
    let r = rollout(policy, env, episodes, rng.random());
    let steps = r.transitions.len();
    for t in r.transitions {
        buffer.append(t)?;
    }
    Ok((r.fitness, steps))
}
