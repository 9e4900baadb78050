use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, EnvSpec, Environment, StepResult};

/// Falling-object catcher on a `width x height` lattice.
///
/// Observation: `(paddle_x, object_x, object_y, object_vy)` with columns
/// divided by `width - 1` and rows by `height - 1`; `object_vy` is the
/// constant normalised fall speed `-1 / (height - 1)`. Actions: `0` = left,
/// `1` = stay, `2` = right. Each step moves the paddle, then drops the object
/// one row. When the object reaches row 0 it is caught (`+1`) if its column is
/// within `paddle_half_width` of the paddle, otherwise missed (`-1`); a new
/// object then appears in the top row at a seeded random column. The episode
/// ends after `drops` objects. No other step pays anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatcherConfig {
    pub width: usize,
    pub height: usize,
    pub paddle_half_width: usize,
    pub drops: usize,
}

impl Default for CatcherConfig {
    fn default() -> Self {
        CatcherConfig {
            width: 9,
            height: 10,
            paddle_half_width: 1,
            drops: 10,
        }
    }
}

impl CatcherConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.width < 2 || self.height < 2 || self.drops == 0 {
            return Err("catcher needs width >= 2, height >= 2 and at least one drop".into());
        }
        Ok(())
    }

    pub fn steps_per_drop(&self) -> usize {
        self.height - 1
    }

    /// Paddle column at the start of an episode.
    pub fn paddle_start(&self) -> usize {
        self.width / 2
    }
}

pub struct SparseCatcher {
    config: CatcherConfig,
    spec: EnvSpec,
    rng: ChaCha8Rng,
    paddle: usize,
    object: [usize; 2],
    drops_done: usize,
    steps: usize,
    done: bool,
}

impl SparseCatcher {
    pub fn new(config: CatcherConfig) -> Self {
        let spec = EnvSpec {
            name: "sparse_catcher",
            observation_dim: 4,
            action: ActionSpace::Discrete { n: 3 },
            // Every drop takes exactly height - 1 steps; the cap is never the
            // reason an episode ends.
            max_steps: config.drops * config.steps_per_drop(),
            observation_names: ["paddle_x", "object_x", "object_y", "object_vy"].map(String::from).to_vec(),
            reward_semantics: "+1 per caught object, -1 per missed object, 0 otherwise",
        };
        SparseCatcher {
            config,
            spec,
            rng: ChaCha8Rng::seed_from_u64(0),
            paddle: 0,
            object: [0, 0],
            drops_done: 0,
            steps: 0,
            done: true,
        }
    }

    pub fn paddle(&self) -> usize {
        self.paddle
    }

    pub fn object(&self) -> [usize; 2] {
        self.object
    }

    fn spawn(&mut self) {
        self.object = [self.rng.random_range(0..self.config.width), self.config.height - 1];
    }

    fn observation(&self) -> Vec<f64> {
        let w = (self.config.width - 1) as f64;
        let h = (self.config.height - 1) as f64;
        vec![
            self.paddle as f64 / w,
            self.object[0] as f64 / w,
            self.object[1] as f64 / h,
            -1.0 / h,
        ]
    }
}

impl Environment for SparseCatcher {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.paddle = self.config.paddle_start();
        self.drops_done = 0;
        self.steps = 0;
        self.done = false;
        self.spawn();
        self.observation()
    }

    fn step(&mut self, action: &Action) -> StepResult {
        assert!(!self.done, "step called on a finished episode");
        match action {
            Action::Discrete(0) => self.paddle = self.paddle.saturating_sub(1),
            Action::Discrete(1) => {}
            Action::Discrete(2) => self.paddle = (self.paddle + 1).min(self.config.width - 1),
            other => panic!("sparse_catcher expects a discrete action in 0..3, got {other:?}"),
        }
        self.object[1] -= 1;
        self.steps += 1;
        let mut reward = 0.0;
        if self.object[1] == 0 {
            reward = if self.paddle.abs_diff(self.object[0]) <= self.config.paddle_half_width {
                1.0
            } else {
                -1.0
            };
            self.drops_done += 1;
            if self.drops_done < self.config.drops {
                self.spawn();
            }
        }
        self.done = self.drops_done == self.config.drops;
        StepResult {
            observation: self.observation(),
            reward,
            done: self.done,
            truncated: false,
            step: self.steps,
        }
    }
}
