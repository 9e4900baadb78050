use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, EnvSpec, Environment, StepResult};

/// 2-D point mass in the arena `[-1, 1]^2`.
///
/// Observation: `(x, y, vx, vy)`. Actions are forces in `[-1, 1]^2`. Each
/// step applies `x <- x + v*dt` then `v <- v + a*dt - friction*v`; positions
/// are clipped to the arena and the velocity component along a clipped axis
/// is zeroed, so speeds stay below `dt / friction`. Reward is `+1` on the
/// first step that ends within `goal_radius` of the goal, which also ends the
/// episode; every other step pays `0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PointmassConfig {
    pub goal: [f64; 2],
    pub goal_radius: f64,
    /// Start positions are drawn uniformly from `[start_low, start_high]^2`.
    pub start_low: f64,
    pub start_high: f64,
    pub dt: f64,
    pub friction: f64,
    pub max_steps: usize,
}

impl Default for PointmassConfig {
    fn default() -> Self {
        PointmassConfig {
            goal: [0.5, 0.5],
            goal_radius: 0.05,
            start_low: -0.9,
            start_high: -0.5,
            dt: 0.05,
            friction: 0.1,
            max_steps: 200,
        }
    }
}

impl PointmassConfig {
    pub fn validate(&self) -> Result<(), String> {
        let in_arena = |v: f64| (-1.0..=1.0).contains(&v);
        if !(in_arena(self.goal[0]) && in_arena(self.goal[1])) {
            return Err("goal must lie inside [-1, 1]^2".into());
        }
        if !(in_arena(self.start_low) && in_arena(self.start_high) && self.start_low <= self.start_high) {
            return Err("start box must satisfy -1 <= start_low <= start_high <= 1".into());
        }
        if !(self.goal_radius > 0.0 && self.dt > 0.0 && (0.0..1.0).contains(&self.friction)) {
            return Err("goal_radius and dt must be positive, friction in [0, 1)".into());
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        Ok(())
    }
}

pub struct SparsePointmass {
    config: PointmassConfig,
    spec: EnvSpec,
    pos: [f64; 2],
    vel: [f64; 2],
    steps: usize,
    done: bool,
}

impl SparsePointmass {
    pub fn new(config: PointmassConfig) -> Self {
        let spec = EnvSpec {
            name: "sparse_pointmass",
            observation_dim: 4,
            action: ActionSpace::Continuous {
                dim: 2,
                low: -1.0,
                high: 1.0,
            },
            max_steps: config.max_steps,
            observation_names: ["pos_x", "pos_y", "vel_x", "vel_y"].map(String::from).to_vec(),
            reward_semantics: "+1 on entering the goal disc (terminal), 0 otherwise",
        };
        SparsePointmass {
            config,
            spec,
            pos: [0.0; 2],
            vel: [0.0; 2],
            steps: 0,
            done: true,
        }
    }

    /// Places the mass at an explicit state, starting a fresh episode.
    pub fn reset_to(&mut self, pos: [f64; 2], vel: [f64; 2]) -> Vec<f64> {
        self.pos = pos;
        self.vel = vel;
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    pub fn goal(&self) -> [f64; 2] {
        self.config.goal
    }

    fn observation(&self) -> Vec<f64> {
        vec![self.pos[0], self.pos[1], self.vel[0], self.vel[1]]
    }
}

impl Environment for SparsePointmass {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (self.config.start_low, self.config.start_high);
        let pos = [rng.random_range(lo..=hi), rng.random_range(lo..=hi)];
        self.reset_to(pos, [0.0, 0.0])
    }

    fn step(&mut self, action: &Action) -> StepResult {
        assert!(!self.done, "step called on a finished episode");
        let force = match action {
            Action::Continuous(v) if v.len() == 2 => [v[0].clamp(-1.0, 1.0), v[1].clamp(-1.0, 1.0)],
            other => panic!("sparse_pointmass expects a 2-D continuous action, got {other:?}"),
        };
        let PointmassConfig { dt, friction, .. } = self.config;
        for axis in 0..2 {
            self.pos[axis] += self.vel[axis] * dt;
            self.vel[axis] += force[axis] * dt - friction * self.vel[axis];
            if self.pos[axis].abs() > 1.0 {
                self.pos[axis] = self.pos[axis].clamp(-1.0, 1.0);
                self.vel[axis] = 0.0;
            }
        }
        self.steps += 1;
        let [gx, gy] = self.config.goal;
        let dist = ((self.pos[0] - gx).powi(2) + (self.pos[1] - gy).powi(2)).sqrt();
        let reached = dist <= self.config.goal_radius;
        let truncated = !reached && self.steps >= self.config.max_steps;
        self.done = reached || truncated;
        StepResult {
            observation: self.observation(),
            reward: if reached { 1.0 } else { 0.0 },
            done: self.done,
            truncated,
            step: self.steps,
        }
    }
}
