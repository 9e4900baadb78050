use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, EnvSpec, Environment, StepResult};

/// Action indices: `0` = +x, `1` = -x, `2` = +y, `3` = -y.
pub const MOVES: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// `size x size` grid with a single rewarding goal cell.
///
/// Observation: `(x, y, goal_x - x, goal_y - y)`, each divided by
/// `size - 1`. Moving into a wall or off the grid leaves the agent in place.
/// Entering the goal pays `+1` and ends the episode; all other steps pay `0`.
/// Episodes are truncated after `4 * size` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridworldConfig {
    pub size: usize,
    pub start: [usize; 2],
    pub goal: [usize; 2],
    /// Draw the start uniformly from free non-goal cells on every reset.
    pub random_start: bool,
    pub walls: Vec<[usize; 2]>,
}

impl Default for GridworldConfig {
    fn default() -> Self {
        GridworldConfig {
            size: 8,
            start: [0, 0],
            goal: [7, 7],
            random_start: false,
            walls: Vec::new(),
        }
    }
}

impl GridworldConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.size < 2 {
            return Err("grid size must be at least 2".into());
        }
        let inside = |c: &[usize; 2]| c[0] < self.size && c[1] < self.size;
        if !inside(&self.start) || !inside(&self.goal) || !self.walls.iter().all(inside) {
            return Err("start, goal and walls must lie on the grid".into());
        }
        if self.walls.contains(&self.start) || self.walls.contains(&self.goal) {
            return Err("start and goal cannot be walls".into());
        }
        if self.start == self.goal {
            return Err("start and goal must differ".into());
        }
        Ok(())
    }

    pub fn max_steps(&self) -> usize {
        4 * self.size
    }
}

pub struct SparseGridworld {
    config: GridworldConfig,
    spec: EnvSpec,
    wall: Vec<bool>,
    pos: [usize; 2],
    steps: usize,
    done: bool,
}

impl SparseGridworld {
    pub fn new(config: GridworldConfig) -> Self {
        let n = config.size;
        let mut wall = vec![false; n * n];
        for w in &config.walls {
            wall[w[1] * n + w[0]] = true;
        }
        let spec = EnvSpec {
            name: "sparse_gridworld",
            observation_dim: 4,
            action: ActionSpace::Discrete { n: 4 },
            max_steps: config.max_steps(),
            observation_names: ["x", "y", "goal_dx", "goal_dy"].map(String::from).to_vec(),
            reward_semantics: "+1 on entering the goal cell (terminal), 0 otherwise",
        };
        SparseGridworld {
            config,
            spec,
            wall,
            pos: [0, 0],
            steps: 0,
            done: true,
        }
    }

    pub fn config(&self) -> &GridworldConfig {
        &self.config
    }

    pub fn is_wall(&self, cell: [usize; 2]) -> bool {
        self.wall[cell[1] * self.config.size + cell[0]]
    }

    /// Cell reached by taking `action` from `cell`.
    pub fn transition(&self, cell: [usize; 2], action: usize) -> [usize; 2] {
        let (dx, dy) = MOVES[action];
        let n = self.config.size as i64;
        let (x, y) = (cell[0] as i64 + dx, cell[1] as i64 + dy);
        if x < 0 || y < 0 || x >= n || y >= n {
            return cell;
        }
        let next = [x as usize, y as usize];
        if self.is_wall(next) {
            cell
        } else {
            next
        }
    }

    /// Fewest moves from every cell to the goal (`None` when unreachable),
    /// indexed `y * size + x`. Computed by repeated relaxation over
    /// [`Self::transition`].
    pub fn optimal_steps(&self) -> Vec<Option<usize>> {
        let n = self.config.size;
        let goal = self.config.goal;
        let mut dist = vec![None; n * n];
        dist[goal[1] * n + goal[0]] = Some(0);
        loop {
            let mut changed = false;
            for y in 0..n {
                for x in 0..n {
                    if self.is_wall([x, y]) || [x, y] == goal {
                        continue;
                    }
                    let best = (0..4)
                        .filter_map(|a| {
                            let c = self.transition([x, y], a);
                            dist[c[1] * n + c[0]].map(|d: usize| d + 1)
                        })
                        .min();
                    if best.is_some() && (dist[y * n + x].is_none() || best < dist[y * n + x]) {
                        dist[y * n + x] = best;
                        changed = true;
                    }
                }
            }
            if !changed {
                return dist;
            }
        }
    }

    /// Starts an episode from an explicit free cell.
    pub fn reset_to(&mut self, cell: [usize; 2]) -> Vec<f64> {
        assert!(!self.is_wall(cell), "cannot start inside a wall");
        self.pos = cell;
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    pub fn position(&self) -> [usize; 2] {
        self.pos
    }

    fn observation(&self) -> Vec<f64> {
        let scale = (self.config.size - 1) as f64;
        let [x, y] = self.pos;
        let [gx, gy] = self.config.goal;
        vec![
            x as f64 / scale,
            y as f64 / scale,
            (gx as f64 - x as f64) / scale,
            (gy as f64 - y as f64) / scale,
        ]
    }
}

impl Environment for SparseGridworld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let start = if self.config.random_start {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = self.config.size;
            let free: Vec<[usize; 2]> = (0..n * n)
                .map(|i| [i % n, i / n])
                .filter(|&c| !self.is_wall(c) && c != self.config.goal)
                .collect();
            free[rng.random_range(0..free.len())]
        } else {
            self.config.start
        };
        self.reset_to(start)
    }

    fn step(&mut self, action: &Action) -> StepResult {
        assert!(!self.done, "step called on a finished episode");
        let a = match action {
            Action::Discrete(a) if *a < 4 => *a,
            other => panic!("sparse_gridworld expects a discrete action in 0..4, got {other:?}"),
        };
        self.pos = self.transition(self.pos, a);
        self.steps += 1;
        let reached = self.pos == self.config.goal;
        let truncated = !reached && self.steps >= self.config.max_steps();
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
