use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envlab::{CatcherConfig, EnvConfig, GridworldConfig, PointmassConfig};
use crate::evolution::{EvolutionConfig, SelectionParams};
use crate::learners::{FeatureLayout, LearnerConfig, RewardSanitizer};
use crate::neuronet::{Activation, MutationParams};
use crate::symtree::GrowParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Lisr,
    EaOnly,
    SrOnly,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Lisr => "lisr",
            Mode::EaOnly => "ea-only",
            Mode::SrOnly => "sr-only",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lisr" => Ok(Mode::Lisr),
            "ea-only" => Ok(Mode::EaOnly),
            "sr-only" => Ok(Mode::SrOnly),
            other => Err(format!("unknown mode `{other}` (expected lisr, ea-only or sr-only)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvName {
    SparsePointmass,
    #[default]
    SparseGridworld,
    SparseCatcher,
}

/// Every experiment knob in one flat table. All keys are optional in the
/// file; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub mode: Mode,
    /// Generation budget.
    pub generations: u64,
    /// Environment frame budget; the run stops after the generation that
    /// reaches it.
    pub frames: u64,
    pub out_dir: String,
    pub single_threaded: bool,
    /// Checkpoint, champion and tree exports every this many generations
    /// (0 writes them only at the end).
    pub checkpoint_every: u64,
    pub export_trees: bool,

    pub env: EnvName,
    pub grid_size: usize,
    pub grid_start: [usize; 2],
    pub grid_goal: [usize; 2],
    pub grid_random_start: bool,
    pub grid_walls: Vec<[usize; 2]>,
    pub catcher_width: usize,
    pub catcher_height: usize,
    pub catcher_paddle_half_width: usize,
    pub catcher_drops: usize,
    pub pointmass_goal: [f64; 2],
    pub pointmass_goal_radius: f64,
    pub pointmass_start_low: f64,
    pub pointmass_start_high: f64,
    pub pointmass_dt: f64,
    pub pointmass_friction: f64,
    pub pointmass_max_steps: usize,

    /// Total individuals, EA actors plus SR learners.
    pub population_size: usize,
    /// Share of the population that are SR learners in `lisr` mode.
    pub sr_fraction: f64,
    pub elite_fraction: f64,
    pub tournament_size: usize,
    pub mut_prob: f64,
    pub mut_frac: f64,
    pub mut_strength: f64,
    pub supermut_prob: f64,
    pub reset_prob: f64,

    pub tree_max_depth: usize,
    pub operator_prob: f64,
    pub feature_prob: f64,
    pub feature_layout: FeatureLayout,

    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub heads: usize,
    pub explore_noise: f64,
    pub epsilon: f64,
    pub reward_clamp: f64,
    pub reward_nonfinite: f64,
    /// Defaults to 256 for continuous and 64 for discrete actions.
    pub batch_size: Option<usize>,
    pub exploration_steps: u64,
    pub buffer_size: usize,
    pub episodes_per_eval: usize,
    /// Defaults to one update per `batch_size` new transitions.
    pub updates_per_generation: Option<usize>,
    pub explore_during_eval: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let grid = GridworldConfig::default();
        let catcher = CatcherConfig::default();
        let pm = PointmassConfig::default();
        let mutation = MutationParams::default();
        let grow = GrowParams::default();
        let learner = LearnerConfig::default();
        let evo = EvolutionConfig::default();
        ExperimentConfig {
            seed: 0,
            mode: Mode::Lisr,
            generations: 1000,
            frames: 1_000_000,
            out_dir: "runs/lisr".into(),
            single_threaded: false,
            checkpoint_every: 10,
            export_trees: false,
            env: EnvName::SparseGridworld,
            grid_size: grid.size,
            grid_start: grid.start,
            grid_goal: grid.goal,
            grid_random_start: grid.random_start,
            grid_walls: grid.walls,
            catcher_width: catcher.width,
            catcher_height: catcher.height,
            catcher_paddle_half_width: catcher.paddle_half_width,
            catcher_drops: catcher.drops,
            pointmass_goal: pm.goal,
            pointmass_goal_radius: pm.goal_radius,
            pointmass_start_low: pm.start_low,
            pointmass_start_high: pm.start_high,
            pointmass_dt: pm.dt,
            pointmass_friction: pm.friction,
            pointmass_max_steps: pm.max_steps,
            population_size: 50,
            sr_fraction: 0.5,
            elite_fraction: evo.selection.elite_frac,
            tournament_size: evo.selection.tournament_size,
            mut_prob: mutation.mut_prob,
            mut_frac: mutation.mut_frac,
            mut_strength: mutation.mut_strength,
            supermut_prob: mutation.supermut_prob,
            reset_prob: mutation.reset_prob,
            tree_max_depth: evo.tree_max_depth,
            operator_prob: grow.operator_prob,
            feature_prob: grow.feature_prob,
            feature_layout: learner.layout,
            gamma: learner.gamma,
            tau: learner.tau,
            actor_lr: learner.actor_lr,
            critic_lr: learner.critic_lr,
            hidden_sizes: learner.hidden,
            hidden_activation: learner.hidden_activation,
            heads: learner.heads,
            explore_noise: learner.explore_noise,
            epsilon: learner.epsilon,
            reward_clamp: learner.sanitizer.clamp_bound,
            reward_nonfinite: learner.sanitizer.nonfinite_value,
            batch_size: None,
            exploration_steps: evo.exploration_steps,
            buffer_size: evo.buffer_capacity,
            episodes_per_eval: evo.episodes_per_eval,
            updates_per_generation: None,
            explore_during_eval: evo.explore_during_eval,
        }
    }
}

fn probability(field: &'static str, p: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(field, format!("{p} is not a probability in [0, 1]")))
    }
}

fn positive(field: &'static str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{x} must be positive and finite")))
    }
}

fn nonzero(field: &'static str, n: usize) -> Result<(), ConfigError> {
    if n > 0 {
        Ok(())
    } else {
        Err(invalid(field, "must be at least 1"))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Checks every field; the error names the first offending one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.frames == 0 {
            return Err(invalid("frames", "frame budget must be positive"));
        }
        nonzero("population_size", self.population_size)?;
        probability("sr_fraction", self.sr_fraction)?;
        if self.mode == Mode::Lisr {
            let (ea, sr) = self.split();
            if ea == 0 || sr == 0 {
                return Err(invalid("sr_fraction", "lisr mode needs at least one EA actor and one SR learner"));
            }
        }
        probability("elite_fraction", self.elite_fraction)?;
        nonzero("tournament_size", self.tournament_size)?;
        probability("mut_prob", self.mut_prob)?;
        probability("mut_frac", self.mut_frac)?;
        if !(self.mut_strength >= 0.0 && self.mut_strength.is_finite()) {
            return Err(invalid("mut_strength", "must be finite and non-negative"));
        }
        probability("supermut_prob", self.supermut_prob)?;
        probability("reset_prob", self.reset_prob)?;
        probability("operator_prob", self.operator_prob)?;
        probability("feature_prob", self.feature_prob)?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(invalid("gamma", "must lie in [0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(invalid("tau", "must lie in (0, 1]"));
        }
        positive("actor_lr", self.actor_lr)?;
        positive("critic_lr", self.critic_lr)?;
        if self.hidden_sizes.contains(&0) {
            return Err(invalid("hidden_sizes", "layer widths must be positive"));
        }
        nonzero("heads", self.heads)?;
        if !(self.explore_noise >= 0.0 && self.explore_noise.is_finite()) {
            return Err(invalid("explore_noise", "must be finite and non-negative"));
        }
        probability("epsilon", self.epsilon)?;
        positive("reward_clamp", self.reward_clamp)?;
        if !(self.reward_nonfinite.is_finite() && self.reward_nonfinite.abs() <= self.reward_clamp) {
            return Err(invalid("reward_nonfinite", "must be finite and within the reward clamp"));
        }
        if let Some(b) = self.batch_size {
            nonzero("batch_size", b)?;
        }
        nonzero("buffer_size", self.buffer_size)?;
        nonzero("episodes_per_eval", self.episodes_per_eval)?;
        if let Some(u) = self.updates_per_generation {
            nonzero("updates_per_generation", u)?;
        }
        self.env_config()
            .validate()
            .map_err(|reason| invalid(self.env_field(), reason))?;
        Ok(())
    }

    fn env_field(&self) -> &'static str {
        match self.env {
            EnvName::SparsePointmass => "pointmass_*",
            EnvName::SparseGridworld => "grid_*",
            EnvName::SparseCatcher => "catcher_*",
        }
    }

    /// `(k_ea, k_sr)` for the configured mode.
    pub fn split(&self) -> (usize, usize) {
        let k = self.population_size;
        match self.mode {
            Mode::EaOnly => (k, 0),
            Mode::SrOnly => (0, k),
            Mode::Lisr => {
                let sr = (k as f64 * self.sr_fraction).round() as usize;
                (k - sr, sr)
            }
        }
    }

    pub fn env_config(&self) -> EnvConfig {
        match self.env {
            EnvName::SparsePointmass => EnvConfig::SparsePointmass(PointmassConfig {
                goal: self.pointmass_goal,
                goal_radius: self.pointmass_goal_radius,
                start_low: self.pointmass_start_low,
                start_high: self.pointmass_start_high,
                dt: self.pointmass_dt,
                friction: self.pointmass_friction,
                max_steps: self.pointmass_max_steps,
            }),
            EnvName::SparseGridworld => EnvConfig::SparseGridworld(GridworldConfig {
                size: self.grid_size,
                start: self.grid_start,
                goal: self.grid_goal,
                random_start: self.grid_random_start,
                walls: self.grid_walls.clone(),
            }),
            EnvName::SparseCatcher => EnvConfig::SparseCatcher(CatcherConfig {
                width: self.catcher_width,
                height: self.catcher_height,
                paddle_half_width: self.catcher_paddle_half_width,
                drops: self.catcher_drops,
            }),
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.env == EnvName::SparsePointmass
    }

    pub fn resolved_batch_size(&self) -> usize {
        self.batch_size
            .unwrap_or(if self.is_continuous() { 256 } else { 64 })
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        let (k_ea, k_sr) = self.split();
        EvolutionConfig {
            k_ea,
            k_sr,
            selection: SelectionParams {
                elite_frac: self.elite_fraction,
                tournament_size: self.tournament_size,
            },
            mutation: MutationParams {
                mut_prob: self.mut_prob,
                mut_frac: self.mut_frac,
                mut_strength: self.mut_strength,
                supermut_prob: self.supermut_prob,
                reset_prob: self.reset_prob,
            },
            tree_max_depth: self.tree_max_depth,
            grow: GrowParams {
                operator_prob: self.operator_prob,
                feature_prob: self.feature_prob,
            },
            learner: LearnerConfig {
                gamma: self.gamma,
                tau: self.tau,
                actor_lr: self.actor_lr,
                critic_lr: self.critic_lr,
                hidden: self.hidden_sizes.clone(),
                hidden_activation: self.hidden_activation,
                heads: self.heads,
                explore_noise: self.explore_noise,
                epsilon: self.epsilon,
                sanitizer: RewardSanitizer {
                    clamp_bound: self.reward_clamp,
                    nonfinite_value: self.reward_nonfinite,
                },
                layout: self.feature_layout,
            },
            batch_size: self.resolved_batch_size(),
            exploration_steps: self.exploration_steps,
            buffer_capacity: self.buffer_size,
            episodes_per_eval: self.episodes_per_eval,
            updates_per_generation: self.updates_per_generation,
            explore_during_eval: self.explore_during_eval,
            single_threaded: self.single_threaded,
        }
    }

    /// Learning-rate and batch-size grid for this action type: every
    /// combination, as copies of `self`.
    pub fn grid(&self) -> Vec<ExperimentConfig> {
        let (lrs, batches): (&[f64], &[usize]) = if self.is_continuous() {
            (&[1e-3, 1e-4, 3e-5], &[256, 1024])
        } else {
            (&[1e-3, 1e-4], &[64, 256])
        };
        let critic_lrs: &[f64] = if self.is_continuous() { lrs } else { &[1e-3] };
        let mut out = Vec::new();
        for &actor_lr in lrs {
            for &critic_lr in critic_lrs {
                for &batch in batches {
                    out.push(ExperimentConfig {
                        actor_lr,
                        critic_lr: if self.is_continuous() { critic_lr } else { self.critic_lr },
                        batch_size: Some(batch),
                        ..self.clone()
                    });
                }
            }
        }
        out
    }
}
