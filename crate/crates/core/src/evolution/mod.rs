//! The generation loop: evaluate the EA population, select and vary it,
//! train the SR learners on their trees' rewards, evaluate them, evolve the
//! tree portfolio and pick a champion.

mod evaluate;
mod select;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envlab::{EnvConfig, EnvSpec};
use crate::learners::{policy_genome, LearnerConfig, LearnerError, LearnerState};
use crate::neuronet::{MlpGenome, MutationParams, NetError};
use crate::replay::{CyclicBuffer, ReplayError};
use crate::symtree::{random_tree, GrowParams, SymTree};

pub use evaluate::{evaluate, rollout, FitnessScore, Policy, Rollout};
pub use select::{
    elite_count, evolve_sr_portfolio, rank_and_select_ea, rank_descending, select_champion, tournament,
    SelectionParams, VariationCounts,
};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub k_ea: usize,
    pub k_sr: usize,
    pub selection: SelectionParams,
    pub mutation: MutationParams,
    pub tree_max_depth: usize,
    pub grow: GrowParams,
    pub learner: LearnerConfig,
    pub batch_size: usize,
    /// Environment frames during which SR learners act uniformly at random.
    pub exploration_steps: u64,
    pub buffer_capacity: usize,
    pub episodes_per_eval: usize,
    /// Gradient updates per learner per generation; `None` means one per
    /// `batch_size` new transitions (at least one).
    pub updates_per_generation: Option<usize>,
    /// SR learners keep their exploration noise while being evaluated.
    pub explore_during_eval: bool,
    pub single_threaded: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            k_ea: 25,
            k_sr: 25,
            selection: SelectionParams::default(),
            mutation: MutationParams::default(),
            tree_max_depth: 3,
            grow: GrowParams::default(),
            learner: LearnerConfig::default(),
            batch_size: 256,
            exploration_steps: 5000,
            buffer_capacity: 1_000_000,
            episodes_per_eval: 1,
            updates_per_generation: None,
            explore_during_eval: true,
            single_threaded: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.k_ea + self.k_sr == 0 {
            return Err("population is empty".into());
        }
        if !(0.0..=1.0).contains(&self.selection.elite_frac) {
            return Err("elite fraction must lie in [0, 1]".into());
        }
        if self.selection.tournament_size == 0 {
            return Err("tournament size must be positive".into());
        }
        let m = &self.mutation;
        for (name, p) in [
            ("mut_prob", m.mut_prob),
            ("mut_frac", m.mut_frac),
            ("supermut_prob", m.supermut_prob),
            ("reset_prob", m.reset_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        if !(m.mut_strength >= 0.0 && m.mut_strength.is_finite()) {
            return Err("mut_strength must be finite and non-negative".into());
        }
        for (name, p) in [("operator_prob", self.grow.operator_prob), ("feature_prob", self.grow.feature_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 || self.episodes_per_eval == 0 {
            return Err("batch size, buffer capacity and episodes per evaluation must be positive".into());
        }
        self.learner.validate()
    }
}

/// Which population an individual belongs to. Ids number EA actors first,
/// then SR learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndividualKind {
    Ea,
    Sr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub ea_actors: Vec<MlpGenome>,
    pub sr_learners: Vec<LearnerState>,
}

impl Population {
    pub fn size(&self) -> usize {
        self.ea_actors.len() + self.sr_learners.len()
    }

    pub fn kind_of(&self, id: usize) -> (IndividualKind, usize) {
        if id < self.ea_actors.len() {
            (IndividualKind::Ea, id)
        } else {
            (IndividualKind::Sr, id - self.ea_actors.len())
        }
    }
}

/// Behaviour of a champion, kept so it can be checkpointed after the
/// population has moved on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChampionPolicy {
    Ea { genome: MlpGenome },
    Sr { networks: Vec<MlpGenome>, tree: SymTree },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Champion {
    pub id: usize,
    pub kind: IndividualKind,
    pub fitness: f64,
    pub generation: u64,
    pub policy: ChampionPolicy,
}

/// Update statistics of one learner over one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerLossRow {
    pub learner: usize,
    pub updates: usize,
    /// Mean over updates and critics / heads.
    pub critic_loss: f64,
    pub actor_objective: Option<f64>,
    pub mean_reward: f64,
    pub skipped_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    pub ea_fitness: Vec<f64>,
    pub sr_fitness: Vec<f64>,
    pub champion_id: usize,
    pub champion_kind: IndividualKind,
    pub champion_fitness: f64,
    /// Environment frames since the start of the run.
    pub frames: u64,
    pub wall_clock_secs: f64,
    /// Mean sanitised intrinsic reward over this generation's updates.
    pub mean_intrinsic_reward: Option<f64>,
    pub losses: Vec<LearnerLossRow>,
}

impl GenerationRecord {
    pub fn all_fitness(&self) -> Vec<f64> {
        self.ea_fitness.iter().chain(&self.sr_fitness).copied().collect()
    }
}

/// Run-wide event counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub gradient_updates: u64,
    pub genome_crossovers: u64,
    pub genome_mutations: u64,
    pub tree_crossovers: u64,
    pub tree_mutations: u64,
    pub reinitializations: u64,
    pub skipped_steps: u64,
    pub evaluations: u64,
}

#[derive(Serialize, Deserialize)]
struct SavedState {
    config: EvolutionConfig,
    env: EnvConfig,
    population: Population,
    rng: ChaCha8Rng,
    generation: u64,
    frames: u64,
    frames_since_update: u64,
    counters: Counters,
    champion: Option<Champion>,
}

/// The parts of a run checkpoint needed to inspect it, read without
/// loading the replay buffer.
#[derive(Debug, Clone, Deserialize)]
pub struct CheckpointSummary {
    pub config: EvolutionConfig,
    pub env: EnvConfig,
    pub population: Population,
    pub generation: u64,
    pub frames: u64,
    pub counters: Counters,
    pub champion: Option<Champion>,
}

impl CheckpointSummary {
    pub fn read(dir: &Path) -> Result<Self, EvolutionError> {
        let file = File::open(dir.join("state.json"))
            .map_err(|e| EvolutionError::Checkpoint(format!("{}: {e}", dir.join("state.json").display())))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| EvolutionError::Checkpoint(e.to_string()))
    }
}

/// Owns the populations, the shared buffer and the master RNG.
pub struct Orchestrator {
    config: EvolutionConfig,
    env: EnvConfig,
    spec: EnvSpec,
    population: Population,
    buffer: CyclicBuffer,
    rng: ChaCha8Rng,
    generation: u64,
    frames: u64,
    frames_since_update: u64,
    counters: Counters,
    champion: Option<Champion>,
}

impl Orchestrator {
    pub fn new(config: EvolutionConfig, env: EnvConfig, seed: u64) -> Result<Self, EvolutionError> {
        config.validate().map_err(EvolutionError::Config)?;
        env.validate().map_err(EvolutionError::Config)?;
        let spec = env.spec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ea_actors = (0..config.k_ea)
            .map(|_| policy_genome(&spec, &config.learner.hidden, config.learner.hidden_activation, &mut rng))
            .collect::<Result<Vec<_>, _>>()?;
        let feature_dim = config
            .learner
            .layout
            .feature_dim(spec.observation_dim, spec.action.feature_len());
        let mut sr_learners = Vec::with_capacity(config.k_sr);
        for _ in 0..config.k_sr {
            let tree = random_tree(feature_dim, config.tree_max_depth, &config.grow, &mut rng);
            sr_learners.push(LearnerState::new(tree, &spec, config.learner.clone(), &mut rng)?);
        }
        let buffer = CyclicBuffer::new(config.buffer_capacity, spec.observation_dim, spec.action.clone())?;
        Ok(Orchestrator {
            config,
            env,
            spec,
            population: Population { ea_actors, sr_learners },
            buffer,
            rng,
            generation: 0,
            frames: 0,
            frames_since_update: 0,
            counters: Counters::default(),
            champion: None,
        })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn env_config(&self) -> &EnvConfig {
        &self.env
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn population_mut(&mut self) -> &mut Population {
        &mut self.population
    }

    pub fn buffer(&self) -> &CyclicBuffer {
        &self.buffer
    }

    pub fn buffer_mut(&mut self) -> &mut CyclicBuffer {
        &mut self.buffer
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Champion of the most recent generation.
    pub fn champion(&self) -> Option<&Champion> {
        self.champion.as_ref()
    }

    fn parallel(&self) -> bool {
        !self.config.single_threaded
    }

    /// Evaluates each policy on its own environment instance and appends
    /// the episodes to the buffer in population order.
    fn evaluate_all(&mut self, policies: &[Policy<'_>]) -> Result<Vec<f64>, EvolutionError> {
        let seeds: Vec<u64> = policies.iter().map(|_| self.rng.random()).collect();
        let episodes = self.config.episodes_per_eval;
        let env = &self.env;
        let run = |(p, s): (&Policy<'_>, &u64)| rollout(*p, env.build().as_mut(), episodes, *s);
        let rollouts: Vec<Rollout> = if self.parallel() {
            policies.par_iter().zip(seeds.par_iter()).map(run).collect()
        } else {
            policies.iter().zip(seeds.iter()).map(run).collect()
        };
        let mut fitness = Vec::with_capacity(rollouts.len());
        for r in rollouts {
            let n = r.transitions.len() as u64;
            for t in r.transitions {
                self.buffer.append(t)?;
            }
            self.frames += n;
            self.frames_since_update += n;
            self.counters.evaluations += 1;
            fitness.push(r.fitness.value);
        }
        Ok(fitness)
    }

    fn evaluate_ea(&mut self) -> Result<Vec<f64>, EvolutionError> {
        let actors = std::mem::take(&mut self.population.ea_actors);
        let policies: Vec<Policy<'_>> = actors.iter().map(Policy::Genome).collect();
        let out = self.evaluate_all(&policies);
        self.population.ea_actors = actors;
        out
    }

    fn evaluate_sr(&mut self) -> Result<Vec<f64>, EvolutionError> {
        let learners = std::mem::take(&mut self.population.sr_learners);
        let warmup = self.frames < self.config.exploration_steps;
        let explore = self.config.explore_during_eval;
        let policies: Vec<Policy<'_>> = learners
            .iter()
            .map(|l| if warmup { Policy::Uniform } else { Policy::Learner { learner: l, explore } })
            .collect();
        let out = self.evaluate_all(&policies);
        self.population.sr_learners = learners;
        out
    }

    fn updates_this_generation(&self) -> usize {
        if self.buffer.len() < self.config.batch_size {
            return 0;
        }
        self.config
            .updates_per_generation
            .unwrap_or_else(|| (self.frames_since_update as usize / self.config.batch_size).max(1))
    }

    fn train_learners(&mut self) -> Vec<LearnerLossRow> {
        let n_updates = self.updates_this_generation();
        if self.population.sr_learners.is_empty() || n_updates == 0 {
            return Vec::new();
        }
        self.frames_since_update = 0;
        let seeds: Vec<u64> = self.population.sr_learners.iter().map(|_| self.rng.random()).collect();
        let buffer = &self.buffer;
        let batch_size = self.config.batch_size;
        let train = |(i, (learner, seed)): (usize, (&mut LearnerState, &u64))| {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut row = LearnerLossRow {
                learner: i,
                updates: n_updates,
                critic_loss: 0.0,
                actor_objective: None,
                mean_reward: 0.0,
                skipped_steps: 0,
            };
            let mut actor_sum = 0.0;
            for _ in 0..n_updates {
                let batch = buffer
                    .sample_minibatch(batch_size, &mut rng)
                    .expect("buffer holds at least one batch");
                let r = learner.update(&batch);
                row.critic_loss += r.critic_losses.iter().sum::<f64>() / r.critic_losses.len() as f64;
                row.mean_reward += r.mean_reward;
                row.skipped_steps += r.skipped_steps;
                if let Some(a) = r.actor_objective {
                    actor_sum += a;
                    row.actor_objective = Some(actor_sum);
                }
            }
            let n = n_updates as f64;
            row.critic_loss /= n;
            row.mean_reward /= n;
            row.actor_objective = row.actor_objective.map(|a| a / n);
            row
        };
        let learners = &mut self.population.sr_learners;
        let rows: Vec<LearnerLossRow> = if !self.config.single_threaded {
            learners.par_iter_mut().zip(seeds.par_iter()).enumerate().map(train).collect()
        } else {
            learners.iter_mut().zip(seeds.iter()).enumerate().map(train).collect()
        };
        self.counters.gradient_updates += (n_updates * rows.len()) as u64;
        self.counters.skipped_steps += rows.iter().map(|r| r.skipped_steps as u64).sum::<u64>();

        for i in 0..self.population.sr_learners.len() {
            if !self.population.sr_learners[i].is_finite() {
                log::warn!("learner {i} diverged; reinitialising its networks");
                let spec = self.spec.clone();
                self.population.sr_learners[i]
                    .reinitialize(&spec, &mut self.rng)
                    .expect("architecture was valid at construction");
                self.counters.reinitializations += 1;
            }
        }
        rows
    }

    /// Runs one full generation.
    pub fn run_generation(&mut self) -> Result<GenerationRecord, EvolutionError> {
        let start = Instant::now();

        let ea_fitness = self.evaluate_ea()?;
        let ea_champion = (!ea_fitness.is_empty()).then(|| {
            let i = select_champion(&ea_fitness);
            (i, self.population.ea_actors[i].clone())
        });
        if !self.population.ea_actors.is_empty() {
            let (next, counts) = rank_and_select_ea(
                &self.population.ea_actors,
                &ea_fitness,
                &self.config.selection,
                &self.config.mutation,
                &mut self.rng,
            );
            self.population.ea_actors = next;
            self.counters.genome_crossovers += counts.crossovers;
            self.counters.genome_mutations += counts.mutations;
        }

        let losses = self.train_learners();

        let sr_fitness = self.evaluate_sr()?;
        let sr_champion = (!sr_fitness.is_empty()).then(|| {
            let i = select_champion(&sr_fitness);
            let l = &self.population.sr_learners[i];
            (i, l.policy_networks().into_iter().cloned().collect::<Vec<_>>(), l.tree.clone())
        });
        if !self.population.sr_learners.is_empty() {
            let trees: Vec<SymTree> = self.population.sr_learners.iter().map(|l| l.tree.clone()).collect();
            let (next, counts) = evolve_sr_portfolio(
                &trees,
                &sr_fitness,
                &self.config.selection,
                self.config.tree_max_depth,
                &self.config.grow,
                &mut self.rng,
            );
            for (l, t) in self.population.sr_learners.iter_mut().zip(next) {
                l.tree = t;
            }
            self.counters.tree_crossovers += counts.crossovers;
            self.counters.tree_mutations += counts.mutations;
        }

        let all: Vec<f64> = ea_fitness.iter().chain(&sr_fitness).copied().collect();
        let champion_id = select_champion(&all);
        let k_ea = ea_fitness.len();
        let (kind, policy) = if champion_id < k_ea {
            let (_, genome) = ea_champion.expect("EA champion exists");
            (IndividualKind::Ea, ChampionPolicy::Ea { genome })
        } else {
            let (_, networks, tree) = sr_champion.expect("SR champion exists");
            (IndividualKind::Sr, ChampionPolicy::Sr { networks, tree })
        };
        let champion_fitness = all[champion_id];
        self.champion = Some(Champion {
            id: champion_id,
            kind,
            fitness: champion_fitness,
            generation: self.generation,
            policy,
        });

        let mean_intrinsic_reward =
            (!losses.is_empty()).then(|| losses.iter().map(|r| r.mean_reward).sum::<f64>() / losses.len() as f64);
        let record = GenerationRecord {
            generation: self.generation,
            ea_fitness,
            sr_fitness,
            champion_id,
            champion_kind: kind,
            champion_fitness,
            frames: self.frames,
            wall_clock_secs: start.elapsed().as_secs_f64(),
            mean_intrinsic_reward,
            losses,
        };
        self.generation += 1;
        Ok(record)
    }

    /// Writes the full run state (`state.json`, `buffer.bin`) into `dir`,
    /// replacing any previous checkpoint there only once both files are
    /// complete.
    pub fn save_checkpoint(&self, dir: &Path) -> Result<(), EvolutionError> {
        fs::create_dir_all(dir)?;
        let state = SavedState {
            config: self.config.clone(),
            env: self.env.clone(),
            population: self.population.clone(),
            rng: self.rng.clone(),
            generation: self.generation,
            frames: self.frames,
            frames_since_update: self.frames_since_update,
            counters: self.counters,
            champion: self.champion.clone(),
        };
        let tmp_state = dir.join("state.json.tmp");
        let tmp_buf = dir.join("buffer.bin.tmp");
        serde_json::to_writer(BufWriter::new(File::create(&tmp_state)?), &state)
            .map_err(|e| EvolutionError::Checkpoint(e.to_string()))?;
        self.buffer.dump(BufWriter::new(File::create(&tmp_buf)?))?;
        fs::rename(tmp_buf, dir.join("buffer.bin"))?;
        fs::rename(tmp_state, dir.join("state.json"))?;
        Ok(())
    }

    pub fn load_checkpoint(dir: &Path) -> Result<Self, EvolutionError> {
        let state: SavedState = serde_json::from_reader(BufReader::new(File::open(dir.join("state.json"))?))
            .map_err(|e| EvolutionError::Checkpoint(e.to_string()))?;
        let buffer = CyclicBuffer::restore(BufReader::new(File::open(dir.join("buffer.bin"))?))?;
        let spec = state.env.spec();
        Ok(Orchestrator {
            config: state.config,
            env: state.env,
            spec,
            population: state.population,
            buffer,
            rng: state.rng,
            generation: state.generation,
            frames: state.frames,
            frames_since_update: state.frames_since_update,
            counters: state.counters,
            champion: state.champion,
        })
    }
}
