//! Experiment runner: configuration, run directories, CSV curves,
//! checkpoints and tree exports.
//!
//! A run directory looks like
//!
//! ```text
//! <out_dir>/
//!   config.toml      exact configuration, written before the first generation
//!   curve.csv        one row per generation
//!   losses.csv       one row per learner per generation with updates
//!   checkpoint/      resumable full state (state.json, buffer.bin)
//!   champion/        latest champion: meta.json, genome_<i>.txt, reward.*
//!   trees/           learner_<i>.{tree,pseudo,ops} with --export-trees
//! ```

mod config;
mod export;

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::evolution::{Counters, EvolutionError, GenerationRecord, IndividualKind, Orchestrator};

pub use config::{ConfigError, EnvName, ExperimentConfig, Mode};
pub use export::{export_tree, feature_names, write_champion, write_tree_files, TreeExport, TreeTarget};

pub const CURVE_HEADER: &str = "generation,frames,champion_fitness,champion_kind,champion_id,\
mean_ea_fitness,max_ea_fitness,mean_sr_fitness,max_sr_fitness,mean_intrinsic_reward";
pub const LOSSES_HEADER: &str = "generation,learner,updates,critic_loss,actor_objective,mean_reward,skipped_steps";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Evolution(EvolutionError),
    #[error("{0}")]
    Export(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub run_dir: PathBuf,
    pub config_snapshot: PathBuf,
    pub curve_csv: PathBuf,
    pub losses_csv: PathBuf,
    pub checkpoint_dir: PathBuf,
    pub champion_dir: PathBuf,
    pub trees_dir: PathBuf,
    /// Records of the generations executed by this call (not those restored
    /// from a checkpoint).
    pub records: Vec<GenerationRecord>,
    pub counters: Counters,
    pub frames: u64,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn max(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::max)
}

pub fn curve_row(r: &GenerationRecord) -> String {
    let kind = match r.champion_kind {
        IndividualKind::Ea => "ea",
        IndividualKind::Sr => "sr",
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.generation,
        r.frames,
        r.champion_fitness,
        kind,
        r.champion_id,
        opt(mean(&r.ea_fitness)),
        opt(max(&r.ea_fitness)),
        opt(mean(&r.sr_fitness)),
        opt(max(&r.sr_fitness)),
        opt(r.mean_intrinsic_reward),
    )
}

pub fn loss_rows(r: &GenerationRecord) -> Vec<String> {
    r.losses
        .iter()
        .map(|l| {
            format!(
                "{},{},{},{},{},{},{}",
                r.generation,
                l.learner,
                l.updates,
                l.critic_loss,
                opt(l.actor_objective),
                l.mean_reward,
                l.skipped_steps
            )
        })
        .collect()
}

/// Keeps the header and the rows of generations before `generation`.
fn truncate_csv(path: &Path, header: &str, generation: u64) -> std::io::Result<()> {
    let mut kept = vec![header.to_string()];
    if path.exists() {
        for line in BufReader::new(File::open(path)?).lines().skip(1) {
            let line = line?;
            let g: Option<u64> = line.split(',').next().and_then(|f| f.parse().ok());
            if g.is_some_and(|g| g < generation) {
                kept.push(line);
            }
        }
    }
    fs::write(path, kept.join("\n") + "\n")
}

fn open_append(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(OpenOptions::new().append(true).open(path)?))
}

struct Paths {
    run_dir: PathBuf,
    snapshot: PathBuf,
    curve: PathBuf,
    losses: PathBuf,
    checkpoint: PathBuf,
    champion: PathBuf,
    trees: PathBuf,
}

impl Paths {
    fn new(run_dir: &Path) -> Self {
        Paths {
            run_dir: run_dir.to_path_buf(),
            snapshot: run_dir.join("config.toml"),
            curve: run_dir.join("curve.csv"),
            losses: run_dir.join("losses.csv"),
            checkpoint: run_dir.join("checkpoint"),
            champion: run_dir.join("champion"),
            trees: run_dir.join("trees"),
        }
    }
}

fn write_outputs(o: &Orchestrator, cfg: &ExperimentConfig, paths: &Paths) -> Result<(), RunError> {
    o.save_checkpoint(&paths.checkpoint).map_err(RunError::Evolution)?;
    let layout = o.config().learner.layout;
    if let Some(ch) = o.champion() {
        write_champion(ch, o.spec(), layout, &paths.champion)?;
    }
    if cfg.export_trees {
        let names = feature_names(o.spec(), layout);
        for (i, l) in o.population().sr_learners.iter().enumerate() {
            write_tree_files(&l.tree, &names, &paths.trees, &format!("learner_{i:02}"))?;
        }
    }
    Ok(())
}

/// Runs an experiment from scratch.
pub fn run(config: &ExperimentConfig) -> Result<RunArtifacts, RunError> {
    run_with(config, false)
}

/// Runs an experiment; with `resume`, continues from the checkpoint in the
/// output directory when one exists.
pub fn run_with(config: &ExperimentConfig, resume: bool) -> Result<RunArtifacts, RunError> {
    config.validate()?;
    let paths = Paths::new(Path::new(&config.out_dir));
    fs::create_dir_all(&paths.run_dir)?;

    let resuming = resume && paths.checkpoint.join("state.json").exists();
    let mut orch = if resuming {
        let o = Orchestrator::load_checkpoint(&paths.checkpoint).map_err(RunError::Evolution)?;
        log::info!("resuming {} at generation {}", paths.run_dir.display(), o.generation());
        o
    } else {
        Orchestrator::new(config.evolution_config(), config.env_config(), config.seed).map_err(RunError::Evolution)?
    };
    if !resuming {
        fs::write(&paths.snapshot, config.to_toml())?;
        if paths.checkpoint.exists() {
            fs::remove_dir_all(&paths.checkpoint)?;
        }
    }
    truncate_csv(&paths.curve, CURVE_HEADER, orch.generation())?;
    truncate_csv(&paths.losses, LOSSES_HEADER, orch.generation())?;

    let mut curve = open_append(&paths.curve)?;
    let mut losses = open_append(&paths.losses)?;
    let mut records = Vec::new();
    while orch.generation() < config.generations && orch.frames() < config.frames {
        let rec = orch.run_generation().map_err(RunError::Evolution)?;
        writeln!(curve, "{}", curve_row(&rec))?;
        for row in loss_rows(&rec) {
            writeln!(losses, "{row}")?;
        }
        curve.flush()?;
        losses.flush()?;
        log::info!(
            "generation {} frames {} champion {} ({:?} {})",
            rec.generation,
            rec.frames,
            rec.champion_fitness,
            rec.champion_kind,
            rec.champion_id
        );
        records.push(rec);
        if config.checkpoint_every > 0 && orch.generation() % config.checkpoint_every == 0 {
            write_outputs(&orch, config, &paths)?;
        }
    }
    write_outputs(&orch, config, &paths)?;

    Ok(RunArtifacts {
        run_dir: paths.run_dir,
        config_snapshot: paths.snapshot,
        curve_csv: paths.curve,
        losses_csv: paths.losses,
        checkpoint_dir: paths.checkpoint,
        champion_dir: paths.champion,
        trees_dir: paths.trees,
        records,
        counters: orch.counters(),
        frames: orch.frames(),
    })
}

/// Writes one config file per learning-rate / batch-size combination into
/// `dir` and returns their paths.
pub fn write_grid(config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir)?;
    let base = PathBuf::from(&config.out_dir);
    let mut out = Vec::new();
    for (i, mut c) in config.grid().into_iter().enumerate() {
        c.out_dir = base.join(format!("grid_{i:03}")).display().to_string();
        let path = dir.join(format!("grid_{i:03}.toml"));
        fs::write(&path, c.to_toml())?;
        out.push(path);
    }
    Ok(out)
}
