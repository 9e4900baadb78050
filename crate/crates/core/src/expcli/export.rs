use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::envlab::EnvSpec;
use crate::evolution::{CheckpointSummary, Champion, ChampionPolicy, EvolutionError};
use crate::learners::FeatureLayout;
use crate::neuronet::write_genome;
use crate::symtree::{serialize, unroll, SymTree};

use super::RunError;

/// Which tree of a run to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeTarget {
    Champion,
    Learner(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeExport {
    pub serialized: String,
    pub pseudocode: String,
    pub operator_count: usize,
    pub files: Vec<PathBuf>,
}

/// Feature names for a tree over `spec` observations under `layout`.
pub fn feature_names(spec: &EnvSpec, layout: FeatureLayout) -> Vec<String> {
    layout.feature_names(&spec.observation_names, spec.action.feature_len())
}

/// Writes `<stem>.tree` (prefix form), `<stem>.pseudo` (unrolled) and
/// `<stem>.ops` (operator count) into `dir`.
pub fn write_tree_files(tree: &SymTree, names: &[String], dir: &Path, stem: &str) -> std::io::Result<TreeExport> {
    fs::create_dir_all(dir)?;
    let serialized = serialize(tree);
    let pseudocode = unroll(tree, names);
    let operator_count = tree.operator_count();
    let files = vec![
        dir.join(format!("{stem}.tree")),
        dir.join(format!("{stem}.pseudo")),
        dir.join(format!("{stem}.ops")),
    ];
    fs::write(&files[0], format!("{serialized}\n"))?;
    fs::write(&files[1], &pseudocode)?;
    fs::write(&files[2], format!("{operator_count}\n"))?;
    Ok(TreeExport {
        serialized,
        pseudocode,
        operator_count,
        files,
    })
}

#[derive(Serialize)]
struct ChampionMeta<'a> {
    id: usize,
    kind: &'a crate::evolution::IndividualKind,
    fitness: f64,
    generation: u64,
    networks: usize,
}

/// Champion directory: `meta.json`, `genome_<i>.txt` per network, and the
/// reward tree files when the champion is an SR learner.
pub fn write_champion(champion: &Champion, spec: &EnvSpec, layout: FeatureLayout, dir: &Path) -> std::io::Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::create_dir_all(dir)?;
    let networks = match &champion.policy {
        ChampionPolicy::Ea { genome } => vec![genome],
        ChampionPolicy::Sr { networks, .. } => networks.iter().collect(),
    };
    for (i, net) in networks.iter().enumerate() {
        fs::write(dir.join(format!("genome_{i}.txt")), write_genome(net))?;
    }
    let meta = ChampionMeta {
        id: champion.id,
        kind: &champion.kind,
        fitness: champion.fitness,
        generation: champion.generation,
        networks: networks.len(),
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta).expect("plain data") + "\n")?;
    if let ChampionPolicy::Sr { tree, .. } = &champion.policy {
        write_tree_files(tree, &feature_names(spec, layout), dir, "reward")?;
    }
    Ok(())
}

/// Exports a tree from the checkpoint in `run_dir` into `out_dir`
/// (default `<run_dir>/trees`).
pub fn export_tree(run_dir: &Path, target: TreeTarget, out_dir: Option<&Path>) -> Result<TreeExport, RunError> {
    let ckpt = run_dir.join("checkpoint");
    let summary = CheckpointSummary::read(&ckpt)?;
    let spec = summary.env.spec();
    let names = feature_names(&spec, summary.config.learner.layout);
    let default_out = run_dir.join("trees");
    let out = out_dir.unwrap_or(&default_out);
    let (tree, stem) = match target {
        TreeTarget::Champion => match summary.champion {
            Some(Champion {
                policy: ChampionPolicy::Sr { tree, .. },
                ..
            }) => (tree, "champion".to_string()),
            Some(_) => {
                return Err(RunError::Export(
                    "the champion is an EA actor and has no reward tree".into(),
                ))
            }
            None => return Err(RunError::Export("no generation has completed yet".into())),
        },
        TreeTarget::Learner(i) => {
            let learner = summary.population.sr_learners.get(i).ok_or_else(|| {
                RunError::Export(format!(
                    "learner {i} does not exist (the run has {} SR learners)",
                    summary.population.sr_learners.len()
                ))
            })?;
            (learner.tree.clone(), format!("learner_{i:02}"))
        }
    };
    Ok(write_tree_files(&tree, &names, out, &stem)?)
}

impl From<EvolutionError> for RunError {
    fn from(e: EvolutionError) -> Self {
        RunError::Evolution(e)
    }
}
