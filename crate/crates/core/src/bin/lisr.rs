use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lisr::expcli::{export_tree, run_with, write_grid, ExperimentConfig, Mode, TreeTarget};

/// Evolve symbolic intrinsic rewards for policy-gradient learners alongside a
/// neuroevolution population.
#[derive(Parser)]
#[command(name = "lisr", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML config; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// lisr, ea-only or sr-only.
    #[arg(long)]
    mode: Option<Mode>,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    generations: Option<u64>,
    /// Environment frame budget.
    #[arg(long)]
    frames: Option<u64>,
    /// Evaluate and train sequentially (bit-reproducible runs).
    #[arg(long)]
    single_threaded: bool,
    /// Also write every learner's tree to <out>/trees.
    #[arg(long)]
    export_trees: bool,
    /// Continue from <out>/checkpoint if present.
    #[arg(long)]
    resume: bool,
    /// Write the learning-rate / batch-size grid of configs into <out>/grid
    /// instead of running.
    #[arg(long)]
    grid: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Export a reward tree from a run checkpoint.
    Export {
        /// Run directory.
        #[arg(long)]
        run: PathBuf,
        /// Learner slot; the champion's tree when omitted.
        #[arg(long)]
        learner: Option<usize>,
        /// Destination directory (default <run>/trees).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.display().to_string();
    }
    if let Some(g) = args.generations {
        cfg.generations = g;
    }
    if let Some(f) = args.frames {
        cfg.frames = f;
    }
    cfg.single_threaded |= args.single_threaded;
    cfg.export_trees |= args.export_trees;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Some(Command::Export { run, learner, out }) => {
            let target = learner.map_or(TreeTarget::Champion, TreeTarget::Learner);
            match export_tree(&run, target, out.as_deref()) {
                Ok(e) => {
                    print!("{}", e.pseudocode);
                    println!("# {} operators: {}", e.operator_count, e.serialized);
                    for f in e.files {
                        eprintln!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        None => {
            let cfg = match load_config(&cli.run) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if cli.run.grid {
                let dir = PathBuf::from(&cfg.out_dir).join("grid");
                return match write_grid(&cfg, &dir) {
                    Ok(paths) => {
                        for p in paths {
                            println!("{}", p.display());
                        }
                        ExitCode::SUCCESS
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::FAILURE
                    }
                };
            }
            match run_with(&cfg, cli.run.resume) {
                Ok(art) => {
                    let last = art.records.last().map(|r| r.champion_fitness);
                    println!(
                        "{} generations, {} frames, last champion fitness {}",
                        art.records.len(),
                        art.frames,
                        last.map_or("n/a".to_string(), |f| f.to_string())
                    );
                    println!("artifacts in {}", art.run_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
