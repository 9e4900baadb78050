//! C ABI over the `lisr` crate.
//!
//! Objects are handed out as opaque pointers that the caller releases with
//! the matching `*_free` function. Every fallible call returns a
//! [`LisrStatus`]; on failure, [`lisr_last_error`] describes what went wrong
//! on the calling thread. Strings returned through out-parameters are owned
//! by the caller and released with [`lisr_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use lisr::evolution::{ChampionPolicy, GenerationRecord, IndividualKind, Orchestrator};
use lisr::expcli::{self, ExperimentConfig};
use lisr::symtree::{self, GrowParams, SymTree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LisrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ConfigError = 4,
    IoError = 5,
    RunError = 6,
    Panic = 7,
}

/// A symbolic reward tree.
pub struct LisrTree(SymTree);

/// An experiment that can be advanced one generation at a time.
pub struct LisrExperiment {
    orchestrator: Orchestrator,
}

/// Summary of one generation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LisrGeneration {
    pub generation: u64,
    pub frames: u64,
    pub champion_id: u64,
    /// 1 when the champion is an SR learner, 0 for an EA actor.
    pub champion_is_sr: u8,
    pub champion_fitness: f64,
    /// NaN when the population has no EA actors.
    pub mean_ea_fitness: f64,
    pub max_ea_fitness: f64,
    /// NaN when the population has no SR learners.
    pub mean_sr_fitness: f64,
    pub max_sr_fitness: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("interior NULs removed"));
}

fn fail(status: LisrStatus, msg: impl Into<String>) -> LisrStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> LisrStatus) -> LisrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(LisrStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LisrStatus> {
    if s.is_null() {
        return Err(fail(LisrStatus::NullPointer, "string argument is NULL"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(LisrStatus::InvalidArgument, "string argument is not valid UTF-8"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(LisrStatus::NullPointer, concat!("`", stringify!($p), "` is NULL")),
        }
    };
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            return fail(LisrStatus::NullPointer, concat!("`", stringify!($p), "` is NULL"));
        }
    };
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lisr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lisr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
///
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn lisr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a tree in prefix form, e.g. `(add (cos f3) c1)`.
///
/// # Safety
///
/// `text` must be NULL or a NUL-terminated string; `out` must be NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_parse(text: *const c_char, feature_dim: usize, out: *mut *mut LisrTree) -> LisrStatus {
    guard(|| {
        out_ptr!(out);
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match symtree::deserialize(text, feature_dim) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(LisrTree(t)));
                LisrStatus::Ok
            }
            Err(e) => fail(LisrStatus::ParseError, e.to_string()),
        }
    })
}

/// Grows a random tree with the default operator and feature probabilities.
///
/// # Safety
///
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_random(feature_dim: usize, max_depth: usize, seed: u64, out: *mut *mut LisrTree) -> LisrStatus {
    guard(|| {
        out_ptr!(out);
        if feature_dim == 0 {
            return fail(LisrStatus::InvalidArgument, "feature_dim must be positive");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = symtree::random_tree(feature_dim, max_depth, &GrowParams::default(), &mut rng);
        *out = Box::into_raw(Box::new(LisrTree(t)));
        LisrStatus::Ok
    })
}

/// Subtree mutation of `tree` into a new tree.
///
/// # Safety
///
/// `tree` must be NULL or a live tree; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_mutate(tree: *const LisrTree, max_depth: usize, seed: u64, out: *mut *mut LisrTree) -> LisrStatus {
    guard(|| {
        let tree = deref!(tree);
        out_ptr!(out);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = symtree::mutate_tree(&tree.0, max_depth, &GrowParams::default(), &mut rng);
        *out = Box::into_raw(Box::new(LisrTree(t)));
        LisrStatus::Ok
    })
}

/// Subtree crossover: a random subtree of `donor` replaces one of
/// `recipient`'s.
///
/// # Safety
///
/// `recipient` and `donor` must be NULL or live trees; `out` must be NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_crossover(
    recipient: *const LisrTree,
    donor: *const LisrTree,
    max_depth: usize,
    seed: u64,
    out: *mut *mut LisrTree,
) -> LisrStatus {
    guard(|| {
        let recipient = deref!(recipient);
        let donor = deref!(donor);
        out_ptr!(out);
        if recipient.0.feature_dim() != donor.0.feature_dim() {
            return fail(LisrStatus::InvalidArgument, "trees have different feature dimensions");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = symtree::crossover_trees(&recipient.0, &donor.0, max_depth, &mut rng);
        *out = Box::into_raw(Box::new(LisrTree(t)));
        LisrStatus::Ok
    })
}

/// Releases a tree. NULL is ignored.
///
/// # Safety
///
/// `tree` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_free(tree: *mut LisrTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Evaluates the tree on `len` features.
///
/// # Safety
///
/// `tree` must be NULL or live; `features` must point to `len` doubles;
/// `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_evaluate(tree: *const LisrTree, features: *const f64, len: usize, out: *mut f64) -> LisrStatus {
    guard(|| {
        let tree = deref!(tree);
        out_ptr!(out);
        if features.is_null() {
            return fail(LisrStatus::NullPointer, "`features` is NULL");
        }
        if len != tree.0.feature_dim() {
            return fail(
                LisrStatus::InvalidArgument,
                format!("tree expects {} features, got {len}", tree.0.feature_dim()),
            );
        }
        *out = tree.0.evaluate(std::slice::from_raw_parts(features, len));
        LisrStatus::Ok
    })
}

/// Operator layers on the deepest path, node count, operator count and
/// feature dimension; any out-pointer may be NULL.
///
/// # Safety
///
/// `tree` must be NULL or live; non-NULL out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_stats(
    tree: *const LisrTree,
    depth: *mut usize,
    nodes: *mut usize,
    operators: *mut usize,
    feature_dim: *mut usize,
) -> LisrStatus {
    guard(|| {
        let tree = deref!(tree);
        for (p, v) in [
            (depth, tree.0.depth()),
            (nodes, tree.0.node_count()),
            (operators, tree.0.operator_count()),
            (feature_dim, tree.0.feature_dim()),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        LisrStatus::Ok
    })
}

/// Prefix form of the tree. Free the result with [`lisr_string_free`].
///
/// # Safety
///
/// `tree` must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_serialize(tree: *const LisrTree, out: *mut *mut c_char) -> LisrStatus {
    guard(|| {
        let tree = deref!(tree);
        out_ptr!(out);
        *out = to_c_string(symtree::serialize(&tree.0));
        LisrStatus::Ok
    })
}

/// Unrolled pseudocode with features named `s_0, s_1, ...`. Free the result
/// with [`lisr_string_free`].
///
/// # Safety
///
/// `tree` must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_tree_unroll(tree: *const LisrTree, out: *mut *mut c_char) -> LisrStatus {
    guard(|| {
        let tree = deref!(tree);
        out_ptr!(out);
        let names = symtree::default_feature_names(tree.0.feature_dim());
        *out = to_c_string(symtree::unroll(&tree.0, &names));
        LisrStatus::Ok
    })
}

fn parse_config(toml: *const c_char) -> Result<ExperimentConfig, LisrStatus> {
    let cfg = if toml.is_null() {
        ExperimentConfig::default()
    } else {
        let text = unsafe { read_str(toml)? };
        ExperimentConfig::from_toml(text).map_err(|e| fail(LisrStatus::ConfigError, e.to_string()))?
    };
    cfg.validate().map_err(|e| fail(LisrStatus::ConfigError, e.to_string()))?;
    Ok(cfg)
}

/// Creates an experiment from a TOML config (NULL for all defaults). The
/// output directory and budgets in the config are not used; advance it with
/// [`lisr_experiment_step`].
///
/// # Safety
///
/// `config_toml` must be NULL or a NUL-terminated string; `out` must be NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_experiment_new(config_toml: *const c_char, out: *mut *mut LisrExperiment) -> LisrStatus {
    guard(|| {
        out_ptr!(out);
        let cfg = match parse_config(config_toml) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match Orchestrator::new(cfg.evolution_config(), cfg.env_config(), cfg.seed) {
            Ok(o) => {
                *out = Box::into_raw(Box::new(LisrExperiment { orchestrator: o }));
                LisrStatus::Ok
            }
            Err(e) => fail(LisrStatus::ConfigError, e.to_string()),
        }
    })
}

fn summarize(r: &GenerationRecord) -> LisrGeneration {
    let stats = |v: &[f64]| {
        if v.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (v.iter().sum::<f64>() / v.len() as f64, v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        }
    };
    let (mean_ea, max_ea) = stats(&r.ea_fitness);
    let (mean_sr, max_sr) = stats(&r.sr_fitness);
    LisrGeneration {
        generation: r.generation,
        frames: r.frames,
        champion_id: r.champion_id as u64,
        champion_is_sr: u8::from(r.champion_kind == IndividualKind::Sr),
        champion_fitness: r.champion_fitness,
        mean_ea_fitness: mean_ea,
        max_ea_fitness: max_ea,
        mean_sr_fitness: mean_sr,
        max_sr_fitness: max_sr,
    }
}

/// Runs one generation. `out` may be NULL.
///
/// # Safety
///
/// `exp` must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_experiment_step(exp: *mut LisrExperiment, out: *mut LisrGeneration) -> LisrStatus {
    guard(|| {
        let exp = match exp.as_mut() {
            Some(e) => e,
            None => return fail(LisrStatus::NullPointer, "`exp` is NULL"),
        };
        match exp.orchestrator.run_generation() {
            Ok(r) => {
                if !out.is_null() {
                    *out = summarize(&r);
                }
                LisrStatus::Ok
            }
            Err(e) => fail(LisrStatus::RunError, e.to_string()),
        }
    })
}

/// Copy of the reward tree of the latest champion. Fails with
/// `InvalidArgument` when no generation has run or the champion is an EA
/// actor.
///
/// # Safety
///
/// `exp` must be NULL or live; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_experiment_champion_tree(exp: *const LisrExperiment, out: *mut *mut LisrTree) -> LisrStatus {
    guard(|| {
        let exp = deref!(exp);
        out_ptr!(out);
        match exp.orchestrator.champion().map(|c| &c.policy) {
            Some(ChampionPolicy::Sr { tree, .. }) => {
                *out = Box::into_raw(Box::new(LisrTree(tree.clone())));
                LisrStatus::Ok
            }
            Some(ChampionPolicy::Ea { .. }) => fail(LisrStatus::InvalidArgument, "the champion is an EA actor"),
            None => fail(LisrStatus::InvalidArgument, "no generation has run yet"),
        }
    })
}

/// Writes a resumable checkpoint of the experiment into `dir`.
///
/// # Safety
///
/// `exp` must be NULL or live; `dir` must be NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lisr_experiment_save(exp: *const LisrExperiment, dir: *const c_char) -> LisrStatus {
    guard(|| {
        let exp = deref!(exp);
        let dir = match read_str(dir) {
            Ok(d) => d,
            Err(s) => return s,
        };
        match exp.orchestrator.save_checkpoint(Path::new(dir)) {
            Ok(()) => LisrStatus::Ok,
            Err(e) => fail(LisrStatus::IoError, e.to_string()),
        }
    })
}

/// Releases an experiment. NULL is ignored.
///
/// # Safety
///
/// `exp` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn lisr_experiment_free(exp: *mut LisrExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Runs a complete experiment from a TOML config and writes its artifacts
/// to the configured output directory, like the `lisr` command.
/// `generations_run` may be NULL.
///
/// # Safety
///
/// `config_toml` must be NULL or a NUL-terminated string; `generations_run`
/// must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lisr_run(config_toml: *const c_char, generations_run: *mut u64) -> LisrStatus {
    guard(|| {
        let cfg = match parse_config(config_toml) {
            Ok(c) => c,
            Err(s) => return s,
        };
        match expcli::run(&cfg) {
            Ok(art) => {
                if !generations_run.is_null() {
                    *generations_run = art.records.len() as u64;
                }
                LisrStatus::Ok
            }
            Err(expcli::RunError::Io(e)) => fail(LisrStatus::IoError, e.to_string()),
            Err(e) => fail(LisrStatus::RunError, e.to_string()),
        }
    })
}
