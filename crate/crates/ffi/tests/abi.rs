use std::ffi::{CStr, CString};
use std::ptr;

use lisr_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(lisr_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn take_string(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    lisr_string_free(s);
    out
}

fn parse(text: &str, dim: usize) -> *mut LisrTree {
    let c = CString::new(text).unwrap();
    let mut t = ptr::null_mut();
    let st = unsafe { lisr_tree_parse(c.as_ptr(), dim, &mut t) };
    assert_eq!(st, LisrStatus::Ok, "{}", last_error());
    t
}

#[test]
fn parse_evaluate_serialize_round_trip() {
    let t = parse("(add (cos f1) (max f0 c1 f2))", 3);
    unsafe {
        let feats = [2.5, 0.0, -1.0];
        let mut v = 0.0;
        assert_eq!(lisr_tree_evaluate(t, feats.as_ptr(), 3, &mut v), LisrStatus::Ok);
        assert_eq!(v, 1.0 + 2.5);

        let mut s = ptr::null_mut();
        assert_eq!(lisr_tree_serialize(t, &mut s), LisrStatus::Ok);
        assert_eq!(take_string(s), "(add (cos f1) (max f0 c1 f2))");

        let mut u = ptr::null_mut();
        assert_eq!(lisr_tree_unroll(t, &mut u), LisrStatus::Ok);
        let code = take_string(u);
        assert!(code.starts_with("def get_intrinsic_reward(s_0, s_1, s_2):"));
        assert!(code.trim_end().lines().last().unwrap().trim_start().starts_with("reward = "));

        let (mut d, mut n, mut o, mut f) = (0, 0, 0, 0);
        assert_eq!(lisr_tree_stats(t, &mut d, &mut n, &mut o, &mut f), LisrStatus::Ok);
        assert_eq!((d, n, o, f), (2, 7, 3, 3));
        lisr_tree_free(t);
    }
}

#[test]
fn wrong_feature_length_is_rejected() {
    let t = parse("f0", 2);
    unsafe {
        let feats = [1.0];
        let mut v = 0.0;
        assert_eq!(lisr_tree_evaluate(t, feats.as_ptr(), 1, &mut v), LisrStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        lisr_tree_free(t);
    }
}

#[test]
fn parse_errors_carry_a_message() {
    let c = CString::new("(add f0)").unwrap();
    let mut t = ptr::null_mut();
    let st = unsafe { lisr_tree_parse(c.as_ptr(), 1, &mut t) };
    assert_eq!(st, LisrStatus::ParseError);
    assert!(t.is_null());
    assert!(last_error().contains("arity"), "{}", last_error());
}

#[test]
fn null_arguments_are_reported_not_dereferenced() {
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(lisr_tree_parse(ptr::null(), 2, &mut t), LisrStatus::NullPointer);
        assert_eq!(lisr_tree_serialize(ptr::null(), &mut ptr::null_mut()), LisrStatus::NullPointer);
        assert_eq!(lisr_experiment_step(ptr::null_mut(), ptr::null_mut()), LisrStatus::NullPointer);
        lisr_tree_free(ptr::null_mut());
        lisr_experiment_free(ptr::null_mut());
        lisr_string_free(ptr::null_mut());
    }
}

#[test]
fn random_mutate_crossover_respect_depth_and_seed() {
    unsafe {
        let mut a = ptr::null_mut();
        let mut a2 = ptr::null_mut();
        assert_eq!(lisr_tree_random(5, 3, 11, &mut a), LisrStatus::Ok);
        assert_eq!(lisr_tree_random(5, 3, 11, &mut a2), LisrStatus::Ok);
        let (mut s1, mut s2) = (ptr::null_mut(), ptr::null_mut());
        lisr_tree_serialize(a, &mut s1);
        lisr_tree_serialize(a2, &mut s2);
        assert_eq!(take_string(s1), take_string(s2));

        let mut b = ptr::null_mut();
        assert_eq!(lisr_tree_random(5, 3, 12, &mut b), LisrStatus::Ok);
        for seed in 0..20 {
            let (mut m, mut x) = (ptr::null_mut(), ptr::null_mut());
            assert_eq!(lisr_tree_mutate(a, 3, seed, &mut m), LisrStatus::Ok);
            assert_eq!(lisr_tree_crossover(a, b, 3, seed, &mut x), LisrStatus::Ok);
            for t in [m, x] {
                let (mut d, mut n, mut o, mut f) = (0, 0, 0, 0);
                lisr_tree_stats(t, &mut d, &mut n, &mut o, &mut f);
                assert!(d <= 3);
                assert_eq!(f, 5);
                lisr_tree_free(t);
            }
        }
        lisr_tree_free(a);
        lisr_tree_free(a2);
        lisr_tree_free(b);
    }
}

const TINY: &str = r#"
population_size = 4
hidden_sizes = [8]
batch_size = 16
exploration_steps = 40
buffer_size = 5000
single_threaded = true
"#;

#[test]
fn experiment_steps_and_saves() {
    let cfg = CString::new(TINY).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let dir_c = CString::new(dir.path().to_str().unwrap()).unwrap();
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(lisr_experiment_new(cfg.as_ptr(), &mut e), LisrStatus::Ok, "{}", last_error());
        let mut prev_frames = 0;
        for g in 0..3 {
            let mut rec = LisrGeneration::default();
            assert_eq!(lisr_experiment_step(e, &mut rec), LisrStatus::Ok, "{}", last_error());
            assert_eq!(rec.generation, g);
            assert!(rec.frames > prev_frames);
            prev_frames = rec.frames;
            let best = rec.max_ea_fitness.max(rec.max_sr_fitness);
            assert!(rec.champion_fitness >= best);
        }
        let mut t = ptr::null_mut();
        let st = lisr_experiment_champion_tree(e, &mut t);
        assert!(st == LisrStatus::Ok || st == LisrStatus::InvalidArgument);
        lisr_tree_free(t);
        assert_eq!(lisr_experiment_save(e, dir_c.as_ptr()), LisrStatus::Ok, "{}", last_error());
        assert!(dir.path().join("state.json").exists());
        lisr_experiment_free(e);
    }
}

#[test]
fn sr_only_experiment_has_no_ea_statistics() {
    let cfg = CString::new(format!("{TINY}mode = \"sr-only\"\n")).unwrap();
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(lisr_experiment_new(cfg.as_ptr(), &mut e), LisrStatus::Ok, "{}", last_error());
        let mut rec = LisrGeneration::default();
        assert_eq!(lisr_experiment_step(e, &mut rec), LisrStatus::Ok);
        assert!(rec.mean_ea_fitness.is_nan());
        assert_eq!(rec.champion_is_sr, 1);
        let mut t = ptr::null_mut();
        assert_eq!(lisr_experiment_champion_tree(e, &mut t), LisrStatus::Ok);
        lisr_tree_free(t);
        lisr_experiment_free(e);
    }
}

#[test]
fn invalid_config_names_the_field() {
    let cfg = CString::new("population_size = 0\n").unwrap();
    let mut e = ptr::null_mut();
    let st = unsafe { lisr_experiment_new(cfg.as_ptr(), &mut e) };
    assert_eq!(st, LisrStatus::ConfigError);
    assert!(e.is_null());
    assert!(last_error().contains("population_size"), "{}", last_error());

    let bad = CString::new("no_such_key = 1\n").unwrap();
    assert_eq!(unsafe { lisr_experiment_new(bad.as_ptr(), &mut e) }, LisrStatus::ConfigError);
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!("{TINY}generations = 2\nout_dir = {:?}\n", dir.path().to_str().unwrap());
    let cfg = CString::new(toml).unwrap();
    let mut n = 0u64;
    assert_eq!(unsafe { lisr_run(cfg.as_ptr(), &mut n) }, LisrStatus::Ok, "{}", last_error());
    assert_eq!(n, 2);
    let csv = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lisr.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["LisrStatus", "LisrTree", "LisrExperiment", "LisrGeneration"] {
        assert!(header.contains(ty), "{ty}");
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(lisr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
