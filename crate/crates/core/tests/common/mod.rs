//! Oracles shared by the integration tests. Nothing here calls into the
//! operator or unrolling code under test.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;

use lisr::evolution::GenerationRecord;
use lisr::expcli::ExperimentConfig;

pub const NUMPY_TABLE: &str = include_str!("../data/numpy_ops.txt");

#[derive(Debug, Clone)]
pub struct NumpyCase {
    pub op: String,
    pub args: Vec<f64>,
    pub expected: f64,
}

pub fn numpy_cases() -> Vec<NumpyCase> {
    NUMPY_TABLE
        .lines()
        .map(|line| {
            let (lhs, rhs) = line.split_once(" -> ").expect("arrow");
            let mut parts = lhs.split(' ');
            let op = parts.next().unwrap().to_string();
            let hex = |s: &str| f64::from_bits(u64::from_str_radix(s, 16).expect("hex"));
            NumpyCase {
                op,
                args: parts.map(hex).collect(),
                expected: hex(rhs.trim()),
            }
        })
        .collect()
}

/// Distance in units in the last place; 0 for identical bits or two NaNs.
pub fn ulps(a: f64, b: f64) -> u64 {
    if a.is_nan() && b.is_nan() {
        return 0;
    }
    if a.is_nan() || b.is_nan() {
        return u64::MAX;
    }
    if a == b {
        return 0;
    }
    // map to a monotone integer line
    let key = |x: f64| {
        let b = x.to_bits() as i64;
        if b < 0 {
            i64::MIN - b
        } else {
            b
        }
    };
    key(a).abs_diff(key(b))
}

/// Same value with NaN treated as a single value (sign and payload ignored).
pub fn same_bits(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits()
}

/// Hand transcription of the reference operator listing (scalar inputs).
pub fn reference_op(name: &str, a: &[f64]) -> f64 {
    match name {
        "add" => a[0] + a[1],
        "subtract" => a[0] - a[1],
        "multiply" => a[0] * a[1],
        "cos" => a[0].cos(),
        "sin" => a[0].sin(),
        "tan" => a[0].tan(),
        // elementwise maximum reduced left to right: a NaN anywhere poisons
        // the result and ties keep the newer value
        "max" | "min" => {
            let mut acc = a[0];
            for &x in &a[1..] {
                acc = if acc.is_nan() || x.is_nan() {
                    f64::NAN
                } else if name == "max" {
                    if acc > x {
                        acc
                    } else {
                        x
                    }
                } else if acc < x {
                    acc
                } else {
                    x
                };
            }
            acc
        }
        "pass_greater" => {
            if a[0] > a[1] {
                a[0]
            } else {
                a[1]
            }
        }
        "pass_smaller" => {
            if a[0] < a[1] {
                a[0]
            } else {
                a[1]
            }
        }
        "equal_to" => (a[0] == a[1]) as u8 as f64,
        "gate" => {
            if a[2] <= 0.0 {
                a[0]
            } else {
                a[1]
            }
        }
        "square" => a[0] * a[0],
        "is_negative" => {
            if a[0] < 0.0 {
                1.0
            } else {
                0.0
            }
        }
        "div_by_100" => a[0] / 100.0,
        "div_by_10" => a[0] / 10.0,
        "protected_div" => {
            let x = a[0] / a[1];
            if x.is_infinite() || x.is_nan() {
                1.0
            } else {
                x
            }
        }
        other => panic!("unknown operator {other}"),
    }
}

pub fn is_transcendental(name: &str) -> bool {
    matches!(name, "cos" | "sin" | "tan")
}

/// Executes unrolled pseudocode line by line. `apply` resolves an operator
/// name and its evaluated arguments to a value.
pub fn interpret_unrolled(code: &str, features: &[f64], apply: &dyn Fn(&str, &[f64]) -> f64) -> f64 {
    let mut lines = code.lines();
    let header = lines.next().expect("def line");
    let params = header
        .strip_prefix("def get_intrinsic_reward(")
        .and_then(|s| s.strip_suffix("):"))
        .expect("header shape");
    let mut env: HashMap<String, f64> = HashMap::new();
    for (name, v) in params.split(", ").zip(features) {
        env.insert(name.to_string(), *v);
    }
    let atom = |tok: &str, env: &HashMap<String, f64>| -> f64 {
        match tok {
            "0" => 0.0,
            "1" => 1.0,
            name => *env.get(name).unwrap_or_else(|| panic!("undefined name {name}")),
        }
    };
    for line in lines {
        let (lhs, rhs) = line.trim().split_once(" = ").expect("assignment");
        let value = match rhs.split_once('(') {
            None => atom(rhs, &env),
            Some((op, rest)) => {
                let inner = rest.strip_suffix(')').expect("closing paren");
                let inner = inner.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(inner);
                let args: Vec<f64> = inner.split(", ").map(|t| atom(t, &env)).collect();
                apply(op, &args)
            }
        };
        assert!(env.insert(lhs.to_string(), value).is_none() || lhs == "reward", "reassigned {lhs}");
        if lhs == "reward" {
            return value;
        }
    }
    panic!("no reward assignment")
}

/// Operator nodes counted from the prefix text: every operator opens exactly
/// one parenthesis.
pub fn census_from_text(serialized: &str) -> usize {
    serialized.chars().filter(|&c| c == '(').count()
}

/// Statement lines of unrolled pseudocode (everything after the header).
pub fn assignment_count(code: &str) -> usize {
    code.lines().skip(1).filter(|l| l.contains(" = ")).count()
}

/// Config used by the end-to-end comparisons: the default hyperparameters at
/// a smaller network width and population so a seed finishes in under a
/// minute on one core.
pub fn small_config(out_dir: &Path, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        out_dir: out_dir.display().to_string(),
        population_size: 20,
        hidden_sizes: vec![32, 32],
        single_threaded: true,
        frames: 300_000,
        checkpoint_every: 0,
        ..ExperimentConfig::default()
    }
}

/// Champion fitness as a step function of frames, integrated over
/// `[0, horizon]` and divided by `horizon`. Each generation's value holds
/// over the frames that generation consumed.
pub fn area_under_curve(records: &[GenerationRecord], horizon: u64) -> f64 {
    let mut area = 0.0;
    let mut prev = 0u64;
    for r in records {
        let end = r.frames.min(horizon);
        if end > prev {
            area += r.champion_fitness * (end - prev) as f64;
            prev = end;
        }
    }
    area / horizon as f64
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
