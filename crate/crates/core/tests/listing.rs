//! A worked example reward, hand-transcribed, against the same function
//! encoded as a tree.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lisr::symtree::{default_feature_names, deserialize, eval_op, random_tree, unroll, GrowParams, SymTree};

use common::{assignment_count, interpret_unrolled, same_bits};

fn pass_smaller(l: f64, r: f64) -> f64 {
    if l < r {
        l
    } else {
        r
    }
}

fn max(v: &[f64]) -> f64 {
    // numpy reduction: NaN poisons, ties keep the later value
    v[1..].iter().fold(v[0], |a, &x| if a.is_nan() || x.is_nan() { f64::NAN } else if a > x { a } else { x })
}

fn protected_div(l: f64, r: f64) -> f64 {
    let x = l / r;
    if x.is_finite() {
        x
    } else {
        1.0
    }
}

/// Line-by-line transcription of the listing, including its `abs` and `-1`.
fn listing(s: &[f64]) -> f64 {
    let p_1 = s[4].cos().tan();
    let p_2 = s[3].cos();
    let p_3 = pass_smaller(p_1, p_2);
    let x_1 = -1.0 * (s[7] - p_3).abs();
    let q_1 = -1.0 * (1.0 - s[4]).abs();
    let q_2 = max(&[s[2], 1.0, s[7], q_1, 0.0]);
    let q_3 = max(&[q_2, s[7], 0f64.cos(), s[0] * s[6], s[5] * (s[6] - 1.0)]);
    let y_1 = q_3 / 10.0;
    let y_2 = s[7] * s[7];
    let y_3 = protected_div(1.0, s[0] / 100.0);
    let x_2 = if y_3 <= 0.0 { y_1 } else { y_2 };
    let z = (x_2 == x_1) as u8 as f64;
    0.0 + pass_smaller(s[7] / 10.0, z)
}

// The operator dictionary has neither `abs` nor a -1 terminal, so
// -|y| is written min(y, 0 - y).
const P3: &str = "(pass_smaller (tan (cos f4)) (cos f3))";

fn neg_abs(y: &str) -> String {
    format!("(min {y} (subtract c0 {y}))")
}

fn listing_tree() -> SymTree {
    let x1 = neg_abs(&format!("(subtract f7 {P3})"));
    let q1 = neg_abs("(subtract c1 f4)");
    let q2 = format!("(max f2 c1 f7 {q1} c0)");
    let q3 = format!("(max {q2} f7 (cos c0) (multiply f0 f6) (multiply f5 (subtract f6 c1)))");
    let x2 = format!("(gate (div_by_10 {q3}) (square f7) (protected_div c1 (div_by_100 f0)))");
    let text = format!("(add c0 (pass_smaller (div_by_10 f7) (equal_to {x2} {x1})))");
    deserialize(&text, 8).unwrap()
}

#[test]
fn unit_state_matches_hand_execution() {
    let s = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    // gate condition 1 / (1/100) = 100 > 0 picks square(0) = 0, which differs
    // from x_1 = -1, so the reward is pass_smaller(0, 0) = 0
    assert_eq!(listing(&s), 0.0);
    assert!(same_bits(listing_tree().evaluate(&s), listing(&s)));
}

#[test]
fn negative_s0_takes_the_left_gate_branch() {
    // protected_div(1, s_0 / 100) < 0, so the gate yields div_by_10(q_3)
    let s = [-1.0, 0.0, -5.0, 0.0, 11.0, 0.0, 10.0, -0.5];
    let t = listing_tree();
    assert_eq!(t.evaluate(&s), listing(&s));
}

proptest! {
    #[test]
    fn tree_encoding_agrees_with_transcription(s in prop::collection::vec(-5.0f64..5.0, 8)) {
        prop_assert!(same_bits(listing_tree().evaluate(&s), listing(&s)));
    }

    #[test]
    fn small_integer_inputs_agree(s in prop::collection::vec(-2i32..=2, 8)) {
        let s: Vec<f64> = s.into_iter().map(f64::from).collect();
        prop_assert!(same_bits(listing_tree().evaluate(&s), listing(&s)));
    }
}

#[test]
fn twenty_two_operators_unroll_to_twenty_two_statements() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let params = GrowParams {
        operator_prob: 0.9,
        ..GrowParams::default()
    };
    let tree = (0..100_000)
        .map(|_| random_tree(8, 3, &params, &mut rng))
        .find(|t| t.operator_count() == 22)
        .expect("a 22-operator tree within the search budget");
    let code = unroll(&tree, &default_feature_names(8));
    assert_eq!(assignment_count(&code), 22);
    let apply = |op: &str, args: &[f64]| eval_op(op.parse().unwrap(), args);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let x: Vec<f64> = (0..8).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        assert_eq!(interpret_unrolled(&code, &x, &apply).to_bits(), tree.evaluate(&x).to_bits());
    }
}

#[test]
fn listing_tree_unrolls_one_statement_per_operator() {
    let t = listing_tree();
    let code = unroll(&t, &default_feature_names(8));
    assert_eq!(assignment_count(&code), t.operator_count());
}
