//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! `cargo test -p lisr --test acceptance` runs everything; pass criterion
//! numbers (e.g. `-- 3 7`) to run a subset.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use lisr::envlab::{Action, ActionSpace, EnvConfig, EnvSpec, Environment, GridworldConfig, PointmassConfig, StepResult};
use lisr::evolution::{rollout, Orchestrator, Policy};
use lisr::expcli::{self, EnvName, ExperimentConfig, Mode};
use lisr::learners::{
    actor_loss_grad, actor_objective, q_regression_grad, q_regression_loss, ActionScale, LearnerConfig, LearnerState,
};
use lisr::neuronet::{mutate_genome, soft_update, Activation, MlpGenome, MutationBranch, MutationParams};
use lisr::replay::{CyclicBuffer, Transition};
use lisr::symtree::{
    crossover_trees, default_feature_names, eval_op, mutate_tree, random_tree, serialize, unroll, GrowParams, OpKind,
    SymTree,
};

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    check(e < budget, || format!("{what} took {e:.2?}, budget {budget:?}"))
}

// 1
fn operator_conformance() -> Outcome {
    let t = Instant::now();
    let cases = numpy_cases();
    let mut per_op = std::collections::BTreeMap::<String, usize>::new();
    let mut worst_ulp = 0;
    for c in &cases {
        let kind: OpKind = c.op.parse().map_err(|_| format!("unknown op {}", c.op))?;
        let got = eval_op(kind, &c.args);
        let transcribed = reference_op(&c.op, &c.args);
        *per_op.entry(c.op.clone()).or_default() += 1;
        if is_transcendental(&c.op) {
            let d = ulps(got, c.expected);
            worst_ulp = worst_ulp.max(d);
            check(d <= 1, || format!("{} {:?}: {got:e} vs numpy {:e} ({d} ulp)", c.op, c.args, c.expected))?;
        } else {
            check(same_bits(got, c.expected), || {
                format!("{} {:?}: {got:e} vs numpy {:e}", c.op, c.args, c.expected)
            })?;
        }
        check(same_bits(got, transcribed), || {
            format!("{} {:?}: {got:e} vs transcription {transcribed:e}", c.op, c.args)
        })?;
    }
    check(per_op.len() == 17 && per_op.values().all(|&n| n >= 1000), || {
        format!("table coverage {per_op:?}")
    })?;
    within(t, Duration::from_secs(1), "operator table")?;
    Ok(format!(
        "{} numpy cases over 17 operators, worst transcendental error {worst_ulp} ulp, {:.0?}",
        cases.len(),
        t.elapsed()
    ))
}

// 2
fn protected_div_edges() -> Outcome {
    let specials = [
        0.0,
        -0.0,
        1.0,
        -1.0,
        2.5,
        -3.0,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NAN,
        -f64::NAN,
        f64::MAX,
        -f64::MAX,
        f64::MIN_POSITIVE,
        -f64::MIN_POSITIVE,
        5e-324,
        -5e-324,
        1e300,
        -1e-300,
        0.5,
        f64::EPSILON,
    ];
    let mut replaced = 0;
    for &a in &specials {
        for &b in &specials {
            let got = eval_op(OpKind::ProtectedDiv, &[a, b]);
            let q = a / b;
            if q.is_finite() {
                check(got.to_bits() == q.to_bits(), || format!("{a:e}/{b:e}: {got:e} vs {q:e}"))?;
            } else {
                replaced += 1;
                check(got.to_bits() == 1.0f64.to_bits(), || format!("{a:e}/{b:e} gave {got:e}, want exactly 1"))?;
            }
        }
    }
    let pd = |a: f64, b: f64| eval_op(OpKind::ProtectedDiv, &[a, b]);
    check(pd(3.0, 0.0) == 1.0 && pd(-3.0, -0.0) == 1.0, || "division by zero".into())?;
    check(pd(f64::INFINITY, f64::INFINITY) == 1.0, || "inf/inf".into())?;
    check(pd(0.0, 0.0) == 1.0 && pd(f64::NAN, 2.0) == 1.0, || "NaN quotient".into())?;
    Ok(format!("20x20 grid, {replaced} non-finite quotients all mapped to 1"))
}

fn random_features<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(0.0, 3.0).unwrap();
    (0..n)
        .map(|_| match rng.random_range(0..20) {
            0 => 0.0,
            1 => -0.0,
            2 => 1.0,
            3 => rng.random_range(-3..=3) as f64,
            4 => f64::INFINITY,
            _ => normal.sample(rng),
        })
        .collect()
}

// 3
fn unroll_fidelity() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let names = default_feature_names(8);
    let apply = |op: &str, args: &[f64]| eval_op(op.parse().expect("operator name"), args);
    let mut evaluations = 0;
    for i in 0..1000 {
        let tree = random_tree(8, 3, &GrowParams::default(), &mut rng);
        let code = unroll(&tree, &names);
        for _ in 0..100 {
            let x = random_features(8, &mut rng);
            let direct = tree.evaluate(&x);
            let interpreted = interpret_unrolled(&code, &x, &apply);
            check(direct.to_bits() == interpreted.to_bits(), || {
                format!("tree {i} {}: evaluate {direct:e}, pseudocode {interpreted:e}", serialize(&tree))
            })?;
            evaluations += 1;
        }
    }
    within(t, Duration::from_secs(30), "unroll fidelity")?;
    Ok(format!("{evaluations} evaluations bit-identical, {:.1?}", t.elapsed()))
}

// 4
fn depth_closure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = GrowParams::default();
    let mut pool: Vec<SymTree> = (0..16).map(|_| random_tree(6, 3, &params, &mut rng)).collect();
    let mut violations = 0;
    let mut deepest = 0;
    for i in 0..10_000 {
        let child = match i % 3 {
            0 => random_tree(6, 3, &params, &mut rng),
            1 => mutate_tree(&pool[rng.random_range(0..pool.len())], 3, &params, &mut rng),
            _ => {
                let a = &pool[rng.random_range(0..pool.len())];
                let b = &pool[rng.random_range(0..pool.len())];
                crossover_trees(a, b, 3, &mut rng)
            }
        };
        deepest = deepest.max(child.depth());
        if child.depth() > 3 {
            violations += 1;
        }
        let slot = rng.random_range(0..pool.len());
        pool[slot] = child;
    }
    check(violations == 0, || format!("{violations} trees deeper than 3"))?;
    Ok(format!("10000 operations, 0 violations, deepest {deepest}"))
}

// 5
fn mutation_statistics() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = MutationParams::default();
    let mut net = MlpGenome::build(12, &[40, 40], 6, Activation::Tanh, Activation::Identity).unwrap();
    let mut counts = [0usize; 3];
    let mut total = 0;
    while total < 100_000 {
        net.randomize(&mut rng);
        let before = net.params().to_vec();
        let report = mutate_genome(&mut net, &p, &mut rng);
        let mut touched = vec![false; before.len()];
        for (idx, branch) in &report.events {
            touched[*idx] = true;
            counts[match branch {
                MutationBranch::Super => 0,
                MutationBranch::Reset => 1,
                MutationBranch::Normal => 2,
            }] += 1;
        }
        total += report.events.len();
        for (i, (a, b)) in before.iter().zip(net.params()).enumerate() {
            if !touched[i] {
                check(a.to_bits() == b.to_bits(), || format!("untouched parameter {i} changed"))?;
            }
        }
    }
    let expected = [p.supermut_prob, (1.0 - p.supermut_prob) * p.reset_prob, (1.0 - p.supermut_prob) * (1.0 - p.reset_prob)];
    let rates: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    for (r, e) in rates.iter().zip(expected) {
        check((r - e).abs() <= 0.005, || format!("branch rates {rates:?}, expected {expected:?}"))?;
    }
    within(t, Duration::from_secs(10), "mutation statistics")?;
    Ok(format!(
        "{total} events: super {:.4}, reset {:.4}, normal {:.4}",
        rates[0], rates[1], rates[2]
    ))
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    // absolute floor keeps vanishing gradients from dominating
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

// 6
fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = 1e-5;
    let (obs, act) = (4, 2);
    let scale = ActionScale { low: -2.0, high: 2.0 };
    let mut worst = (0.0f64, 0.0f64);
    for probe in 0..50 {
        let mut critic = MlpGenome::build(obs + act, &[16, 16], 1, Activation::Tanh, Activation::Identity).unwrap();
        let mut actor = MlpGenome::build(obs, &[16, 16], act, Activation::Tanh, Activation::Tanh).unwrap();
        critic.randomize(&mut rng);
        actor.randomize(&mut rng);
        let states: Vec<Vec<f64>> = (0..8).map(|_| (0..obs).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let inputs: Vec<Vec<f64>> = (0..8).map(|_| (0..obs + act).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let outputs = vec![0; 8];
        let targets: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();

        let (_, gc) = q_regression_grad(&critic, &inputs, &outputs, &targets);
        let i = rng.random_range(0..critic.total_params());
        let fd = {
            let (mut p, mut m) = (critic.clone(), critic.clone());
            p.params_mut()[i] += h;
            m.params_mut()[i] -= h;
            (q_regression_loss(&p, &inputs, &outputs, &targets) - q_regression_loss(&m, &inputs, &outputs, &targets)) / (2.0 * h)
        };
        worst.0 = worst.0.max(rel_err(gc[i], fd));

        let (_, ga) = actor_loss_grad(&actor, &critic, &scale, &states);
        let j = rng.random_range(0..actor.total_params());
        let fd = {
            let (mut p, mut m) = (actor.clone(), actor.clone());
            p.params_mut()[j] += h;
            m.params_mut()[j] -= h;
            -(actor_objective(&p, &critic, &scale, &states) - actor_objective(&m, &critic, &scale, &states)) / (2.0 * h)
        };
        worst.1 = worst.1.max(rel_err(ga[j], fd));
        check(worst.0 < 1e-4 && worst.1 < 1e-4, || {
            format!("probe {probe}: critic rel err {:.2e}, actor rel err {:.2e}", worst.0, worst.1)
        })?;
    }
    Ok(format!(
        "50 probes, max relative error critic {:.1e}, actor {:.1e}",
        worst.0, worst.1
    ))
}

// 7
fn soft_update_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tau = 1e-3;
    let mut source = MlpGenome::build(5, &[16], 3, Activation::Tanh, Activation::Identity).unwrap();
    source.randomize(&mut rng);
    let mut target = source.clone();
    target.randomize(&mut rng);
    let start = target.params().to_vec();
    for _ in 0..1000 {
        soft_update(&mut target, &source, tau).unwrap();
    }
    let decay = (1.0 - tau).powi(1000);
    let mut worst = 0.0f64;
    for ((t, s), t0) in target.params().iter().zip(source.params()).zip(&start) {
        worst = worst.max((t - (s + decay * (t0 - s))).abs());
    }
    check(worst < 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation from closed form {worst:.1e} after 1000 steps"))
}

/// Offsets every environment reward; observations and dynamics unchanged.
struct Poisoned(Box<dyn Environment>);

impl Environment for Poisoned {
    fn spec(&self) -> &EnvSpec {
        self.0.spec()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.0.reset(seed)
    }

    fn step(&mut self, action: &Action) -> StepResult {
        let mut s = self.0.step(action);
        s.reward = s.reward * -1e6 + 3.0;
        s
    }
}

fn isolation_for(env_cfg: EnvConfig, seed: u64) -> Result<(f64, f64, usize), String> {
    let spec = env_cfg.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = LearnerConfig {
        hidden: vec![16, 16],
        ..Default::default()
    };
    let dim = config.layout.feature_dim(spec.observation_dim, spec.action.feature_len());
    let tree = random_tree(dim, 3, &GrowParams::default(), &mut rng);
    let learner = LearnerState::new(tree, &spec, config, &mut rng).map_err(|e| e.to_string())?;

    let clean = rollout(Policy::Learner { learner: &learner, explore: true }, env_cfg.build().as_mut(), 6, seed);
    let mut poisoned_env = Poisoned(env_cfg.build());
    let poisoned = rollout(Policy::Learner { learner: &learner, explore: true }, &mut poisoned_env, 6, seed);
    check(clean.transitions.len() == poisoned.transitions.len(), || "rollouts diverged".into())?;

    let fill = |ts: &[Transition]| {
        let mut b = CyclicBuffer::new(10_000, spec.observation_dim, spec.action.clone()).unwrap();
        for t in ts {
            b.append(t.clone()).unwrap();
        }
        b
    };
    let buf_a = fill(&clean.transitions);
    let mut buf_b = fill(&poisoned.transitions);
    // on top of the poisoned environment, overwrite stored rewards in place
    for (i, t) in buf_b.slots_mut().iter_mut().enumerate() {
        t.env_reward = [f64::NAN, f64::INFINITY, -1e300, t.env_reward][i % 4];
    }

    let (mut a, mut b) = (learner.clone(), learner);
    let mut rng_a = ChaCha8Rng::seed_from_u64(seed + 1);
    let mut rng_b = rng_a.clone();
    for step in 0..40 {
        let ba = buf_a.sample_minibatch(32, &mut rng_a).unwrap();
        let bb = buf_b.sample_minibatch(32, &mut rng_b).unwrap();
        a.update(&ba);
        b.update(&bb);
        let pa: Vec<u64> = a.policy_networks().iter().flat_map(|n| n.params()).map(|x| x.to_bits()).collect();
        let pb: Vec<u64> = b.policy_networks().iter().flat_map(|n| n.params()).map(|x| x.to_bits()).collect();
        check(pa == pb, || format!("{}: parameters diverged at update {step}", spec.name))?;
        check(a == b, || format!("{}: learner state diverged at update {step}", spec.name))?;
    }
    check(clean.fitness.value != poisoned.fitness.value, || {
        format!("{}: fitness unchanged by poisoned rewards", spec.name)
    })?;
    Ok((clean.fitness.value, poisoned.fitness.value, buf_a.len()))
}

// 8
fn reward_isolation() -> Outcome {
    let (c1, p1, n1) = isolation_for(EnvConfig::SparseGridworld(GridworldConfig::default()), 81)?;
    let (c2, p2, n2) = isolation_for(EnvConfig::SparsePointmass(PointmassConfig::default()), 82)?;
    Ok(format!(
        "40 updates bit-identical on gridworld ({n1} transitions) and pointmass ({n2}); fitness {c1} -> {p1:e}, {c2} -> {p2:e}"
    ))
}

fn tagged(i: usize) -> Transition {
    Transition {
        state: vec![i as f64],
        action: Action::Discrete(0),
        env_reward: i as f64,
        next_state: vec![i as f64 + 1.0],
        done: false,
    }
}

// 9
fn replay_semantics() -> Outcome {
    let mut buf = CyclicBuffer::new(16, 1, ActionSpace::Discrete { n: 2 }).unwrap();
    for i in 0..64 {
        buf.append(tagged(i)).unwrap();
        let n = i + 1;
        check(buf.len() == n.min(16), || format!("len after {n} appends"))?;
        check(buf.write_cursor() == n % 16, || format!("cursor after {n} appends"))?;
        for (slot, t) in buf.slots().iter().enumerate() {
            // newest append landing in this slot
            let want = slot + 16 * ((n - 1 - slot) / 16);
            check(slot < n && t.env_reward == want as f64, || format!("slot {slot} after {n} appends"))?;
        }
        let order: Vec<f64> = buf.iter_oldest_first().map(|t| t.env_reward).collect();
        let expect: Vec<f64> = (n.saturating_sub(16)..n).map(|x| x as f64).collect();
        check(order == expect, || format!("oldest-first order after {n} appends"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut counts = [0u64; 16];
    let draws = 100_000;
    for _ in 0..draws / 10 {
        for t in buf.sample_minibatch(10, &mut rng).unwrap() {
            counts[(t.env_reward as usize) % 16] += 1;
        }
    }
    let e = draws as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(15.0).unwrap().cdf(chi2);
    check(p > 0.001, || format!("chi-squared {chi2:.2}, p = {p:.2e}"))?;
    Ok(format!("64 appends at capacity 16 verified; {draws} draws chi2 = {chi2:.2}, p = {p:.3}"))
}

// 10
fn determinism() -> Outcome {
    let t = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let cfg = ExperimentConfig {
            generations: 20,
            ..small_config(d.path(), 10)
        };
        expcli::run(&cfg).map_err(|e| e.to_string())?;
    }
    for name in ["curve.csv", "losses.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        check(a == b, || format!("{name} differs between runs"))?;
    }
    let rows = std::fs::read_to_string(dirs[0].path().join("curve.csv")).unwrap().lines().count() - 1;
    check(rows == 20, || format!("{rows} curve rows"))?;
    within(t, Duration::from_secs(120), "two 20-generation runs")?;
    Ok(format!("curve.csv and losses.csv byte-identical over {rows} generations, {:.1?}", t.elapsed()))
}

struct RunSummary {
    best: f64,
    auc: f64,
    frames: u64,
    first_hit: Option<u64>,
}

/// Runs one seed up to the frame budget. With `stop_at`, stops after the
/// first generation whose champion reaches that fitness.
fn learning_run(env: EnvName, mode: Mode, seed: u64, stop_at: Option<f64>) -> Result<RunSummary, String> {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        env,
        mode,
        ..small_config(dir.path(), seed)
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let mut orch = Orchestrator::new(cfg.evolution_config(), cfg.env_config(), seed).map_err(|e| e.to_string())?;
    let mut records = Vec::new();
    let mut first_hit = None;
    while orch.frames() < cfg.frames {
        let r = orch.run_generation().map_err(|e| e.to_string())?;
        let hit = stop_at.is_some_and(|s| r.champion_fitness >= s);
        if hit && first_hit.is_none() {
            first_hit = Some(r.frames);
        }
        records.push(r);
        if hit {
            break;
        }
    }
    Ok(RunSummary {
        best: records.iter().map(|r| r.champion_fitness).fold(f64::NEG_INFINITY, f64::max),
        auc: area_under_curve(&records, cfg.frames),
        frames: orch.frames(),
        first_hit,
    })
}

fn seeds_in_parallel(env: EnvName, mode: Mode, stop_at: Option<f64>) -> Result<Vec<RunSummary>, String> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (1..=5u64)
            .map(|seed| s.spawn(move || learning_run(env, mode, seed, stop_at)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("seed thread panicked")).collect()
    })
}

// 11
fn end_to_end_learning() -> Outcome {
    let t = Instant::now();
    let lisr = seeds_in_parallel(EnvName::SparseGridworld, Mode::Lisr, None)?;
    let ea = seeds_in_parallel(EnvName::SparseGridworld, Mode::EaOnly, None)?;
    let catcher = seeds_in_parallel(EnvName::SparseCatcher, Mode::SrOnly, Some(8.0))?;

    let fmt = |v: &[RunSummary], f: fn(&RunSummary) -> f64| {
        v.iter().map(|r| format!("{:.3}", f(r))).collect::<Vec<_>>().join(" ")
    };
    println!("    gridworld lisr    best [{}] auc [{}]", fmt(&lisr, |r| r.best), fmt(&lisr, |r| r.auc));
    println!("    gridworld ea-only best [{}] auc [{}]", fmt(&ea, |r| r.best), fmt(&ea, |r| r.auc));
    println!(
        "    catcher sr-only   best [{}] frames to >= 8 [{}]",
        fmt(&catcher, |r| r.best),
        catcher
            .iter()
            .map(|r| r.first_hit.map_or(format!("none in {}", r.frames), |f| f.to_string()))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let lisr_best = median(lisr.iter().map(|r| r.best).collect());
    let lisr_auc = median(lisr.iter().map(|r| r.auc).collect());
    let ea_auc = median(ea.iter().map(|r| r.auc).collect());
    let catcher_best = median(catcher.iter().map(|r| r.best).collect());
    check(lisr_best >= 1.0, || format!("median LISR champion {lisr_best}"))?;
    check(lisr_auc >= ea_auc, || format!("median AUC lisr {lisr_auc:.4} < ea-only {ea_auc:.4}"))?;
    check(catcher_best >= 8.0, || format!("median sr-only catcher champion {catcher_best}"))?;
    Ok(format!(
        "gridworld median best {lisr_best}, median AUC lisr {lisr_auc:.4} >= ea-only {ea_auc:.4}; catcher median best {catcher_best}; {:.0?}",
        t.elapsed()
    ))
}

// 12
fn export_parity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let names = default_feature_names(7);
    for _ in 0..2000 {
        let tree = random_tree(7, 3, &GrowParams::default(), &mut rng);
        let census = census_from_text(&serialize(&tree));
        check(tree.operator_count() == census, || format!("{}: count {}", serialize(&tree), tree.operator_count()))?;
        let lines = assignment_count(&unroll(&tree, &names));
        check(lines == census.max(1), || format!("{}: {lines} assignments", serialize(&tree)))?;
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        mode: Mode::SrOnly,
        generations: 3,
        population_size: 6,
        hidden_sizes: vec![8],
        batch_size: Some(16),
        exploration_steps: 50,
        export_trees: true,
        ..small_config(dir.path(), 12)
    };
    let art = expcli::run(&cfg).map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut stems: Vec<_> = (0..6).map(|i| (art.trees_dir.clone(), format!("learner_{i:02}"))).collect();
    stems.push((art.champion_dir.clone(), "reward".into()));
    for (d, stem) in stems {
        let text = std::fs::read_to_string(d.join(format!("{stem}.tree"))).map_err(|e| e.to_string())?;
        let ops: usize = std::fs::read_to_string(d.join(format!("{stem}.ops"))).unwrap().trim().parse().unwrap();
        let pseudo = std::fs::read_to_string(d.join(format!("{stem}.pseudo"))).unwrap();
        let census = census_from_text(text.trim());
        check(ops == census, || format!("{stem}: reported {ops}, census {census}"))?;
        check(assignment_count(&pseudo) == census.max(1), || format!("{stem}: assignment lines"))?;
        checked += 1;
    }
    let exported = expcli::export_tree(&art.run_dir, expcli::TreeTarget::Champion, None).map_err(|e| e.to_string())?;
    check(exported.operator_count == census_from_text(&exported.serialized), || "exported champion".into())?;
    Ok(format!("2000 random trees and {checked} exported run trees: counts match census, one line per operator"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("operator conformance", operator_conformance),
        ("protected_div edge semantics", protected_div_edges),
        ("unroll fidelity", unroll_fidelity),
        ("depth closure", depth_closure),
        ("mutation statistics", mutation_statistics),
        ("gradient correctness", gradient_correctness),
        ("soft-update exactness", soft_update_exactness),
        ("reward-channel isolation", reward_isolation),
        ("replay semantics", replay_semantics),
        ("determinism", determinism),
        ("end-to-end learning", end_to_end_learning),
        ("tree export parity", export_parity),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        ran += 1;
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({why})");
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
