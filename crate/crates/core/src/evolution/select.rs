//! Selection, elitism and variation for both populations.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::neuronet::{crossover_genomes, mutate_genome, MlpGenome, MutationParams};
use crate::symtree::{crossover_trees, mutate_tree, GrowParams, SymTree};

/// `ceil(frac * k)`, at least one when the population is non-empty.
pub fn elite_count(frac: f64, k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    // 0.07 * 100 is 7.000000000000001 in binary floating point
    let raw = (frac * k as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(k)
}

/// Indices sorted by descending fitness; equal fitness keeps the lower index first.
pub fn rank_descending(fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]));
    order
}

/// Best of `size` uniform draws with replacement; ties go to the lower index.
pub fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty() && size > 0);
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Highest fitness wins; ties go to the lowest id.
pub fn select_champion(fitness: &[f64]) -> usize {
    assert!(!fitness.is_empty(), "champion selection needs at least one individual");
    rank_descending(fitness)[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub elite_frac: f64,
    pub tournament_size: usize,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            elite_frac: 0.07,
            tournament_size: 3,
        }
    }
}

/// Variation operators applied during one selection step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationCounts {
    pub crossovers: u64,
    pub mutations: u64,
}

/// Next EA population: elites first (best first), then the selected and
/// varied set.
///
/// Tournament winners fill half of the non-elite slots (rounded up), crossover
/// children of a random elite and a random selected actor fill the rest, and
/// every non-elite is then mutated with probability `mut_prob`.
pub fn rank_and_select_ea<R: Rng + ?Sized>(
    actors: &[MlpGenome],
    fitness: &[f64],
    sel: &SelectionParams,
    mutation: &MutationParams,
    rng: &mut R,
) -> (Vec<MlpGenome>, VariationCounts) {
    assert_eq!(actors.len(), fitness.len(), "one fitness per actor");
    let k = actors.len();
    let e = elite_count(sel.elite_frac, k);
    let order = rank_descending(fitness);
    let mut next: Vec<MlpGenome> = order[..e].iter().map(|&i| actors[i].clone()).collect();
    let want = k - e;
    let mut counts = VariationCounts::default();

    let mut selected: Vec<MlpGenome> = (0..want.div_ceil(2))
        .map(|_| actors[tournament(fitness, sel.tournament_size, rng)].clone())
        .collect();
    while selected.len() < want {
        let elite = next.choose(rng).expect("at least one elite");
        let other = selected.choose(rng).expect("at least one selected actor");
        let child = crossover_genomes(elite, other, rng).expect("population shares one architecture");
        selected.push(child);
        counts.crossovers += 1;
    }
    for actor in &mut selected {
        if rng.random::<f64>() < mutation.mut_prob {
            mutate_genome(actor, mutation, rng);
            counts.mutations += 1;
        }
    }
    next.extend(selected);
    (next, counts)
}

/// New tree for every learner slot. The `j` best-scoring learners keep their
/// trees; the others receive, in rank order, tournament-selected copies
/// followed by alternating crossover (random elite x random selected) and
/// mutation children.
pub fn evolve_sr_portfolio<R: Rng + ?Sized>(
    trees: &[SymTree],
    scores: &[f64],
    sel: &SelectionParams,
    max_depth: usize,
    grow: &GrowParams,
    rng: &mut R,
) -> (Vec<SymTree>, VariationCounts) {
    assert_eq!(trees.len(), scores.len(), "one score per learner");
    let k = trees.len();
    let j = elite_count(sel.elite_frac, k);
    let order = rank_descending(scores);
    let elites: Vec<&SymTree> = order[..j].iter().map(|&i| &trees[i]).collect();
    let want = k - j;
    let mut counts = VariationCounts::default();

    let mut fresh: Vec<SymTree> = (0..want.div_ceil(2))
        .map(|_| trees[tournament(scores, sel.tournament_size, rng)].clone())
        .collect();
    let mut use_crossover = true;
    while fresh.len() < want {
        let base = fresh.choose(rng).expect("at least one selected tree");
        let child = if use_crossover {
            let elite = elites.choose(rng).expect("at least one elite tree");
            counts.crossovers += 1;
            crossover_trees(elite, base, max_depth, rng)
        } else {
            counts.mutations += 1;
            mutate_tree(base, max_depth, grow, rng)
        };
        fresh.push(child);
        use_crossover = !use_crossover;
    }

    let mut out: Vec<SymTree> = trees.to_vec();
    for (&slot, tree) in order[j..].iter().zip(fresh) {
        out[slot] = tree;
    }
    (out, counts)
}
