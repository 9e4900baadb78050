use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{MlpGenome, NetError};

// Draws of a non-finite perturbed weight are retried this many times before
// the entry is left as it was.
const MAX_RESAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationParams {
    pub mut_prob: f64,
    pub mut_frac: f64,
    pub mut_strength: f64,
    pub supermut_prob: f64,
    pub reset_prob: f64,
}

impl Default for MutationParams {
    fn default() -> Self {
        MutationParams {
            mut_prob: 0.9,
            mut_frac: 0.1,
            mut_strength: 0.1,
            supermut_prob: 0.05,
            reset_prob: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationBranch {
    Super,
    Reset,
    Normal,
}

/// Which flat parameter indices were perturbed, and how.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MutationReport {
    pub events: Vec<(usize, MutationBranch)>,
}

impl MutationReport {
    pub fn count(&self, branch: MutationBranch) -> usize {
        self.events.iter().filter(|(_, b)| *b == branch).count()
    }
}

/// Perturbs weight matrices in place. Biases are never touched.
///
/// For every weight matrix `M`, `ceil(mut_frac * |M|)` entries are drawn
/// uniformly (with replacement). Each draw first rolls for a super mutation
/// (multiply by `N(0, 100 * mut_strength)`), then, only if that failed, for a
/// reset (`N(0, 1)`); otherwise the entry is multiplied by
/// `N(0, mut_strength)`.
pub fn mutate_genome<R: Rng + ?Sized>(net: &mut MlpGenome, p: &MutationParams, rng: &mut R) -> MutationReport {
    let super_noise = Normal::new(0.0, 100.0 * p.mut_strength).expect("mutation strength must be finite and >= 0");
    let normal_noise = Normal::new(0.0, p.mut_strength).expect("mutation strength must be finite and >= 0");
    let reset_noise = Normal::new(0.0, 1.0).unwrap();
    let mut report = MutationReport::default();
    let offsets = net.weight_offsets();
    let layers = net.layers.clone();
    for (layer, offset) in layers.iter().zip(offsets) {
        let size = layer.weight_count();
        let draws = (p.mut_frac * size as f64).ceil() as usize;
        for _ in 0..draws {
            let row = rng.random_range(0..layer.outputs);
            let col = rng.random_range(0..layer.inputs);
            let idx = offset + row * layer.inputs + col;
            let old = net.params[idx];
            let (branch, dist, scale) = if rng.random::<f64>() < p.supermut_prob {
                (MutationBranch::Super, &super_noise, true)
            } else if rng.random::<f64>() < p.reset_prob {
                (MutationBranch::Reset, &reset_noise, false)
            } else {
                (MutationBranch::Normal, &normal_noise, true)
            };
            for _ in 0..MAX_RESAMPLES {
                let sample = dist.sample(rng);
                let candidate = if scale { old * sample } else { sample };
                if candidate.is_finite() {
                    net.params[idx] = candidate;
                    break;
                }
            }
            report.events.push((idx, branch));
        }
    }
    report
}

/// Child taking `elite`'s parameters before `split` and `other`'s from
/// `split` on, in canonical flat order.
pub fn crossover_at(elite: &MlpGenome, other: &MlpGenome, split: usize) -> Result<MlpGenome, NetError> {
    if !elite.same_architecture(other) {
        return Err(NetError::ArchitectureMismatch);
    }
    assert!(split <= elite.total_params(), "split point past the end");
    let mut child = elite.clone();
    child.params[split..].copy_from_slice(&other.params[split..]);
    Ok(child)
}

/// Single-point crossover on the flattened parameter vector, with the split
/// drawn uniformly from `0..=total_params`.
pub fn crossover_genomes<R: Rng + ?Sized>(elite: &MlpGenome, other: &MlpGenome, rng: &mut R) -> Result<MlpGenome, NetError> {
    if !elite.same_architecture(other) {
        return Err(NetError::ArchitectureMismatch);
    }
    let split = rng.random_range(0..=elite.total_params());
    crossover_at(elite, other, split)
}

/// `target <- tau * source + (1 - tau) * target`, parameter by parameter.
pub fn soft_update(target: &mut MlpGenome, source: &MlpGenome, tau: f64) -> Result<(), NetError> {
    if !target.same_architecture(source) {
        return Err(NetError::ArchitectureMismatch);
    }
    if tau == 1.0 {
        target.params.copy_from_slice(&source.params);
        return Ok(());
    }
    for (t, s) in target.params.iter_mut().zip(&source.params) {
        *t = tau * s + (1.0 - tau) * *t;
    }
    Ok(())
}
