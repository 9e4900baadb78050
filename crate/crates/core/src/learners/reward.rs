use serde::{Deserialize, Serialize};

use crate::replay::Transition;
use crate::symtree::SymTree;

/// Which parts of a transition a reward tree sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureLayout {
    /// `[s ; a]`
    StateAction,
    /// `[s ; a ; s']`
    #[default]
    StateActionNext,
}

impl FeatureLayout {
    pub fn feature_dim(self, obs_dim: usize, action_len: usize) -> usize {
        match self {
            FeatureLayout::StateAction => obs_dim + action_len,
            FeatureLayout::StateActionNext => 2 * obs_dim + action_len,
        }
    }

    pub fn features(self, t: &Transition) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * t.state.len() + t.action.feature_len());
        out.extend_from_slice(&t.state);
        t.action.push_features(&mut out);
        if self == FeatureLayout::StateActionNext {
            out.extend_from_slice(&t.next_state);
        }
        out
    }

    /// Names for unrolled pseudocode, e.g. `x, y, action, next_x, next_y`.
    pub fn feature_names(self, observation_names: &[String], action_len: usize) -> Vec<String> {
        let mut names: Vec<String> = observation_names.to_vec();
        if action_len == 1 {
            names.push("action".to_string());
        } else {
            names.extend((0..action_len).map(|i| format!("action_{i}")));
        }
        if self == FeatureLayout::StateActionNext {
            names.extend(observation_names.iter().map(|n| format!("next_{n}")));
        }
        names
    }
}

/// Keeps tree outputs usable as TD rewards: non-finite values are replaced,
/// everything else is clamped to `[-clamp_bound, clamp_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSanitizer {
    pub clamp_bound: f64,
    pub nonfinite_value: f64,
}

impl Default for RewardSanitizer {
    fn default() -> Self {
        RewardSanitizer {
            clamp_bound: 10.0,
            nonfinite_value: 0.0,
        }
    }
}

impl RewardSanitizer {
    pub fn sanitize(&self, raw: f64) -> f64 {
        if raw.is_finite() {
            raw.clamp(-self.clamp_bound, self.clamp_bound)
        } else {
            self.nonfinite_value
        }
    }
}

/// Sanitised tree reward for one transition. Reads only state, action and
/// next state; the stored environment reward is never consulted.
pub fn intrinsic_reward(tree: &SymTree, layout: FeatureLayout, sanitizer: &RewardSanitizer, t: &Transition) -> f64 {
    sanitizer.sanitize(tree.evaluate(&layout.features(t)))
}
