use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConstValue, OpKind, SymTree, TreeNode, VARIADIC_ARITY};

/// How many attachment points crossover tries before giving up.
pub const CROSSOVER_ATTEMPTS: usize = 20;

/// Knobs for grow-method tree generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowParams {
    /// Chance of placing an operator (rather than a terminal) above the depth cap.
    pub operator_prob: f64,
    /// Chance that a terminal is a feature rather than a constant.
    pub feature_prob: f64,
}

impl Default for GrowParams {
    fn default() -> Self {
        GrowParams {
            operator_prob: 0.7,
            feature_prob: 0.9,
        }
    }
}

pub(crate) fn random_terminal<R: Rng + ?Sized>(feature_dim: usize, params: &GrowParams, rng: &mut R) -> TreeNode {
    if rng.random::<f64>() < params.feature_prob {
        TreeNode::Feature(rng.random_range(0..feature_dim))
    } else if rng.random::<bool>() {
        TreeNode::Const(ConstValue::One)
    } else {
        TreeNode::Const(ConstValue::Zero)
    }
}

/// Grows a subtree whose operational depth is at most `budget`.
pub(crate) fn grow<R: Rng + ?Sized>(feature_dim: usize, budget: usize, params: &GrowParams, rng: &mut R) -> TreeNode {
    if budget == 0 || rng.random::<f64>() >= params.operator_prob {
        return random_terminal(feature_dim, params, rng);
    }
    let kind = OpKind::ALL[rng.random_range(0..OpKind::ALL.len())];
    let arity = kind
        .fixed_arity()
        .unwrap_or_else(|| rng.random_range(VARIADIC_ARITY.0..=VARIADIC_ARITY.1));
    let children = (0..arity)
        .map(|_| grow(feature_dim, budget - 1, params, rng))
        .collect();
    TreeNode::Op { kind, children }
}

/// Random tree by the grow method, operational depth `<= max_depth`.
///
/// # Panics
///
/// Panics if `feature_dim == 0`.
pub fn random_tree<R: Rng + ?Sized>(feature_dim: usize, max_depth: usize, params: &GrowParams, rng: &mut R) -> SymTree {
    assert!(feature_dim >= 1, "feature_dim must be positive");
    let root = grow(feature_dim, max_depth, params, rng);
    SymTree::new(root, feature_dim).expect("grown trees are valid")
}

/// Replaces one uniformly chosen node by a fresh random subtree sized so that
/// the result stays within `max_depth`.
pub fn mutate_tree<R: Rng + ?Sized>(tree: &SymTree, max_depth: usize, params: &GrowParams, rng: &mut R) -> SymTree {
    let nodes = tree.root.preorder();
    let index = rng.random_range(0..nodes.len());
    let level = nodes[index].0;
    let budget = max_depth.saturating_sub(level);
    let replacement = grow(tree.feature_dim, budget, params, rng);
    let mut root = tree.root.clone();
    root.replace_preorder(index, replacement);
    SymTree::new(root, tree.feature_dim).expect("mutation preserves validity")
}

/// Grafts a random subtree of `donor` onto a random site of a copy of
/// `recipient`. Falls back to an unmodified copy of `recipient` when no
/// depth-respecting pairing turns up within [`CROSSOVER_ATTEMPTS`] draws.
///
/// # Panics
///
/// Panics if the parents disagree on `feature_dim`.
pub fn crossover_trees<R: Rng + ?Sized>(recipient: &SymTree, donor: &SymTree, max_depth: usize, rng: &mut R) -> SymTree {
    assert_eq!(
        recipient.feature_dim, donor.feature_dim,
        "crossover parents must share a feature dimension"
    );
    let sites = recipient.root.preorder();
    let material = donor.root.preorder();
    for _ in 0..CROSSOVER_ATTEMPTS {
        let site = rng.random_range(0..sites.len());
        let (_, graft) = material[rng.random_range(0..material.len())];
        if sites[site].0 + graft.depth() <= max_depth {
            let mut root = recipient.root.clone();
            root.replace_preorder(site, graft.clone());
            return SymTree::new(root, recipient.feature_dim).expect("crossover preserves validity");
        }
    }
    SymTree::new(recipient.root.clone(), recipient.feature_dim).expect("copy is valid")
}
