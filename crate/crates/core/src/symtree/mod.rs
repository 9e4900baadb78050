//! Symbolic reward trees.
//!
//! A [`SymTree`] maps a flat feature vector (typically `[s ; a ; s']`) to a
//! scalar reward using the fixed operator dictionary in [`OpKind`]. Trees are
//! immutable values: the genetic operators in [`generate`] return new trees.

mod generate;
mod ops;
mod text;
mod unroll;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{crossover_trees, mutate_tree, random_tree, GrowParams, CROSSOVER_ATTEMPTS};
pub use ops::{eval_op, OpKind, VARIADIC_ARITY};
pub use text::{deserialize, serialize, ParseError};
pub use unroll::{default_feature_names, unroll};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstValue {
    Zero,
    One,
}

impl ConstValue {
    pub fn value(self) -> f64 {
        match self {
            ConstValue::Zero => 0.0,
            ConstValue::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Op { kind: OpKind, children: Vec<TreeNode> },
    Feature(usize),
    Const(ConstValue),
}

impl TreeNode {
    pub fn op(kind: OpKind, children: Vec<TreeNode>) -> Self {
        TreeNode::Op { kind, children }
    }

    /// Number of operator layers on the deepest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Op { children, .. } => {
                1 + children.iter().map(TreeNode::depth).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Op { children, .. } => {
                1 + children.iter().map(TreeNode::node_count).sum::<usize>()
            }
            _ => 1,
        }
    }

    pub fn operator_count(&self) -> usize {
        match self {
            TreeNode::Op { children, .. } => {
                1 + children.iter().map(TreeNode::operator_count).sum::<usize>()
            }
            _ => 0,
        }
    }

    pub fn evaluate(&self, features: &[f64]) -> f64 {
        match self {
            TreeNode::Feature(i) => features[*i],
            TreeNode::Const(c) => c.value(),
            TreeNode::Op { kind, children } => {
                // Up to five arguments; keep the common path off the heap.
                let mut args = [0.0; VARIADIC_ARITY.1];
                for (slot, child) in args.iter_mut().zip(children) {
                    *slot = child.evaluate(features);
                }
                eval_op(*kind, &args[..children.len()])
            }
        }
    }

    /// Pre-order listing of every node together with the number of operator
    /// ancestors above it.
    pub fn preorder(&self) -> Vec<(usize, &TreeNode)> {
        fn walk<'a>(node: &'a TreeNode, level: usize, out: &mut Vec<(usize, &'a TreeNode)>) {
            out.push((level, node));
            if let TreeNode::Op { children, .. } = node {
                for c in children {
                    walk(c, level + 1, out);
                }
            }
        }
        let mut out = Vec::with_capacity(self.node_count());
        walk(self, 0, &mut out);
        out
    }

    /// Replaces the node at pre-order position `index`. Returns `false` when the
    /// index is out of range.
    pub fn replace_preorder(&mut self, index: usize, replacement: TreeNode) -> bool {
        fn walk(node: &mut TreeNode, target: usize, cursor: &mut usize, repl: &mut Option<TreeNode>) -> bool {
            if *cursor == target {
                *node = repl.take().expect("replacement consumed once");
                return true;
            }
            *cursor += 1;
            if let TreeNode::Op { children, .. } = node {
                for c in children {
                    if walk(c, target, cursor, repl) {
                        return true;
                    }
                }
            }
            false
        }
        let mut cursor = 0;
        let mut repl = Some(replacement);
        walk(self, index, &mut cursor, &mut repl)
    }

    fn check(&self, feature_dim: usize) -> Result<(), TreeError> {
        match self {
            TreeNode::Feature(i) if *i >= feature_dim => Err(TreeError::FeatureOutOfRange {
                index: *i,
                feature_dim,
            }),
            TreeNode::Op { kind, children } => {
                if !kind.accepts_arity(children.len()) {
                    return Err(TreeError::Arity {
                        kind: *kind,
                        got: children.len(),
                    });
                }
                children.iter().try_for_each(|c| c.check(feature_dim))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("feature index {index} out of range for feature dimension {feature_dim}")]
    FeatureOutOfRange { index: usize, feature_dim: usize },
    #[error("{kind} cannot take {got} arguments")]
    Arity { kind: OpKind, got: usize },
    #[error("feature dimension must be at least 1")]
    EmptyFeatures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeId(pub u64);

static NEXT_TREE_ID: AtomicU64 = AtomicU64::new(1);

impl TreeId {
    fn fresh() -> Self {
        TreeId(NEXT_TREE_ID.fetch_add(1, Ordering::Relaxed))
    }
}

/// A validated reward tree over `feature_dim` inputs.
///
/// Equality is structural; the `id` only tracks identity for logging.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "text::TreeRecord", try_from = "text::TreeRecord")]
pub struct SymTree {
    root: TreeNode,
    feature_dim: usize,
    id: TreeId,
}

impl PartialEq for SymTree {
    fn eq(&self, other: &Self) -> bool {
        self.feature_dim == other.feature_dim && self.root == other.root
    }
}

impl SymTree {
    pub fn new(root: TreeNode, feature_dim: usize) -> Result<Self, TreeError> {
        if feature_dim == 0 {
            return Err(TreeError::EmptyFeatures);
        }
        root.check(feature_dim)?;
        Ok(SymTree {
            root,
            feature_dim,
            id: TreeId::fresh(),
        })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn id(&self) -> TreeId {
        self.id
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn operator_count(&self) -> usize {
        self.root.operator_count()
    }

    /// Raw tree output. May be non-finite; callers that feed TD targets must
    /// sanitize.
    ///
    /// # Panics
    ///
    /// Panics if `features.len() != self.feature_dim()`.
    pub fn evaluate(&self, features: &[f64]) -> f64 {
        assert_eq!(
            features.len(),
            self.feature_dim,
            "feature vector length does not match tree"
        );
        self.root.evaluate(features)
    }
}
