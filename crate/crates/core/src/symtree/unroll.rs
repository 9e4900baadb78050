use std::fmt::Write as _;

use super::{ConstValue, OpKind, SymTree, TreeNode};

/// `s_0`, `s_1`, ... for a tree over `feature_dim` inputs.
pub fn default_feature_names(feature_dim: usize) -> Vec<String> {
    (0..feature_dim).map(|i| format!("s_{i}")).collect()
}

/// Flattens a tree into straight-line, Python-flavoured pseudocode.
///
/// The first line is a `def` header naming the features. Every operator node
/// becomes one single-assignment statement, children before parents; the root
/// operator (or the root terminal, for operator-free trees) is assigned to
/// `reward` on the last line. Variadic operators take a bracketed list, e.g.
/// `max([s_0, 1, x_2])`.
///
/// # Panics
///
/// Panics if `feature_names.len() != tree.feature_dim()`.
pub fn unroll(tree: &SymTree, feature_names: &[String]) -> String {
    assert_eq!(
        feature_names.len(),
        tree.feature_dim(),
        "one name per feature is required"
    );
    let mut out = format!("def get_intrinsic_reward({}):\n", feature_names.join(", "));
    let mut emitter = Emitter {
        names: feature_names,
        lines: Vec::new(),
        next_var: 1,
    };
    match tree.root() {
        TreeNode::Op { kind, children } => {
            let call = emitter.call(*kind, children);
            emitter.lines.push(format!("reward = {call}"));
        }
        leaf => {
            let atom = emitter.operand(leaf);
            emitter.lines.push(format!("reward = {atom}"));
        }
    }
    for line in emitter.lines {
        let _ = writeln!(out, "    {line}");
    }
    out
}

struct Emitter<'a> {
    names: &'a [String],
    lines: Vec<String>,
    next_var: usize,
}

impl Emitter<'_> {
    /// Name under which `node`'s value is available, emitting statements for
    /// operator nodes as needed.
    fn operand(&mut self, node: &TreeNode) -> String {
        match node {
            TreeNode::Feature(i) => self.names[*i].clone(),
            TreeNode::Const(ConstValue::Zero) => "0".to_string(),
            TreeNode::Const(ConstValue::One) => "1".to_string(),
            TreeNode::Op { kind, children } => {
                let call = self.call(*kind, children);
                let var = format!("x_{}", self.next_var);
                self.next_var += 1;
                self.lines.push(format!("{var} = {call}"));
                var
            }
        }
    }

    fn call(&mut self, kind: OpKind, children: &[TreeNode]) -> String {
        let args: Vec<String> = children.iter().map(|c| self.operand(c)).collect();
        if kind.is_variadic() {
            format!("{kind}([{}])", args.join(", "))
        } else {
            format!("{kind}({})", args.join(", "))
        }
    }
}
