//! Prefix text form: `(add (cos f3) c1)`.
//!
//! `fN` is feature `N`, `c0`/`c1` the two constants, and every operator node is
//! a parenthesised list headed by its operator name. Whitespace between tokens
//! is free-form; [`serialize`] emits single spaces.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ConstValue, OpKind, SymTree, TreeNode};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at byte {position}: {reason}")]
pub struct ParseError {
    pub position: usize,
    pub reason: String,
}

impl ParseError {
    fn new(position: usize, reason: impl Into<String>) -> Self {
        ParseError {
            position,
            reason: reason.into(),
        }
    }
}

pub fn serialize(tree: &SymTree) -> String {
    let mut out = String::new();
    write_node(&tree.root, &mut out);
    out
}

fn write_node(node: &TreeNode, out: &mut String) {
    match node {
        TreeNode::Feature(i) => {
            let _ = write!(out, "f{i}");
        }
        TreeNode::Const(ConstValue::Zero) => out.push_str("c0"),
        TreeNode::Const(ConstValue::One) => out.push_str("c1"),
        TreeNode::Op { kind, children } => {
            out.push('(');
            out.push_str(kind.name());
            for c in children {
                out.push(' ');
                write_node(c, out);
            }
            out.push(')');
        }
    }
}

/// Parses the prefix form, validating arities and feature indices against
/// `feature_dim`.
pub fn deserialize(text: &str, feature_dim: usize) -> Result<SymTree, ParseError> {
    if feature_dim == 0 {
        return Err(ParseError::new(0, "feature dimension must be at least 1"));
    }
    let mut parser = Parser {
        src: text,
        pos: 0,
        feature_dim,
    };
    let root = parser.node()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(ParseError::new(parser.pos, "trailing input after expression"));
    }
    Ok(SymTree::new(root, feature_dim).expect("parser validates every node"))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    feature_dim: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn word(&mut self) -> (usize, &'a str) {
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += len;
        (start, &self.src[start..start + len])
    }

    fn node(&mut self) -> Result<TreeNode, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(ParseError::new(self.pos, "unexpected end of input")),
            Some(')') => Err(ParseError::new(self.pos, "unexpected ')'")),
            Some('(') => {
                let open = self.pos;
                self.pos += 1;
                self.skip_ws();
                let (at, name) = self.word();
                if name.is_empty() {
                    return Err(ParseError::new(at, "expected operator name"));
                }
                let kind: OpKind = name
                    .parse()
                    .map_err(|_| ParseError::new(at, format!("unknown operator '{name}'")))?;
                let mut children = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        None => return Err(ParseError::new(open, "unclosed '('")),
                        _ => children.push(self.node()?),
                    }
                }
                if !kind.accepts_arity(children.len()) {
                    let expected = match kind.fixed_arity() {
                        Some(n) => n.to_string(),
                        None => "2 to 5".to_string(),
                    };
                    return Err(ParseError::new(
                        open,
                        format!(
                            "arity mismatch: {kind} takes {expected} arguments, got {}",
                            children.len()
                        ),
                    ));
                }
                Ok(TreeNode::Op { kind, children })
            }
            Some(_) => {
                let (at, atom) = self.word();
                self.atom(at, atom)
            }
        }
    }

    fn atom(&self, at: usize, atom: &str) -> Result<TreeNode, ParseError> {
        match atom {
            "c0" => Ok(TreeNode::Const(ConstValue::Zero)),
            "c1" => Ok(TreeNode::Const(ConstValue::One)),
            _ => {
                let index = atom
                    .strip_prefix('f')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| ParseError::new(at, format!("unknown terminal '{atom}'")))?;
                if index >= self.feature_dim {
                    return Err(ParseError::new(
                        at,
                        format!(
                            "feature index {index} out of range for feature dimension {}",
                            self.feature_dim
                        ),
                    ));
                }
                Ok(TreeNode::Feature(index))
            }
        }
    }
}

/// On-disk shape of a tree inside JSON checkpoints.
#[derive(Serialize, Deserialize)]
pub(super) struct TreeRecord {
    feature_dim: usize,
    expr: String,
}

impl From<SymTree> for TreeRecord {
    fn from(tree: SymTree) -> Self {
        TreeRecord {
            feature_dim: tree.feature_dim,
            expr: serialize(&tree),
        }
    }
}

impl TryFrom<TreeRecord> for SymTree {
    type Error = ParseError;

    fn try_from(record: TreeRecord) -> Result<Self, Self::Error> {
        deserialize(&record.expr, record.feature_dim)
    }
}
