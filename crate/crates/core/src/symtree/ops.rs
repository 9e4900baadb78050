use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The closed operator dictionary a reward tree may draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Add,
    Subtract,
    Multiply,
    Cos,
    Sin,
    Tan,
    Max,
    Min,
    PassGreater,
    PassSmaller,
    EqualTo,
    Gate,
    Square,
    IsNegative,
    DivBy100,
    DivBy10,
    ProtectedDiv,
}

/// Smallest and largest argument count for the variadic `max`/`min`.
pub const VARIADIC_ARITY: (usize, usize) = (2, 5);

impl OpKind {
    pub const ALL: [OpKind; 17] = [
        OpKind::Add,
        OpKind::Subtract,
        OpKind::Multiply,
        OpKind::Cos,
        OpKind::Sin,
        OpKind::Tan,
        OpKind::Max,
        OpKind::Min,
        OpKind::PassGreater,
        OpKind::PassSmaller,
        OpKind::EqualTo,
        OpKind::Gate,
        OpKind::Square,
        OpKind::IsNegative,
        OpKind::DivBy100,
        OpKind::DivBy10,
        OpKind::ProtectedDiv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Subtract => "subtract",
            OpKind::Multiply => "multiply",
            OpKind::Cos => "cos",
            OpKind::Sin => "sin",
            OpKind::Tan => "tan",
            OpKind::Max => "max",
            OpKind::Min => "min",
            OpKind::PassGreater => "pass_greater",
            OpKind::PassSmaller => "pass_smaller",
            OpKind::EqualTo => "equal_to",
            OpKind::Gate => "gate",
            OpKind::Square => "square",
            OpKind::IsNegative => "is_negative",
            OpKind::DivBy100 => "div_by_100",
            OpKind::DivBy10 => "div_by_10",
            OpKind::ProtectedDiv => "protected_div",
        }
    }

    /// `true` for `max`/`min`, whose arity is picked per node.
    pub fn is_variadic(self) -> bool {
        matches!(self, OpKind::Max | OpKind::Min)
    }

    /// Fixed arity, or `None` for the variadic operators.
    pub fn fixed_arity(self) -> Option<usize> {
        match self {
            OpKind::Max | OpKind::Min => None,
            OpKind::Gate => Some(3),
            OpKind::Cos
            | OpKind::Sin
            | OpKind::Tan
            | OpKind::Square
            | OpKind::IsNegative
            | OpKind::DivBy100
            | OpKind::DivBy10 => Some(1),
            OpKind::Add
            | OpKind::Subtract
            | OpKind::Multiply
            | OpKind::PassGreater
            | OpKind::PassSmaller
            | OpKind::EqualTo
            | OpKind::ProtectedDiv => Some(2),
        }
    }

    pub fn accepts_arity(self, n: usize) -> bool {
        match self.fixed_arity() {
            Some(a) => a == n,
            None => (VARIADIC_ARITY.0..=VARIADIC_ARITY.1).contains(&n),
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OpKind::ALL.iter().copied().find(|op| op.name() == s).ok_or(())
    }
}

/// Applies one operator to its arguments.
///
/// Total over all `f64` inputs. Only `protected_div` rewrites non-finite
/// results; everything else propagates them.
///
/// # Panics
///
/// Panics if `args.len()` is not an arity accepted by `kind`.
pub fn eval_op(kind: OpKind, args: &[f64]) -> f64 {
    assert!(
        kind.accepts_arity(args.len()),
        "{kind} called with {} arguments",
        args.len()
    );
    match kind {
        OpKind::Add => args[0] + args[1],
        OpKind::Subtract => args[0] - args[1],
        OpKind::Multiply => args[0] * args[1],
        OpKind::Cos => args[0].cos(),
        OpKind::Sin => args[0].sin(),
        OpKind::Tan => args[0].tan(),
        OpKind::Max => extremum(args, |acc, x| acc > x),
        OpKind::Min => extremum(args, |acc, x| acc < x),
        OpKind::PassGreater => {
            if args[0] > args[1] {
                args[0]
            } else {
                args[1]
            }
        }
        OpKind::PassSmaller => {
            if args[0] < args[1] {
                args[0]
            } else {
                args[1]
            }
        }
        OpKind::EqualTo => {
            if args[0] == args[1] {
                1.0
            } else {
                0.0
            }
        }
        OpKind::Gate => {
            if args[2] <= 0.0 {
                args[0]
            } else {
                args[1]
            }
        }
        OpKind::Square => args[0] * args[0],
        OpKind::IsNegative => {
            if args[0] < 0.0 {
                1.0
            } else {
                0.0
            }
        }
        OpKind::DivBy100 => args[0] / 100.0,
        OpKind::DivBy10 => args[0] / 10.0,
        OpKind::ProtectedDiv => {
            let q = args[0] / args[1];
            if q.is_finite() {
                q
            } else {
                1.0
            }
        }
    }
}

// NumPy reduction semantics: NaN wins outright, otherwise the running value is
// kept only when strictly better, so ties (e.g. 0.0 vs -0.0) go to the later
// argument.
fn extremum(args: &[f64], keep: impl Fn(f64, f64) -> bool) -> f64 {
    if args.iter().any(|x| x.is_nan()) {
        return f64::NAN;
    }
    args[1..]
        .iter()
        .fold(args[0], |acc, &x| if keep(acc, x) { acc } else { x })
}
