//! Single-variable arithmetic expressions.
//!
//! Target functions `f(x)` and custom kernel modifiers `h(t)` are parsed once
//! into an immutable tree and evaluated pointwise; nothing downstream needs
//! more than values at points, so there is no simplification or symbolic
//! rewriting anywhere. Evaluation is pure, which makes a parsed expression
//! safe to share across threads and guarantees bit-identical results for
//! identical inputs.

mod kernel;
mod parse;

pub use kernel::{Kernel, KernelError};
pub use parse::ParseError;

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Builtin {
    Sqrt,
    Exp,
    Log,
    Abs,
    Pow,
    Min,
    Max,
}

impl Builtin {
    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Builtin::Sqrt,
            "exp" => Builtin::Exp,
            "log" => Builtin::Log,
            "abs" => Builtin::Abs,
            "pow" => Builtin::Pow,
            "min" => Builtin::Min,
            "max" => Builtin::Max,
            _ => return None,
        })
    }

    pub(crate) fn name(self) -> &'static str {
        match self {
            Builtin::Sqrt => "sqrt",
            Builtin::Exp => "exp",
            Builtin::Log => "log",
            Builtin::Abs => "abs",
            Builtin::Pow => "pow",
            Builtin::Min => "min",
            Builtin::Max => "max",
        }
    }

    pub(crate) fn arity(self) -> usize {
        match self {
            Builtin::Sqrt | Builtin::Exp | Builtin::Log | Builtin::Abs => 1,
            Builtin::Pow | Builtin::Min | Builtin::Max => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Number(f64),
    Variable,
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Builtin, Vec<Node>),
}

/// Why a point fell outside the real domain of an expression.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DomainReason {
    #[error("square root of negative value {arg}")]
    SqrtOfNegative { arg: f64 },
    #[error("logarithm of non-positive value {arg}")]
    LogOfNonPositive { arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative base {base} raised to non-integer exponent {exponent}")]
    FractionalPowerOfNegative { base: f64, exponent: f64 },
    #[error("zero raised to negative exponent {exponent}")]
    ZeroToNegativePower { exponent: f64 },
    #[error("intermediate value is not finite")]
    NotFinite,
}

/// Evaluation failure. Every variant carries the input point at which the
/// failure occurred, so callers can report exactly where an integrand or a
/// sampled triple left the expression's domain.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error at {point}: {reason}")]
    Domain { point: f64, reason: DomainReason },
    #[error("evaluation point {point} is not finite")]
    NonFinitePoint { point: f64 },
}

/// A parsed expression over one named variable.
///
/// The variable name is fixed at parse time (`x` for target functions, `t`
/// for kernels); any other identifier must be a known builtin applied with
/// the right arity. Evaluation never yields NaN or infinity silently — every
/// excursion outside the real domain becomes an [`EvalError`].
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionExpr {
    root: Node,
    source: String,
    variable: String,
}

impl FunctionExpr {
    pub fn parse(source: &str, variable: &str) -> Result<Self, ParseError> {
        let root = parse::parse(source, variable)?;
        Ok(FunctionExpr {
            root,
            source: source.to_string(),
            variable: variable.to_string(),
        })
    }

    pub(crate) fn from_root(root: Node, variable: &str) -> Self {
        let source = print_node(&root, variable);
        FunctionExpr {
            root,
            source,
            variable: variable.to_string(),
        }
    }

    /// The text this expression was parsed from.
    pub fn source_text(&self) -> &str {
        &self.source
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    /// Canonical text form; reparsing it reproduces the same tree.
    pub fn canonical_text(&self) -> String {
        print_node(&self.root, &self.variable)
    }

    pub fn evaluate(&self, point: f64) -> Result<f64, EvalError> {
        if !point.is_finite() {
            return Err(EvalError::NonFinitePoint { point });
        }
        eval_node(&self.root, point, point)
    }

    /// Pointwise sum `self + other`. `None` if the variables differ.
    pub fn try_sum(&self, other: &Self) -> Option<Self> {
        if self.variable != other.variable {
            return None;
        }
        let root = Node::Binary(
            BinaryOp::Add,
            Box::new(self.root.clone()),
            Box::new(other.root.clone()),
        );
        Some(FunctionExpr::from_root(root, &self.variable))
    }

    /// Pointwise scaling `factor * self`.
    pub fn scaled(&self, factor: f64) -> Self {
        let root = Node::Binary(
            BinaryOp::Mul,
            Box::new(Node::Number(factor)),
            Box::new(self.root.clone()),
        );
        FunctionExpr::from_root(root, &self.variable)
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

// `point` is the top-level input, threaded through for error reporting; `x`
// is the current variable value (identical today, but kept separate so the
// evaluator would survive substitution-style extensions).
fn eval_node(node: &Node, x: f64, point: f64) -> Result<f64, EvalError> {
    let value = match node {
        Node::Number(c) => *c,
        Node::Variable => x,
        Node::Neg(inner) => -eval_node(inner, x, point)?,
        Node::Binary(op, lhs, rhs) => {
            let a = eval_node(lhs, x, point)?;
            let b = eval_node(rhs, x, point)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::Domain {
                            point,
                            reason: DomainReason::DivisionByZero,
                        });
                    }
                    a / b
                }
                BinaryOp::Pow => checked_pow(a, b, point)?,
            }
        }
        Node::Call(builtin, args) => {
            let a = eval_node(&args[0], x, point)?;
            match builtin {
                Builtin::Sqrt => {
                    if a < 0.0 {
                        return Err(EvalError::Domain {
                            point,
                            reason: DomainReason::SqrtOfNegative { arg: a },
                        });
                    }
                    a.sqrt()
                }
                Builtin::Exp => a.exp(),
                Builtin::Log => {
                    if a <= 0.0 {
                        return Err(EvalError::Domain {
                            point,
                            reason: DomainReason::LogOfNonPositive { arg: a },
                        });
                    }
                    a.ln()
                }
                Builtin::Abs => a.abs(),
                Builtin::Pow => {
                    let b = eval_node(&args[1], x, point)?;
                    checked_pow(a, b, point)?
                }
                Builtin::Min => a.min(eval_node(&args[1], x, point)?),
                Builtin::Max => a.max(eval_node(&args[1], x, point)?),
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::Domain {
            point,
            reason: DomainReason::NotFinite,
        })
    }
}

fn checked_pow(base: f64, exponent: f64, point: f64) -> Result<f64, EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain {
            point,
            reason: DomainReason::FractionalPowerOfNegative { base, exponent },
        });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::Domain {
            point,
            reason: DomainReason::ZeroToNegativePower { exponent },
        });
    }
    Ok(base.powf(exponent))
}

// Precedence levels used by both the parser and the printer. Higher binds
// tighter; `^` is right-associative, everything else associates left.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Number(_) | Node::Variable | Node::Call(..) => PREC_ATOM,
        Node::Neg(_) => PREC_NEG,
        Node::Binary(BinaryOp::Pow, ..) => PREC_POW,
        Node::Binary(BinaryOp::Mul, ..) | Node::Binary(BinaryOp::Div, ..) => PREC_MUL,
        Node::Binary(BinaryOp::Add, ..) | Node::Binary(BinaryOp::Sub, ..) => PREC_ADD,
    }
}

fn print_node(node: &Node, variable: &str) -> String {
    let mut out = String::new();
    write_node(node, variable, &mut out);
    out
}

fn write_node(node: &Node, variable: &str, out: &mut String) {
    match node {
        Node::Number(v) => {
            // `{:?}` is the shortest representation that round-trips to the
            // same bits, so printed constants reparse exactly.
            out.push_str(&format!("{v:?}"));
        }
        Node::Variable => out.push_str(variable),
        Node::Neg(inner) => {
            out.push('-');
            write_child(inner, variable, out, precedence(inner) < PREC_NEG);
        }
        Node::Binary(op, lhs, rhs) => {
            let (symbol, prec) = match op {
                BinaryOp::Add => (" + ", PREC_ADD),
                BinaryOp::Sub => (" - ", PREC_ADD),
                BinaryOp::Mul => (" * ", PREC_MUL),
                BinaryOp::Div => (" / ", PREC_MUL),
                BinaryOp::Pow => ("^", PREC_POW),
            };
            if *op == BinaryOp::Pow {
                // Right-associative: parenthesize a left child at the same
                // level, let the right child chain.
                write_child(lhs, variable, out, precedence(lhs) <= prec);
                out.push_str(symbol);
                write_child(rhs, variable, out, precedence(rhs) < prec);
            } else {
                write_child(lhs, variable, out, precedence(lhs) < prec);
                out.push_str(symbol);
                // Left-associative: a right child at the same level needs
                // parentheses to preserve the tree (`a - (b - c)`).
                write_child(rhs, variable, out, precedence(rhs) <= prec);
            }
        }
        Node::Call(builtin, args) => {
            out.push_str(builtin.name());
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_node(arg, variable, out);
            }
            out.push(')');
        }
    }
}

fn write_child(node: &Node, variable: &str, out: &mut String, parens: bool) {
    if parens {
        out.push('(');
        write_node(node, variable, out);
        out.push(')');
    } else {
        write_node(node, variable, out);
    }
}
