//! Kernel modifiers `h` on the open unit interval.
//!
//! The kernel weights the two halves of the convexity combination. The
//! presets cover the standard classes — `identity` for ordinary convexity,
//! `one` for P-functions, `reciprocal` for Godunova–Levin functions, and
//! `power:S` for s-convexity — while `Custom` accepts any expression in `t`
//! that is defined and non-negative on (0, 1).

use super::{EvalError, FunctionExpr, ParseError};
use crate::expr::DomainReason;

/// Number of midpoints used to screen custom kernels at construction time.
const VALIDATION_GRID: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `h(t) = t`: plain convex combinations.
    Identity,
    /// `h(t) = 1`: both sides weighted fully.
    One,
    /// `h(t) = 1/t`. Its moments on (0, 1) diverge, which downstream
    /// integral-based bounds must reject.
    Reciprocal,
    /// `h(t) = t^s` with `s` in (0, 1].
    Power { s: f64 },
    /// Any other expression in `t`, validated non-negative on (0, 1).
    Custom(FunctionExpr),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("power kernel exponent must lie in (0, 1], got {s}")]
    ExponentOutOfRange { s: f64 },
    #[error("kernel expressions use the variable `t`, this one uses `{variable}`")]
    WrongVariable { variable: String },
    #[error("kernel is undefined inside (0, 1): {source}")]
    Undefined { source: EvalError },
    #[error("kernel must be non-negative on (0, 1): h({t}) = {value}")]
    Negative { t: f64, value: f64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unrecognized kernel `{spec}`; expected identity, one, reciprocal, power:S, or custom:EXPR")]
    UnknownSpec { spec: String },
}

impl Kernel {
    /// `h(t) = t^s`, the s-convexity kernel. `s` must lie in (0, 1].
    pub fn power(s: f64) -> Result<Self, KernelError> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(KernelError::ExponentOutOfRange { s });
        }
        Ok(Kernel::Power { s })
    }

    /// Wrap a parsed expression as a kernel, screening it on a midpoint grid
    /// of (0, 1) for definedness and non-negativity. The identically-zero
    /// kernel is accepted; it makes the class membership test vacuous, which
    /// is the caller's prerogative.
    pub fn custom(expr: FunctionExpr) -> Result<Self, KernelError> {
        if expr.variable() != "t" {
            return Err(KernelError::WrongVariable {
                variable: expr.variable().to_string(),
            });
        }
        for j in 0..VALIDATION_GRID {
            let t = (j as f64 + 0.5) / VALIDATION_GRID as f64;
            let value = expr
                .evaluate(t)
                .map_err(|source| KernelError::Undefined { source })?;
            if value < 0.0 {
                return Err(KernelError::Negative { t, value });
            }
        }
        Ok(Kernel::Custom(expr))
    }

    /// Parse the flat descriptor syntax used by the command line and the C
    /// interface: `identity`, `one`, `reciprocal`, `power:S`, `custom:EXPR`.
    pub fn parse_spec(spec: &str) -> Result<Self, KernelError> {
        match spec {
            "identity" => return Ok(Kernel::Identity),
            "one" => return Ok(Kernel::One),
            "reciprocal" => return Ok(Kernel::Reciprocal),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("power:") {
            let s: f64 = rest.parse().map_err(|_| KernelError::UnknownSpec {
                spec: spec.to_string(),
            })?;
            return Kernel::power(s);
        }
        if let Some(rest) = spec.strip_prefix("custom:") {
            let expr = FunctionExpr::parse(rest, "t")?;
            return Kernel::custom(expr);
        }
        Err(KernelError::UnknownSpec {
            spec: spec.to_string(),
        })
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, EvalError> {
        if !t.is_finite() {
            return Err(EvalError::NonFinitePoint { point: t });
        }
        match self {
            Kernel::Identity => Ok(t),
            Kernel::One => Ok(1.0),
            Kernel::Reciprocal => {
                if t == 0.0 {
                    Err(EvalError::Domain {
                        point: t,
                        reason: DomainReason::DivisionByZero,
                    })
                } else {
                    Ok(1.0 / t)
                }
            }
            Kernel::Power { s } => Ok(t.powf(*s)),
            Kernel::Custom(expr) => expr.evaluate(t),
        }
    }

    /// The descriptor string this kernel would be written as on the command
    /// line; used to echo inputs back in reports.
    pub fn descriptor(&self) -> String {
        match self {
            Kernel::Identity => "identity".to_string(),
            Kernel::One => "one".to_string(),
            Kernel::Reciprocal => "reciprocal".to_string(),
            Kernel::Power { s } => format!("power:{s}"),
            Kernel::Custom(expr) => format!("custom:{}", expr.source_text()),
        }
    }
}
