//! Text formats for target functions and measures.

mod expr;
mod lexer;
mod measure_spec;

pub use expr::{parse_target, BinOp, CmpOp, Comparison, EvalError, Expr, Func, TargetFunction};
pub use measure_spec::{parse_measure, ComponentKind, MeasureComponent, MeasureSpec};

pub(crate) use measure_spec::poly_integral;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` at offset {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("negative weight at offset {offset}")]
    NegativeWeight { offset: usize },
    #[error("invalid measure component at offset {offset}: {message}")]
    InvalidMeasure { offset: usize, message: String },
    #[error("component weights sum to {actual}, declared mass is {declared}")]
    MassMismatch { declared: String, actual: String },
}

/// Evaluates a parsed target at `x`.
pub fn eval_target(f: &TargetFunction, x: f64) -> Result<f64, EvalError> {
    f.eval(x)
}
