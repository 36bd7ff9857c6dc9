use thiserror::Error;

use crate::syntax::ast::Pos;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

/// Errors raised while turning a surface program into core IR.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("duplicate definition of `{0}`")]
    Duplicate(String),
    #[error("unknown constructor `{0}`")]
    UnknownCtor(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown identifier `{0}`")]
    UnknownName(String),
    #[error("constructor `{name}` expects {expected} arguments, got {found}")]
    CtorArity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("rules of `{0}` have different numbers of arguments")]
    RuleArity(String),
    #[error("variable `{var}` occurs more than once in a pattern of `{func}` (non-linear patterns are not supported)")]
    NonLinearPattern { func: String, var: String },
    #[error("cannot determine the type of pattern variable `{var}` in a functional pattern of `{func}`: {reason}")]
    UntypedPatternVar {
        func: String,
        var: String,
        reason: String,
    },
    #[error("free variable `{var}` has type `{ty}`, which has no generator")]
    NoGenerator { var: String, ty: String },
    #[error("type `{0}` has no constructors")]
    EmptyType(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("invalid program: {0}")]
    Invalid(String),
}

/// Errors raised by the evaluator. Failure of a computation is not an
/// error; it is the `Fail` value.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("step limit of {0} reductions exceeded")]
    StepLimit(u64),
    #[error("evaluation of an expression depends on its own value")]
    BlackHole,
    #[error("constructor `{0}` applied to too many arguments")]
    OverApplied(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type EvalResult<T> = Result<T, EvalError>;
