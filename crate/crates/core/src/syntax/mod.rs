//! Surface language: parsing, printing and lowering to the core IR.

pub mod ast;
pub mod core;
pub mod desugar;
pub mod funpat;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod validate;

use crate::error::CompileError;
use crate::prelude;

/// Parses `src`, adds the prelude if asked, transforms functional patterns,
/// lowers to core and validates the result.
pub fn compile_program(src: &str, with_prelude: bool) -> Result<core::CoreProgram, CompileError> {
    let user = parser::parse_program(src)?;
    let merged = if with_prelude {
        prelude::merge(&prelude::prelude_program(), &user)?
    } else {
        user
    };
    let surface = funpat::transform_functional_patterns(&merged)?;
    let prog = desugar::to_core(&surface)?;
    let diagnostics = validate::validate(&prog);
    if let Some(d) = diagnostics.first() {
        return Err(CompileError::Invalid(d.to_string()));
    }
    Ok(prog)
}
