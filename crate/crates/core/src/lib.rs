//! A functional logic language evaluated by pull-tabbing over identified
//! choices, with pluggable search strategies.

pub mod bench;
pub mod engine;
pub mod error;
pub mod eval;
pub mod prelude;
pub mod search;
pub mod store;
pub mod supply;
pub mod unify;
pub mod value;
pub mod syntax;
