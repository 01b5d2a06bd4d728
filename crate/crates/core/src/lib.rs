//! CHOP: a classical higher-order session calculus with first-class process
//! abstractions.

pub mod ast;
pub mod check;
pub mod eval;
pub mod fresh;
pub mod multiparty;
pub mod subst;
pub mod syntax;
pub mod translate;
pub mod types;

pub use ast::*;
