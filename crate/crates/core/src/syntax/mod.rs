//! Concrete syntax: `.chop` programs, their parser, printer and desugaring.

pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod printer;

use std::fmt;

use crate::ast::{ChannelCtx, GlobalType, Name, ProcEnv, Process, Type};

pub use desugar::{desugar, desugar_decl, desugar_process, DesugarError};
pub use parser::{
    parse, parse_channel_ctx, parse_channel_ctx_with, parse_proc_env, parse_process, parse_process_with, parse_type,
    parse_with, ParseError, ParseOptions,
};
pub use printer::{print_decl, print_global, print_process, print_program, print_type};

/// Identifiers with this prefix are reserved for channels introduced by the
/// translation to the first-order fragment.
pub const RESERVED_PREFIX: &str = "__";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub name: Name,
    pub theta: ProcEnv,
    pub gamma: ChannelCtx,
    pub body: Process,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub aliases: Vec<(Name, Type)>,
    pub globals: Vec<(Name, GlobalType)>,
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// The declaration named `Main`, or else the last one.
    pub fn main(&self) -> Option<&Decl> {
        self.decl("Main").or_else(|| self.decls.last())
    }

    pub fn alias(&self, name: &str) -> Option<&Type> {
        self.aliases.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}
