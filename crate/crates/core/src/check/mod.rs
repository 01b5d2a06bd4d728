//! Type checking of judgements `Θ ⊢ P :: Γ`, multiparty coherence, and
//! node-by-node re-validation of derivations.

mod algo;
pub mod coherence;
pub mod oracle;
mod validate;

use std::fmt;

use thiserror::Error;

use crate::ast::{ChannelCtx, Name, ProcEnv, Process};
use crate::syntax::{Decl, Pos};

pub use algo::{typecheck, typecheck_ccut, typecheck_with};
pub use coherence::check_coherence;
pub use validate::validate;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Restrict links to atomic types.
    pub atomic_axioms: bool,
    /// Accept only the first-order fragment: no higher-order terms or types.
    pub cp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    TypeMismatch,
    LinearityViolation,
    UnknownName,
    ContextNotEmpty,
    NonExponentialServerContext,
    TypeVarEscape,
    LabelMismatch,
    IncoherentGlobalType,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {message}")]
pub struct TypeError {
    pub kind: ErrorKind,
    pub pos: Option<Pos>,
    pub message: String,
}

impl TypeError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> TypeError {
        TypeError { kind, pos: None, message: message.into() }
    }

    pub fn at(mut self, pos: Pos) -> TypeError {
        self.pos.get_or_insert(pos);
        self
    }
}

/// Rule tags. Binder names record the names used in the premises, which may
/// differ from the conclusion's when a binder had to be renamed apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Axiom,
    Cut { x: Name, y: Name },
    Tensor { y: Name },
    Par { y: Name },
    Plus1,
    Plus2,
    With,
    WhyNot { y: Name },
    OfCourse { y: Name },
    Exists,
    Forall,
    Weaken { x: Name },
    Contract { x: Name, y: Name, z: Name },
    One,
    Bot,
    Top,
    Id,
    Chop { p: Name },
    Provide,
    Assume { p: Name },
    CCut { chans: Vec<Name> },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Axiom => "Axiom",
            Rule::Cut { .. } => "Cut",
            Rule::Tensor { .. } => "Tensor",
            Rule::Par { .. } => "Par",
            Rule::Plus1 => "Plus1",
            Rule::Plus2 => "Plus2",
            Rule::With => "With",
            Rule::WhyNot { .. } => "WhyNot",
            Rule::OfCourse { .. } => "OfCourse",
            Rule::Exists => "Exists",
            Rule::Forall => "Forall",
            Rule::Weaken { .. } => "Weaken",
            Rule::Contract { .. } => "Contract",
            Rule::One => "One",
            Rule::Bot => "Bot",
            Rule::Top => "Top",
            Rule::Id => "Id",
            Rule::Chop { .. } => "Chop",
            Rule::Provide => "Provide",
            Rule::Assume { .. } => "Assume",
            Rule::CCut { .. } => "CCut",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub theta: ProcEnv,
    pub process: Process,
    pub gamma: ChannelCtx,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Pre-order list of rule names.
    pub fn rules(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule.name()];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }

    pub fn uses_rule(&self, name: &str) -> bool {
        self.rule.name() == name || self.premises.iter().any(|p| p.uses_rule(name))
    }
}

/// Checks a declaration's body against its stated environments. Errors carry
/// the declaration's position.
pub fn typecheck_decl(d: &Decl, opts: CheckOptions) -> Result<Derivation, TypeError> {
    typecheck_with(&d.theta, &d.body, &d.gamma, opts).map_err(|e| e.at(d.pos))
}
