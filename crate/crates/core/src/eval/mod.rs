//! Small-step reduction: principal reductions, eta-expansion of links and
//! commuting conversions for cuts, chops and multiparty cuts.

pub(crate) mod rules;

use std::fmt;

use thiserror::Error;

use crate::ast::{ChannelCtx, Name, ProcEnv, Process};
use crate::check::{typecheck_with, CheckOptions, TypeError};
use crate::fresh::Fresh;
use crate::subst::{Abstraction, Subst};

pub use rules::Family;
use rules::Local;

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepTag {
    pub family: Family,
    pub rule: String,
    /// Child indices from the root to the rewritten node.
    pub path: Vec<usize>,
}

impl fmt::Display for StepTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {} @ {}", self.family, self.rule, path_string(&self.path))
    }
}

pub fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".into();
    }
    path.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    NormalForm,
    FuelExhausted,
    Stuck,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: Process,
    pub steps: Vec<(StepTag, Process)>,
    pub status: Status,
}

impl Trace {
    pub fn last(&self) -> &Process {
        self.steps.last().map(|(_, p)| p).unwrap_or(&self.initial)
    }

    pub fn rule_names(&self) -> Vec<&str> {
        self.steps.iter().map(|(t, _)| t.rule.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub fuel: usize,
    /// Start of the fresh-name counter.
    pub seed: u64,
    /// Also reduce under prefixes and inside abstraction bodies.
    pub deep: bool,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions { fuel: DEFAULT_FUEL, seed: 0, deep: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("process is not well formed: {0}")]
    NotWellFormed(TypeError),
    #[error("free process variables {}: the term is open and may be stuck", .0.join(", "))]
    OpenTerm(Vec<Name>),
    #[error("surface syntax must be desugared before evaluation")]
    NotCore,
}

/// One step of the default strategy at congruence positions.
pub fn step(p: &Process) -> Option<(Process, StepTag)> {
    step_with(p, &RunOptions::default())
}

/// The preferred step: lowest priority class first, then pre-order position.
pub fn step_with(p: &Process, opts: &RunOptions) -> Option<(Process, StepTag)> {
    let mut fresh = Fresh::avoiding(opts.seed, p.all_names());
    let mut cands = Vec::new();
    collect(p, &mut Vec::new(), opts.deep, &mut fresh, &mut cands);
    let best = cands.into_iter().enumerate().min_by_key(|(i, (_, l))| (l.prio, *i))?.1;
    let (path, local) = best;
    let tag = StepTag { family: local.family, rule: local.rule, path: path.clone() };
    Some((p.replace_at(&path, local.result), tag))
}

/// Every available step, in every priority class.
pub fn all_steps(p: &Process, deep: bool) -> Vec<(Process, StepTag)> {
    let mut fresh = Fresh::avoiding(0, p.all_names());
    let mut cands = Vec::new();
    collect(p, &mut Vec::new(), deep, &mut fresh, &mut cands);
    cands
        .into_iter()
        .map(|(path, l)| {
            let tag = StepTag { family: l.family, rule: l.rule, path: path.clone() };
            (p.replace_at(&path, l.result), tag)
        })
        .collect()
}

fn positions(p: &Process, deep: bool) -> Vec<usize> {
    let n = p.children().len();
    if deep {
        return (0..n).collect();
    }
    match p {
        Process::Cut(..) | Process::MCut(..) => (0..n).collect(),
        Process::ExplSubst(..) => vec![0],
        _ => vec![],
    }
}

fn collect(p: &Process, path: &mut Vec<usize>, deep: bool, fresh: &mut Fresh, out: &mut Vec<(Vec<usize>, Local)>) {
    for l in rules::local(p, fresh) {
        out.push((path.clone(), l));
    }
    let kids = p.children();
    for i in positions(p, deep) {
        path.push(i);
        collect(kids[i], path, deep, fresh, out);
        path.pop();
    }
}

/// True when a cut, chop or multiparty cut sits at a reachable position.
pub fn has_redex(p: &Process, deep: bool) -> bool {
    matches!(p, Process::Cut(..) | Process::ExplSubst(..) | Process::MCut(..))
        || positions(p, deep).into_iter().any(|i| has_redex(p.children()[i], deep))
}

/// Steps a process after checking it against the given judgement.
pub fn step_checked(
    theta: &ProcEnv,
    p: &Process,
    gamma: &ChannelCtx,
    check: CheckOptions,
    opts: &RunOptions,
) -> Result<Option<(Process, StepTag)>, EvalError> {
    typecheck_with(theta, p, gamma, check).map_err(EvalError::NotWellFormed)?;
    Ok(step_with(p, opts))
}

/// Iterates `step_with` up to the fuel bound. The caller is responsible for
/// having type-checked `p`.
pub fn run(p: &Process, opts: &RunOptions) -> Result<Trace, EvalError> {
    if !p.is_core() {
        return Err(EvalError::NotCore);
    }
    let open = p.free_proc_vars();
    if !open.is_empty() {
        return Err(EvalError::OpenTerm(open.into_iter().collect()));
    }
    let mut steps = Vec::new();
    let mut cur = p.clone();
    let mut status = Status::FuelExhausted;
    for i in 0..=opts.fuel {
        let next = step_with(&cur, opts);
        match next {
            None => {
                status = if has_redex(&cur, opts.deep) { Status::Stuck } else { Status::NormalForm };
                break;
            }
            Some(_) if i == opts.fuel => break,
            Some((q, tag)) => {
                steps.push((tag, q.clone()));
                cur = q;
            }
        }
    }
    Ok(Trace { initial: p.clone(), steps, status })
}

/// Removes every explicit substitution, innermost first, by substituting the
/// abstraction for its variable. Cuts are left in place.
pub fn eliminate_chops(p: &Process) -> Process {
    let mut q = p.clone();
    for c in q.children_mut() {
        *c = eliminate_chops(c);
    }
    match q {
        Process::ExplSubst(scope, v, rec, _, body) => {
            let s = Subst { procs: [(v, Abstraction { rec, body: *body })].into_iter().collect(), ..Subst::default() };
            let mut fresh = Fresh::avoiding(0, p.all_names());
            s.apply(&scope, &mut fresh)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests;
