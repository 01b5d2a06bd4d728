//! Compilation of checked CHOP derivations into the first-order fragment (CP).
//!
//! A process variable `p` becomes a pair of reserved channels `__x_p` and
//! `__y_p`. Parameter contexts translate to a right-nested tensor of the dual
//! parameter types in label order, closed by `1`.

mod search;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{ChannelCtx, Name, ParamCtx, ProcEnv, Process, Record, Type};
use crate::check::{typecheck_decl, typecheck_with, CheckOptions, Derivation, Rule, TypeError};
use crate::fresh::Fresh;
use crate::subst::rename_channels;
use crate::syntax::{desugar_decl, Program, RESERVED_PREFIX};
use crate::types::dual;

pub use search::{correspondence_check, cp_equiv, search, Correspondence, CorrespondenceEntry, Outcome, MAX_STATES};

/// `x^p`, the channel standing for process variable `p` inside its scope.
pub fn x_chan(p: &str) -> Name {
    format!("{RESERVED_PREFIX}x_{p}")
}

/// `y^p`, the channel on which the abstraction bound to `p` is served.
pub fn y_chan(p: &str) -> Name {
    format!("{RESERVED_PREFIX}y_{p}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("multiparty cuts have no translation into the first-order fragment")]
    Multiparty,
    #[error("derivation node {rule} does not match its process")]
    Malformed { rule: &'static str },
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

pub fn translate_type(a: &Type) -> Type {
    use Type::*;
    let b = |t: &Type| Box::new(translate_type(t));
    match a {
        Var(_) | DualVar(_) | One | Bot | Zero | Top => a.clone(),
        Tensor(l, r) => Tensor(b(l), b(r)),
        Par(l, r) => Par(b(l), b(r)),
        Plus(l, r) => Plus(b(l), b(r)),
        With(l, r) => With(b(l), b(r)),
        WhyNot(t) => WhyNot(b(t)),
        OfCourse(t) => OfCourse(b(t)),
        Exists(v, t) => Exists(v.clone(), b(t)),
        Forall(v, t) => Forall(v.clone(), b(t)),
        Provide(d) => Type::tensor(dual(&translate_ctx(d)), One),
        Assume(d) => Type::par(translate_ctx(d), Bot),
    }
}

/// `⟦Δ⟧`: the channel type `x^p` has in the scope of `p : Δ`.
pub fn translate_ctx(delta: &ParamCtx) -> Type {
    delta.entries().iter().rev().fold(Type::One, |acc, (_, t)| Type::tensor(translate_type(&dual(t)), acc))
}

pub fn translate_env(theta: &ProcEnv) -> ChannelCtx {
    theta.iter().map(|(p, d)| (x_chan(p), translate_ctx(d))).collect()
}

/// `⟦Θ⟧, ⟦Γ⟧`.
pub fn translate_judgement(theta: &ProcEnv, gamma: &ChannelCtx) -> ChannelCtx {
    let mut out: ChannelCtx = gamma.iter().map(|(x, t)| (x.clone(), translate_type(t))).collect();
    out.extend(translate_env(theta));
    out
}

/// True when no higher-order construct or type occurs anywhere in `p`.
pub fn is_cp(p: &Process) -> bool {
    let mut ok = p.is_core();
    p.visit(&mut |q| match q {
        Process::SendProc(..)
        | Process::RecvProc(..)
        | Process::Invoke(..)
        | Process::ExplSubst(..)
        | Process::MCut(..) => ok = false,
        Process::Cut(_, t, _, _, _) | Process::Link(_, _, t) | Process::SendType(_, t, _) => {
            ok &= !t.mentions_higher_order()
        }
        _ => {}
    });
    ok
}

pub fn translate_proc(d: &Derivation) -> Result<Process, TranslateError> {
    let mut fresh = Fresh::avoiding(0, d.process.all_names());
    Tr { fresh: &mut fresh }.go(d)
}

/// Checks `p` and translates the resulting derivation.
pub fn translate_term(theta: &ProcEnv, p: &Process, gamma: &ChannelCtx) -> Result<Process, TranslateError> {
    let d = typecheck_with(theta, p, gamma, CheckOptions::default())?;
    translate_proc(&d)
}

struct Tr<'a> {
    fresh: &'a mut Fresh,
}

impl Tr<'_> {
    fn prem(&mut self, d: &Derivation, i: usize) -> Result<Box<Process>, TranslateError> {
        let p = d.premises.get(i).ok_or(TranslateError::Malformed { rule: d.rule.name() })?;
        Ok(Box::new(self.go(p)?))
    }

    /// `y(z1). ... y(zk). wait y. body` over the record's names in label order.
    fn inputs(y: &Name, rec: &Record, body: Process) -> Process {
        let waited = Process::Wait(y.clone(), Box::new(body));
        rec.entries().iter().rev().fold(waited, |acc, (_, z)| Process::Recv(y.clone(), z.clone(), Box::new(acc)))
    }

    fn go(&mut self, d: &Derivation) -> Result<Process, TranslateError> {
        use Process::*;
        let malformed = || TranslateError::Malformed { rule: d.rule.name() };
        Ok(match (&d.rule, &d.process) {
            (Rule::Axiom, Link(x, y, a)) => Link(x.clone(), y.clone(), translate_type(a)),
            (Rule::Cut { x, y }, Cut(_, a, _, _, _)) => {
                Cut(x.clone(), translate_type(a), y.clone(), self.prem(d, 0)?, self.prem(d, 1)?)
            }
            (Rule::Tensor { y }, Send(x, ..)) => Send(x.clone(), y.clone(), self.prem(d, 0)?, self.prem(d, 1)?),
            (Rule::Par { y }, Recv(x, ..)) => Recv(x.clone(), y.clone(), self.prem(d, 0)?),
            (Rule::Plus1, SelL(x, _)) => SelL(x.clone(), self.prem(d, 0)?),
            (Rule::Plus2, SelR(x, _)) => SelR(x.clone(), self.prem(d, 0)?),
            (Rule::With, Offer(x, ..)) => Offer(x.clone(), self.prem(d, 0)?, self.prem(d, 1)?),
            (Rule::Top, EmptyOffer(x)) => EmptyOffer(x.clone()),
            (Rule::WhyNot { y }, Client(x, ..)) => Client(x.clone(), y.clone(), self.prem(d, 0)?),
            (Rule::OfCourse { y }, Server(x, ..)) => Server(x.clone(), y.clone(), self.prem(d, 0)?),
            (Rule::Exists, SendType(x, a, _)) => SendType(x.clone(), translate_type(a), self.prem(d, 0)?),
            (Rule::Forall, RecvType(x, v, _)) => RecvType(x.clone(), v.clone(), self.prem(d, 0)?),
            (Rule::One, Close(x)) => Close(x.clone()),
            (Rule::Bot, Wait(x, _)) => Wait(x.clone(), self.prem(d, 0)?),
            (Rule::Weaken { .. }, _) => *self.prem(d, 0)?,
            (Rule::Contract { x, y, z }, _) => {
                let body = self.prem(d, 0)?;
                let map = BTreeMap::from([(y.clone(), x.clone()), (z.clone(), x.clone())]);
                rename_channels(&body, &map, self.fresh)
            }
            (Rule::Id, Invoke(q, rho)) => {
                let delta = d.theta.get(q).ok_or_else(malformed)?;
                let xp = x_chan(q);
                let mut out = Close(xp.clone());
                for (l, z) in rho.entries().iter().rev() {
                    let t = delta.get(l).ok_or_else(malformed)?;
                    let c = self.fresh.name("c");
                    let link = Link(z.clone(), c.clone(), translate_type(&dual(t)));
                    out = Send(xp.clone(), c, Box::new(link), Box::new(out));
                }
                out
            }
            (Rule::Chop { p }, ExplSubst(_, _, rho, delta, _)) => {
                let body = *self.prem(d, 0)?;
                let scope = self.prem(d, 1)?;
                let yp = y_chan(p);
                Cut(x_chan(p), translate_ctx(delta), yp.clone(), scope, Box::new(Self::inputs(&yp, rho, body)))
            }
            (Rule::Provide, SendProc(x, rho, _)) => {
                let body = *self.prem(d, 0)?;
                let y = self.fresh.name("y");
                Send(x.clone(), y.clone(), Box::new(Self::inputs(&y, rho, body)), Box::new(Close(x.clone())))
            }
            (Rule::Assume { p }, RecvProc(x, ..)) => {
                let body = self.prem(d, 0)?;
                Recv(x.clone(), x_chan(p), Box::new(Wait(x.clone(), body)))
            }
            (Rule::CCut { .. }, _) => return Err(TranslateError::Multiparty),
            _ => return Err(malformed()),
        })
    }
}

/// Outcome of translating and re-checking one declaration.
#[derive(Debug, Clone)]
pub struct DeclTranslation {
    pub name: Name,
    /// `⟦Θ⟧, ⟦Γ⟧`.
    pub gamma: ChannelCtx,
    pub result: Result<Process, String>,
}

impl DeclTranslation {
    pub fn passed(&self) -> bool {
        self.result.is_ok()
    }
}

/// Desugars, translates and re-checks every declaration in CP mode against
/// `⟦Θ⟧, ⟦Γ⟧`.
pub fn check_translation(prog: &Program) -> Vec<DeclTranslation> {
    prog.decls
        .iter()
        .map(|decl| {
            let gamma = translate_judgement(&decl.theta, &decl.gamma);
            let result = desugar_decl(decl)
                .map_err(|e| format!("desugaring failed: {e}"))
                .and_then(|d| {
                    typecheck_decl(&d, CheckOptions::default()).map_err(|e| format!("source does not check: {e}"))
                })
                .and_then(|d| translate_proc(&d).map_err(|e| e.to_string()))
                .and_then(|q| {
                    if !is_cp(&q) {
                        return Err("translation left a higher-order construct".to_string());
                    }
                    let cp = CheckOptions { cp: true, ..CheckOptions::default() };
                    typecheck_with(&ProcEnv::new(), &q, &gamma, cp).map_err(|e| format!("CP check failed: {e}"))?;
                    Ok(q)
                });
            DeclTranslation { name: decl.name.clone(), gamma, result }
        })
        .collect()
}

#[cfg(test)]
mod tests;
