//! Literal re-validation of derivations, one rule instance at a time.

use std::collections::BTreeMap;

use thiserror::Error;

use super::algo::rebuild_mcut;
use super::coherence::check_coherence;
use super::{Derivation, Rule};
use crate::ast::{ChannelCtx, Name, ProcEnv, Process, Type};
use crate::fresh::Fresh;
use crate::subst::{alpha_eq, fresh_for, rename_channel};
use crate::types::{ctx_alpha_eq, dual, instantiate, param_ctx_alpha_eq, subst_types, type_alpha_eq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {rule} step at `{process}`: {reason}")]
pub struct InvalidDerivation {
    pub rule: &'static str,
    pub process: String,
    pub reason: String,
}

type V = Result<(), String>;

fn ensure(cond: bool, reason: &str) -> V {
    if cond {
        Ok(())
    } else {
        Err(reason.to_string())
    }
}

fn without(c: &ChannelCtx, x: &str) -> ChannelCtx {
    let mut c = c.clone();
    c.remove(x);
    c
}

fn with(c: &ChannelCtx, x: &Name, t: Type) -> ChannelCtx {
    let mut c = c.clone();
    c.insert(x.clone(), t);
    c
}

fn union_ctx(cs: impl IntoIterator<Item = ChannelCtx>) -> Option<ChannelCtx> {
    let mut out = ChannelCtx::new();
    for c in cs {
        for (k, v) in c {
            if out.insert(k, v).is_some() {
                return None;
            }
        }
    }
    Some(out)
}

fn union_env<'a>(cs: impl IntoIterator<Item = &'a ProcEnv>) -> Option<ProcEnv> {
    let mut out = ProcEnv::new();
    for c in cs {
        for (k, v) in c {
            if out.insert(k.clone(), v.clone()).is_some() {
                return None;
            }
        }
    }
    Some(out)
}

fn env_eq(a: &ProcEnv, b: &ProcEnv) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((k1, v1), (k2, v2))| k1 == k2 && param_ctx_alpha_eq(v1, v2))
}

fn lookup<'a>(c: &'a ChannelCtx, x: &str) -> Result<&'a Type, String> {
    c.get(x).ok_or_else(|| format!("`{x}` missing from the context"))
}

/// Checks that every node follows from its premises by its rule.
pub fn validate(d: &Derivation) -> Result<(), InvalidDerivation> {
    for p in &d.premises {
        validate(p)?;
    }
    step(d).map_err(|reason| InvalidDerivation { rule: d.rule.name(), process: d.process.to_string(), reason })
}

fn arity(d: &Derivation, n: usize) -> V {
    ensure(d.premises.len() == n, &format!("expected {n} premises, found {}", d.premises.len()))
}

fn same_env(d: &Derivation, prem: &Derivation) -> V {
    ensure(env_eq(&d.theta, &prem.theta), "process environment changed")
}

fn step(d: &Derivation) -> V {
    use Process::*;
    let g = &d.gamma;
    let th = &d.theta;
    let pr = &d.premises;
    let mut fresh: Fresh = fresh_for(std::iter::once(&d.process).chain(pr.iter().map(|p| &p.process)));
    match (&d.rule, &d.process) {
        (Rule::Axiom, Link(x, y, a)) => {
            arity(d, 0)?;
            ensure(th.is_empty(), "process environment not empty")?;
            let want = ChannelCtx::from([(x.clone(), dual(a)), (y.clone(), a.clone())]);
            ensure(x != y && ctx_alpha_eq(g, &want), "context is not exactly the two linked endpoints")
        }
        (Rule::Cut { x, y }, Cut(_, a, _, _, _)) => {
            arity(d, 2)?;
            ensure(type_alpha_eq(lookup(&pr[0].gamma, x)?, a), "left premise type differs from annotation")?;
            ensure(type_alpha_eq(lookup(&pr[1].gamma, y)?, &dual(a)), "right premise type is not dual")?;
            let u = union_ctx([without(&pr[0].gamma, x), without(&pr[1].gamma, y)]).ok_or("contexts overlap")?;
            ensure(ctx_alpha_eq(&u, g), "conclusion context is not the union of the premises")?;
            ensure(union_env([&pr[0].theta, &pr[1].theta]).is_some_and(|t| env_eq(&t, th)), "environments not split")?;
            let rebuilt = Process::cut(x, a.clone(), y, pr[0].process.clone(), pr[1].process.clone());
            ensure(alpha_eq(&rebuilt, &d.process), "premise processes do not match")
        }
        (Rule::Tensor { y }, Send(x, _, _, _)) => {
            arity(d, 2)?;
            let Type::Tensor(a, b) = lookup(g, x)? else { return Err("subject is not a tensor".into()) };
            ensure(type_alpha_eq(lookup(&pr[0].gamma, y)?, a), "sent session has the wrong type")?;
            ensure(type_alpha_eq(lookup(&pr[1].gamma, x)?, b), "continuation has the wrong type")?;
            let u = union_ctx([without(&pr[0].gamma, y), without(&pr[1].gamma, x)]).ok_or("contexts overlap")?;
            ensure(ctx_alpha_eq(&u, &without(g, x)), "conclusion context is not the union of the premises")?;
            ensure(union_env([&pr[0].theta, &pr[1].theta]).is_some_and(|t| env_eq(&t, th)), "environments not split")?;
            let rebuilt = Process::send(x, y, pr[0].process.clone(), pr[1].process.clone());
            ensure(alpha_eq(&rebuilt, &d.process), "premise processes do not match")
        }
        (Rule::Par { y }, Recv(x, _, _)) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            let Type::Par(a, b) = lookup(g, x)? else { return Err("subject is not a par".into()) };
            let rest = without(g, x);
            ensure(!rest.contains_key(y), "bound name clashes with the context")?;
            let want = with(&with(&rest, y, (**a).clone()), x, (**b).clone());
            ensure(ctx_alpha_eq(&pr[0].gamma, &want), "premise context mismatch")?;
            ensure(alpha_eq(&Process::recv(x, y, pr[0].process.clone()), &d.process), "premise process mismatch")
        }
        (Rule::Plus1 | Rule::Plus2, SelL(x, body) | SelR(x, body)) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            let Type::Plus(a, b) = lookup(g, x)? else { return Err("subject is not a plus".into()) };
            let left = matches!(d.process, SelL(..));
            ensure(left == (d.rule == Rule::Plus1), "rule does not match the selection")?;
            let c = if left { a } else { b };
            ensure(ctx_alpha_eq(&pr[0].gamma, &with(g, x, (**c).clone())), "premise context mismatch")?;
            ensure(alpha_eq(&pr[0].process, body), "premise process mismatch")
        }
        (Rule::With, Offer(x, l, r)) => {
            arity(d, 2)?;
            same_env(d, &pr[0])?;
            same_env(d, &pr[1])?;
            let Type::With(a, b) = lookup(g, x)? else { return Err("subject is not a with".into()) };
            ensure(ctx_alpha_eq(&pr[0].gamma, &with(g, x, (**a).clone())), "left premise context mismatch")?;
            ensure(ctx_alpha_eq(&pr[1].gamma, &with(g, x, (**b).clone())), "right premise context mismatch")?;
            ensure(alpha_eq(&pr[0].process, l) && alpha_eq(&pr[1].process, r), "premise process mismatch")
        }
        (Rule::Top, EmptyOffer(x)) => {
            arity(d, 0)?;
            ensure(*lookup(g, x)? == Type::Top, "subject is not top")
        }
        (Rule::WhyNot { y } | Rule::OfCourse { y }, Client(x, _, _) | Server(x, _, _)) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            let client = matches!(d.process, Client(..));
            ensure(client == matches!(d.rule, Rule::WhyNot { .. }), "rule does not match the process")?;
            let a = match (lookup(g, x)?, client) {
                (Type::WhyNot(a), true) | (Type::OfCourse(a), false) => a,
                _ => return Err("subject has the wrong exponential".into()),
            };
            let rest = without(g, x);
            if !client {
                ensure(th.is_empty(), "server with a process environment")?;
                ensure(rest.values().all(Type::is_why_not), "server context is not all client requests")?;
            }
            ensure(!rest.contains_key(y), "bound name clashes with the context")?;
            ensure(ctx_alpha_eq(&pr[0].gamma, &with(&rest, y, (**a).clone())), "premise context mismatch")?;
            let rebuilt = if client {
                Client(x.clone(), y.clone(), Box::new(pr[0].process.clone()))
            } else {
                Server(x.clone(), y.clone(), Box::new(pr[0].process.clone()))
            };
            ensure(alpha_eq(&rebuilt, &d.process), "premise process mismatch")
        }
        (Rule::Exists, SendType(x, a, body)) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            let Type::Exists(v, b) = lookup(g, x)? else { return Err("subject is not existential".into()) };
            let b2 = subst_types(b, &BTreeMap::from([(v.clone(), a.clone())]), &mut fresh);
            ensure(ctx_alpha_eq(&pr[0].gamma, &with(g, x, b2)), "premise context mismatch")?;
            ensure(alpha_eq(&pr[0].process, body), "premise process mismatch")
        }
        (Rule::Forall, RecvType(x, v, body)) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            let Type::Forall(w, b) = lookup(g, x)? else { return Err("subject is not universal".into()) };
            let rest = without(g, x);
            let free = rest.values().any(|t| t.ftv().contains(v))
                || th.values().any(|c| c.iter().any(|(_, t)| t.ftv().contains(v)));
            ensure(!free, "type variable free in the context")?;
            let b2 = subst_types(b, &BTreeMap::from([(w.clone(), Type::Var(v.clone()))]), &mut fresh);
            ensure(ctx_alpha_eq(&pr[0].gamma, &with(&rest, x, b2)), "premise context mismatch")?;
            ensure(alpha_eq(&pr[0].process, body), "premise process mismatch")
        }
        (Rule::Weaken { x }, _) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            ensure(lookup(g, x)?.is_why_not(), "weakened channel is not a client request")?;
            ensure(ctx_alpha_eq(&pr[0].gamma, &without(g, x)), "premise context mismatch")?;
            ensure(pr[0].process == d.process, "premise process mismatch")
        }
        (Rule::Contract { x, y, z }, _) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            let t = lookup(g, x)?;
            ensure(t.is_why_not(), "contracted channel is not a client request")?;
            let rest = without(g, x);
            ensure(y != z && !rest.contains_key(y) && !rest.contains_key(z), "contracted names clash")?;
            ensure(
                ctx_alpha_eq(&pr[0].gamma, &with(&with(&rest, y, t.clone()), z, t.clone())),
                "premise context mismatch",
            )?;
            let merged = rename_channel(&rename_channel(&pr[0].process, x, y), x, z);
            ensure(alpha_eq(&merged, &d.process), "premise process does not merge into the conclusion")
        }
        (Rule::One, Close(x)) => {
            arity(d, 0)?;
            ensure(th.is_empty(), "process environment not empty")?;
            ensure(
                ctx_alpha_eq(g, &ChannelCtx::from([(x.clone(), Type::One)])),
                "context is not exactly the closed channel",
            )
        }
        (Rule::Bot, Wait(x, body)) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            ensure(*lookup(g, x)? == Type::Bot, "subject is not bot")?;
            ensure(ctx_alpha_eq(&pr[0].gamma, &without(g, x)), "premise context mismatch")?;
            ensure(alpha_eq(&pr[0].process, body), "premise process mismatch")
        }
        (Rule::Id, Invoke(q, rho)) => {
            arity(d, 0)?;
            ensure(th.len() == 1, "environment is not a single variable")?;
            let delta = th.get(q).ok_or("invoked variable not in the environment")?;
            let inst = instantiate(delta, rho).map_err(|e| e.to_string())?;
            ensure(ctx_alpha_eq(g, &inst), "context is not the instantiated process type")
        }
        (Rule::Chop { p }, ExplSubst(_, _, rho, delta, _)) => {
            arity(d, 2)?;
            let inst = instantiate(delta, rho).map_err(|e| e.to_string())?;
            ensure(ctx_alpha_eq(&pr[0].gamma, &inst), "abstraction body context mismatch")?;
            ensure(ctx_alpha_eq(&pr[1].gamma, g), "scope context mismatch")?;
            let pd = pr[1].theta.get(p).ok_or("chopped variable missing from the scope environment")?;
            ensure(param_ctx_alpha_eq(pd, delta), "chopped variable has the wrong process type")?;
            let mut scope_env = pr[1].theta.clone();
            scope_env.remove(p);
            ensure(union_env([&pr[0].theta, &scope_env]).is_some_and(|t| env_eq(&t, th)), "environments not split")?;
            let rebuilt =
                Process::expl_subst(pr[1].process.clone(), p, rho.clone(), delta.clone(), pr[0].process.clone());
            ensure(alpha_eq(&rebuilt, &d.process), "premise processes do not match")
        }
        (Rule::Provide, SendProc(x, rho, body)) => {
            arity(d, 1)?;
            same_env(d, &pr[0])?;
            let Type::Provide(delta) = lookup(g, x)? else { return Err("subject is not a process output".into()) };
            ensure(g.len() == 1, "context has channels besides the subject")?;
            let inst = instantiate(delta, rho).map_err(|e| e.to_string())?;
            ensure(ctx_alpha_eq(&pr[0].gamma, &inst), "premise context mismatch")?;
            ensure(alpha_eq(&pr[0].process, body), "premise process mismatch")
        }
        (Rule::Assume { p }, RecvProc(x, _, _)) => {
            arity(d, 1)?;
            let Type::Assume(delta) = lookup(g, x)? else { return Err("subject is not a process input".into()) };
            ensure(!th.contains_key(p), "bound variable clashes with the environment")?;
            let mut want = th.clone();
            want.insert(p.clone(), delta.clone());
            ensure(env_eq(&pr[0].theta, &want), "premise environment mismatch")?;
            ensure(ctx_alpha_eq(&pr[0].gamma, &without(g, x)), "premise context mismatch")?;
            ensure(alpha_eq(&Process::recv_proc(x, p, pr[0].process.clone()), &d.process), "premise process mismatch")
        }
        (Rule::CCut { chans }, MCut(m)) => {
            arity(d, m.branches.len())?;
            ensure(chans.len() == m.branches.len(), "endpoint list has the wrong length")?;
            let ends = check_coherence(&m.global).map_err(|e| e.to_string())?;
            ensure(ends.len() == m.branches.len(), "global type arity differs")?;
            for ((b, c), p) in m.branches.iter().zip(chans).zip(pr) {
                let want = ends.get(&b.chan).ok_or("branch is not an endpoint")?;
                ensure(type_alpha_eq(&b.ty, want), "branch annotation differs from coherence")?;
                ensure(type_alpha_eq(lookup(&p.gamma, c)?, want), "branch premise has the wrong endpoint type")?;
            }
            let u = union_ctx(pr.iter().zip(chans).map(|(p, c)| without(&p.gamma, c))).ok_or("contexts overlap")?;
            ensure(ctx_alpha_eq(&u, g), "conclusion context is not the union of the branches")?;
            ensure(union_env(pr.iter().map(|p| &p.theta)).is_some_and(|t| env_eq(&t, th)), "environments not split")?;
            let rebuilt = rebuild_mcut(m, chans, pr.iter().map(|p| p.process.clone()).collect());
            ensure(alpha_eq(&Process::MCut(Box::new(rebuilt)), &d.process), "premise processes do not match")
        }
        _ => Err("rule does not apply to this process".into()),
    }
}
