//! Duality, type substitution, context instantiation and eta-expansion of links.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{ChannelCtx, Name, ParamCtx, Process, Record, RecordError, Type};
use crate::fresh::Fresh;

pub fn dual(a: &Type) -> Type {
    match a {
        Type::Var(x) => Type::DualVar(x.clone()),
        Type::DualVar(x) => Type::Var(x.clone()),
        Type::Tensor(a, b) => Type::par(dual(a), dual(b)),
        Type::Par(a, b) => Type::tensor(dual(a), dual(b)),
        Type::Plus(a, b) => Type::with(dual(a), dual(b)),
        Type::With(a, b) => Type::plus(dual(a), dual(b)),
        Type::Zero => Type::Top,
        Type::Top => Type::Zero,
        Type::One => Type::Bot,
        Type::Bot => Type::One,
        Type::WhyNot(a) => Type::of_course(dual(a)),
        Type::OfCourse(a) => Type::why_not(dual(a)),
        Type::Exists(x, a) => Type::Forall(x.clone(), Box::new(dual(a))),
        Type::Forall(x, a) => Type::Exists(x.clone(), Box::new(dual(a))),
        Type::Provide(c) => Type::Assume(c.clone()),
        Type::Assume(c) => Type::Provide(c.clone()),
    }
}

/// `a{b/x}`, capture-avoiding.
pub fn subst_type_var(a: &Type, b: &Type, x: &str) -> Type {
    let mut names = BTreeSet::new();
    a.all_vars(&mut names);
    b.all_vars(&mut names);
    let mut fresh = Fresh::avoiding(0, names);
    let map = BTreeMap::from([(x.to_string(), b.clone())]);
    subst_types(a, &map, &mut fresh)
}

/// Simultaneous capture-avoiding substitution of type variables.
pub fn subst_types(a: &Type, map: &BTreeMap<Name, Type>, fresh: &mut Fresh) -> Type {
    if map.is_empty() && !fresh.is_canonical() {
        return a.clone();
    }
    match a {
        Type::Var(x) => map.get(x).cloned().unwrap_or_else(|| a.clone()),
        Type::DualVar(x) => map.get(x).map(dual).unwrap_or_else(|| a.clone()),
        Type::Tensor(l, r) => Type::tensor(subst_types(l, map, fresh), subst_types(r, map, fresh)),
        Type::Par(l, r) => Type::par(subst_types(l, map, fresh), subst_types(r, map, fresh)),
        Type::Plus(l, r) => Type::plus(subst_types(l, map, fresh), subst_types(r, map, fresh)),
        Type::With(l, r) => Type::with(subst_types(l, map, fresh), subst_types(r, map, fresh)),
        Type::WhyNot(b) => Type::why_not(subst_types(b, map, fresh)),
        Type::OfCourse(b) => Type::of_course(subst_types(b, map, fresh)),
        Type::Exists(x, b) => {
            let (x2, b2) = under_type_binder(x, b, map, fresh);
            Type::Exists(x2, Box::new(b2))
        }
        Type::Forall(x, b) => {
            let (x2, b2) = under_type_binder(x, b, map, fresh);
            Type::Forall(x2, Box::new(b2))
        }
        Type::Provide(c) => Type::Provide(c.map_types(|t| subst_types(t, map, fresh))),
        Type::Assume(c) => Type::Assume(c.map_types(|t| subst_types(t, map, fresh))),
        Type::Zero | Type::Top | Type::One | Type::Bot => a.clone(),
    }
}

fn under_type_binder(x: &Name, body: &Type, map: &BTreeMap<Name, Type>, fresh: &mut Fresh) -> (Name, Type) {
    let mut inner = map.clone();
    inner.remove(x);
    let captures = fresh.is_canonical() || inner.values().any(|t| t.ftv().contains(x));
    if captures {
        let x2 = fresh.name(x);
        inner.insert(x.clone(), Type::Var(x2.clone()));
        (x2, subst_types(body, &inner, fresh))
    } else {
        (x.clone(), subst_types(body, &inner, fresh))
    }
}

/// Renames every bound type variable to a canonical name.
pub fn canonical_type(a: &Type) -> Type {
    let mut fresh = Fresh::canonical();
    canonical_type_with(a, &mut fresh)
}

pub(crate) fn canonical_type_with(a: &Type, fresh: &mut Fresh) -> Type {
    subst_types(a, &BTreeMap::new(), fresh)
}

pub fn type_alpha_eq(a: &Type, b: &Type) -> bool {
    a == b || canonical_type(a) == canonical_type(b)
}

pub fn ctx_alpha_eq(a: &ChannelCtx, b: &ChannelCtx) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|((x, s), (y, t))| x == y && type_alpha_eq(s, t))
}

pub fn param_ctx_alpha_eq(a: &ParamCtx, b: &ParamCtx) -> bool {
    a.len() == b.len() && a.iter().zip(b.iter()).all(|((l, s), (m, t))| l == m && type_alpha_eq(s, t))
}

/// `Γρ`: the channel context obtained by renaming labels through the record.
pub fn instantiate(gamma: &ParamCtx, rho: &Record) -> Result<ChannelCtx, RecordError> {
    if gamma.labels() != rho.labels() {
        return Err(RecordError::LabelMismatch(format!(
            "parameters {{{}}} given record ({})",
            gamma.labels().join(", "),
            rho.labels().join(", ")
        )));
    }
    Ok(gamma.iter().zip(rho.iter()).map(|((_, t), (_, x))| (x.clone(), t.clone())).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EtaError {
    #[error("link at atomic type {0} has no eta-expansion")]
    AtomicType(Type),
}

/// One step of eta-expansion of `link x y : a`, where `x : dual a` and `y : a`.
pub fn eta_expand_link(x: &str, y: &str, a: &Type, fresh: &mut Fresh) -> Result<Process, EtaError> {
    use Process as P;
    let (x, y) = (x.to_string(), y.to_string());
    let link = |u: &str, v: &str, t: &Type| P::Link(u.into(), v.into(), t.clone());
    Ok(match a {
        Type::Var(_) | Type::DualVar(_) => return Err(EtaError::AtomicType(a.clone())),
        Type::Tensor(l, r) => {
            let (u, v) = (fresh.name("u"), fresh.name("v"));
            P::Recv(
                x.clone(),
                u.clone(),
                Box::new(P::Send(y.clone(), v.clone(), Box::new(link(&u, &v, l)), Box::new(link(&x, &y, r)))),
            )
        }
        Type::Par(l, r) => {
            let (u, v) = (fresh.name("u"), fresh.name("v"));
            P::Recv(
                y.clone(),
                v.clone(),
                Box::new(P::Send(x.clone(), u.clone(), Box::new(link(&u, &v, l)), Box::new(link(&x, &y, r)))),
            )
        }
        Type::Plus(l, r) => P::Offer(
            x.clone(),
            Box::new(P::SelL(y.clone(), Box::new(link(&x, &y, l)))),
            Box::new(P::SelR(y.clone(), Box::new(link(&x, &y, r)))),
        ),
        Type::With(l, r) => P::Offer(
            y.clone(),
            Box::new(P::SelL(x.clone(), Box::new(link(&x, &y, l)))),
            Box::new(P::SelR(x.clone(), Box::new(link(&x, &y, r)))),
        ),
        Type::Zero => P::EmptyOffer(x),
        Type::Top => P::EmptyOffer(y),
        Type::One => P::Wait(x, Box::new(P::Close(y))),
        Type::Bot => P::Wait(y, Box::new(P::Close(x))),
        Type::OfCourse(b) => {
            let (u, v) = (fresh.name("u"), fresh.name("v"));
            P::Server(y, v.clone(), Box::new(P::Client(x, u.clone(), Box::new(link(&u, &v, b)))))
        }
        Type::WhyNot(b) => {
            let (u, v) = (fresh.name("u"), fresh.name("v"));
            P::Server(x, u.clone(), Box::new(P::Client(y, v.clone(), Box::new(link(&u, &v, b)))))
        }
        Type::Exists(v, b) => {
            let (v2, b2) = fresh_binder(v, b, fresh);
            P::RecvType(
                x.clone(),
                v2.clone(),
                Box::new(P::SendType(y.clone(), Type::Var(v2), Box::new(link(&x, &y, &b2)))),
            )
        }
        Type::Forall(v, b) => {
            let (v2, b2) = fresh_binder(v, b, fresh);
            P::RecvType(
                y.clone(),
                v2.clone(),
                Box::new(P::SendType(x.clone(), Type::Var(v2), Box::new(link(&x, &y, &b2)))),
            )
        }
        Type::Provide(delta) => {
            let p = fresh.name("p");
            let rho = fresh_record(delta, fresh);
            P::RecvProc(x, p.clone(), Box::new(P::SendProc(y, rho.clone(), Box::new(P::Invoke(p, rho)))))
        }
        Type::Assume(delta) => {
            let p = fresh.name("p");
            let rho = fresh_record(delta, fresh);
            P::RecvProc(y, p.clone(), Box::new(P::SendProc(x, rho.clone(), Box::new(P::Invoke(p, rho)))))
        }
    })
}

fn fresh_binder(v: &Name, body: &Type, fresh: &mut Fresh) -> (Name, Type) {
    if !fresh.is_used(v) {
        fresh.reserve([v.clone()]);
        return (v.clone(), body.clone());
    }
    let v2 = fresh.name(v);
    let map = BTreeMap::from([(v.clone(), Type::Var(v2.clone()))]);
    (v2, subst_types(body, &map, fresh))
}

/// A record over the labels of `delta` with fresh channel names.
pub fn fresh_record(delta: &ParamCtx, fresh: &mut Fresh) -> Record {
    let entries = delta.iter().map(|(l, _)| (l.clone(), fresh.name(l))).collect();
    Record::new(entries).expect("labels of a parameter context are distinct")
}

/// Iterates eta-expansion until every link is at an atomic type.
pub fn eta_expand_full(x: &str, y: &str, a: &Type, fresh: &mut Fresh) -> Process {
    match eta_expand_link(x, y, a, fresh) {
        Err(_) => Process::Link(x.into(), y.into(), a.clone()),
        Ok(p) => expand_links(p, fresh),
    }
}

fn expand_links(p: Process, fresh: &mut Fresh) -> Process {
    use Process as P;
    let go = |q: Box<Process>, fresh: &mut Fresh| Box::new(expand_links(*q, fresh));
    match p {
        P::Link(x, y, t) if !t.is_atomic() => eta_expand_full(&x, &y, &t, fresh),
        P::Send(x, y, a, b) => {
            let a = go(a, fresh);
            P::Send(x, y, a, go(b, fresh))
        }
        P::Recv(x, y, a) => P::Recv(x, y, go(a, fresh)),
        P::SelL(x, a) => P::SelL(x, go(a, fresh)),
        P::SelR(x, a) => P::SelR(x, go(a, fresh)),
        P::Offer(x, a, b) => {
            let a = go(a, fresh);
            P::Offer(x, a, go(b, fresh))
        }
        P::Client(x, y, a) => P::Client(x, y, go(a, fresh)),
        P::Server(x, y, a) => P::Server(x, y, go(a, fresh)),
        P::SendType(x, t, a) => P::SendType(x, t, go(a, fresh)),
        P::RecvType(x, v, a) => P::RecvType(x, v, go(a, fresh)),
        P::SendProc(x, r, a) => P::SendProc(x, r, go(a, fresh)),
        P::RecvProc(x, q, a) => P::RecvProc(x, q, go(a, fresh)),
        P::Wait(x, a) => P::Wait(x, go(a, fresh)),
        other => other,
    }
}
