use std::collections::{BTreeMap, BTreeSet};

use super::coherence::check_coherence;
use super::{CheckOptions, Derivation, ErrorKind, Rule, TypeError};
use crate::ast::{ChannelCtx, GlobalType, MCut, Name, ParamCtx, ProcEnv, Process, Type};
use crate::fresh::Fresh;
use crate::subst::{rename_channel_with, rename_global, Subst};
use crate::types::{dual, instantiate, subst_types, type_alpha_eq};

type R<T> = Result<T, TypeError>;

fn err<T>(kind: ErrorKind, msg: impl Into<String>) -> R<T> {
    Err(TypeError::new(kind, msg))
}

/// Bound on the number of ways tried for routing unused linear names to `case()` branches.
const MAX_ROUTINGS: usize = 256;

pub fn typecheck(theta: &ProcEnv, p: &Process, gamma: &ChannelCtx) -> R<Derivation> {
    typecheck_with(theta, p, gamma, CheckOptions::default())
}

pub fn typecheck_with(theta: &ProcEnv, p: &Process, gamma: &ChannelCtx, opts: CheckOptions) -> R<Derivation> {
    let mut c = Checker::new(opts, [p], theta, gamma);
    c.preflight(theta, p, gamma)?;
    c.check(theta, p, gamma)
}

/// Checks a multiparty composition given as separate branches, with per-branch environments.
pub fn typecheck_ccut(
    g: &GlobalType,
    branches: &[(Name, Process)],
    thetas: &[ProcEnv],
    gammas: &[ChannelCtx],
) -> R<Derivation> {
    let ends = check_coherence(g)?;
    if branches.len() != ends.len() || thetas.len() != branches.len() || gammas.len() != branches.len() {
        return err(
            ErrorKind::IncoherentGlobalType,
            format!("{} branches against a global type with {} endpoints", branches.len(), ends.len()),
        );
    }
    let mut theta = ProcEnv::new();
    let mut gamma = ChannelCtx::new();
    for (t, g) in thetas.iter().zip(gammas) {
        for (k, v) in t {
            if theta.insert(k.clone(), v.clone()).is_some() {
                return err(ErrorKind::LinearityViolation, format!("process variable `{k}` given to two branches"));
            }
        }
        for (k, v) in g {
            if gamma.insert(k.clone(), v.clone()).is_some() && !v.is_why_not() {
                return err(ErrorKind::LinearityViolation, format!("channel `{k}` given to two branches"));
            }
        }
    }
    let mut bs = Vec::new();
    for (x, body) in branches {
        let Some(ty) = ends.get(x) else {
            return err(ErrorKind::IncoherentGlobalType, format!("`{x}` is not an endpoint of the global type"));
        };
        bs.push(crate::ast::Branch { chan: x.clone(), ty: ty.clone(), body: body.clone() });
    }
    let p = Process::MCut(Box::new(MCut { global: g.clone(), branches: bs }));
    typecheck(&theta, &p, &gamma)
}

pub(super) struct Checker {
    opts: CheckOptions,
    fresh: Fresh,
}

fn node(rule: Rule, theta: &ProcEnv, p: &Process, gamma: &ChannelCtx, premises: Vec<Derivation>) -> Derivation {
    Derivation { rule, theta: theta.clone(), process: p.clone(), gamma: gamma.clone(), premises }
}

fn minus(mut s: BTreeSet<Name>, x: &str) -> BTreeSet<Name> {
    s.remove(x);
    s
}

fn has_top(p: &Process) -> bool {
    let mut found = false;
    p.visit(&mut |q| found |= matches!(q, Process::EmptyOffer(_)));
    found
}

fn with(ctx: &ChannelCtx, x: &Name, t: Type) -> ChannelCtx {
    let mut c = ctx.clone();
    c.insert(x.clone(), t);
    c
}

impl Checker {
    pub(super) fn new<'a>(
        opts: CheckOptions,
        ps: impl IntoIterator<Item = &'a Process>,
        theta: &ProcEnv,
        gamma: &ChannelCtx,
    ) -> Checker {
        let mut fresh = crate::subst::fresh_for(ps);
        fresh.reserve(gamma.keys().cloned());
        fresh.reserve(theta.keys().cloned());
        Checker { opts, fresh }
    }

    fn preflight(&self, theta: &ProcEnv, p: &Process, gamma: &ChannelCtx) -> R<()> {
        if !p.is_core() {
            return err(ErrorKind::TypeMismatch, "surface construct found; desugar before checking");
        }
        if let Some(x) = p.free_channels().into_iter().find(|x| !gamma.contains_key(x)) {
            return err(ErrorKind::UnknownName, format!("channel `{x}` is not in the context"));
        }
        if let Some(q) = p.free_proc_vars().into_iter().find(|q| !theta.contains_key(q)) {
            return err(ErrorKind::UnknownName, format!("process variable `{q}` is not in the environment"));
        }
        if self.opts.cp {
            if !theta.is_empty() {
                return err(ErrorKind::TypeMismatch, "process variables are not part of the first-order fragment");
            }
            if let Some((x, _)) = gamma.iter().find(|(_, t)| t.mentions_higher_order()) {
                return err(ErrorKind::TypeMismatch, format!("channel `{x}` has a higher-order type"));
            }
        }
        Ok(())
    }

    fn cp_type(&self, t: &Type) -> R<()> {
        if self.opts.cp && t.mentions_higher_order() {
            return err(ErrorKind::TypeMismatch, format!("higher-order type `{t}` outside the first-order fragment"));
        }
        Ok(())
    }

    fn cp_term(&self, what: &str) -> R<()> {
        if self.opts.cp {
            return err(ErrorKind::TypeMismatch, format!("{what} is not part of the first-order fragment"));
        }
        Ok(())
    }

    pub(super) fn check(&mut self, theta: &ProcEnv, p: &Process, gamma: &ChannelCtx) -> R<Derivation> {
        let fv = p.free_channels();
        if !matches!(p, Process::EmptyOffer(_)) {
            if let Some((x, _)) = gamma.iter().find(|(x, t)| t.is_why_not() && !fv.contains(*x)) {
                let x = x.clone();
                let mut g = gamma.clone();
                g.remove(&x);
                let prem = self.check(theta, p, &g)?;
                return Ok(node(Rule::Weaken { x }, theta, p, gamma, vec![prem]));
            }
        }
        if let Some((x, p2, y, z)) = self.contraction(p, gamma) {
            let mut g = gamma.clone();
            let t = g.remove(&x).expect("contracted channel is in the context");
            g.insert(y.clone(), t.clone());
            g.insert(z.clone(), t);
            let prem = self.check(theta, &p2, &g)?;
            return Ok(node(Rule::Contract { x, y, z }, theta, p, gamma, vec![prem]));
        }
        self.rule(theta, p, gamma)
    }

    /// Finds a `?`-typed channel needed by two parts of a splitting rule, or by a
    /// client request and its continuation, and splits it into two fresh names.
    fn contraction(&mut self, p: &Process, gamma: &ChannelCtx) -> Option<(Name, Process, Name, Name)> {
        use Process::*;
        let parts: Vec<BTreeSet<Name>> = match p {
            Send(_, y, a, b) => vec![minus(a.free_channels(), y), b.free_channels()],
            Cut(x, _, y, a, b) => vec![minus(a.free_channels(), x), minus(b.free_channels(), y)],
            MCut(m) => m.branches.iter().map(|b| minus(b.body.free_channels(), &b.chan)).collect(),
            Client(x, y, a) if gamma.get(x).is_some_and(Type::is_why_not) && x != y && a.count_free(x) > 0 => {
                let (x1, x2) = (self.fresh.name(x), self.fresh.name(x));
                let a = rename_channel_with(a, &x2, x, &mut self.fresh);
                return Some((x.clone(), Client(x1.clone(), y.clone(), Box::new(a)), x1, x2));
            }
            _ => return None,
        };
        let (x, _) =
            gamma.iter().find(|(x, t)| t.is_why_not() && parts.iter().filter(|s| s.contains(*x)).count() >= 2)?;
        let x = x.clone();
        let first = parts.iter().position(|s| s.contains(&x))?;
        let (x1, x2) = (self.fresh.name(&x), self.fresh.name(&x));
        let ren = |i: usize, q: &Process, fresh: &mut Fresh| {
            let to = if i == first { &x1 } else { &x2 };
            rename_channel_with(q, to, &x, fresh)
        };
        let f = &mut self.fresh;
        let p2 = match p {
            Send(s, y, a, b) => Send(s.clone(), y.clone(), Box::new(ren(0, a, f)), Box::new(ren(1, b, f))),
            Cut(a1, t, b1, a, b) => {
                Cut(a1.clone(), t.clone(), b1.clone(), Box::new(ren(0, a, f)), Box::new(ren(1, b, f)))
            }
            MCut(m) => {
                let mut m = (**m).clone();
                for (i, b) in m.branches.iter_mut().enumerate() {
                    b.body = ren(i, &b.body, f);
                }
                MCut(Box::new(m))
            }
            _ => unreachable!(),
        };
        Some((x, p2, x1, x2))
    }

    /// Renames `binder` in `body` when it clashes with a name in scope.
    fn apart(&mut self, binder: &Name, clash: bool, body: &Process) -> (Name, Process) {
        if !clash {
            return (binder.clone(), body.clone());
        }
        let b = self.fresh.name(binder);
        let body = rename_channel_with(body, &b, binder, &mut self.fresh);
        (b, body)
    }

    fn apart_pvar(&mut self, binder: &Name, clash: bool, body: &Process) -> (Name, Process) {
        if !clash {
            return (binder.clone(), body.clone());
        }
        let b = self.fresh.name(binder);
        let s = Subst { pvars: BTreeMap::from([(binder.clone(), b.clone())]), ..Subst::default() };
        (b.clone(), s.apply(body, &mut self.fresh))
    }

    /// Routes each name of the contexts to the part where it occurs free. Names
    /// free nowhere are tried in every part able to absorb them with `case()`.
    fn routings(
        &self,
        theta: &ProcEnv,
        gamma: &ChannelCtx,
        chan_parts: &[BTreeSet<Name>],
        pv_parts: &[BTreeSet<Name>],
        absorbers: &[bool],
    ) -> R<Vec<Vec<(ProcEnv, ChannelCtx)>>> {
        let n = chan_parts.len();
        let mut base: Vec<(ProcEnv, ChannelCtx)> = vec![(ProcEnv::new(), ChannelCtx::new()); n];
        enum Unused {
            Chan(Name, Type),
            Pvar(Name, ParamCtx),
        }
        let mut unused = Vec::new();
        for (x, t) in gamma {
            let idx: Vec<usize> = (0..n).filter(|&i| chan_parts[i].contains(x)).collect();
            match idx.as_slice() {
                [] => unused.push(Unused::Chan(x.clone(), t.clone())),
                [i] => {
                    base[*i].1.insert(x.clone(), t.clone());
                }
                _ => {
                    return err(
                        ErrorKind::LinearityViolation,
                        format!("linear channel `{x}` is used in two parallel components"),
                    )
                }
            }
        }
        for (q, c) in theta {
            let idx: Vec<usize> = (0..n).filter(|&i| pv_parts[i].contains(q)).collect();
            match idx.as_slice() {
                [] => unused.push(Unused::Pvar(q.clone(), c.clone())),
                [i] => {
                    base[*i].0.insert(q.clone(), c.clone());
                }
                _ => {
                    return err(
                        ErrorKind::LinearityViolation,
                        format!("process variable `{q}` is used in two parallel components"),
                    )
                }
            }
        }
        if unused.is_empty() {
            return Ok(vec![base]);
        }
        let targets: Vec<usize> = (0..n).filter(|&i| absorbers[i]).collect();
        if targets.is_empty() {
            return err(
                ErrorKind::LinearityViolation,
                match &unused[0] {
                    Unused::Chan(x, _) => format!("linear channel `{x}` is never used"),
                    Unused::Pvar(q, _) => format!("process variable `{q}` is never used"),
                },
            );
        }
        let mut out = Vec::new();
        let mut choice = vec![0usize; unused.len()];
        loop {
            let mut cand = base.clone();
            for (u, &c) in unused.iter().zip(&choice) {
                let i = targets[c];
                match u {
                    Unused::Chan(x, t) => {
                        cand[i].1.insert(x.clone(), t.clone());
                    }
                    Unused::Pvar(q, c) => {
                        cand[i].0.insert(q.clone(), c.clone());
                    }
                }
            }
            out.push(cand);
            if out.len() >= MAX_ROUTINGS {
                break;
            }
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return Ok(out);
                }
                choice[k] += 1;
                if choice[k] < targets.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
        Ok(out)
    }

    /// Tries each routing in turn; reports the first failure if none succeeds.
    fn first_ok(
        &mut self,
        routings: Vec<Vec<(ProcEnv, ChannelCtx)>>,
        mut f: impl FnMut(&mut Checker, &[(ProcEnv, ChannelCtx)]) -> R<Vec<Derivation>>,
    ) -> R<Vec<Derivation>> {
        let mut first_err = None;
        for r in routings {
            match f(self, &r) {
                Ok(ds) => return Ok(ds),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        Err(first_err.expect("at least one routing"))
    }

    fn subject(&self, gamma: &ChannelCtx, x: &Name) -> R<(Type, ChannelCtx)> {
        let mut rest = gamma.clone();
        match rest.remove(x) {
            Some(t) => Ok((t, rest)),
            None => err(ErrorKind::UnknownName, format!("channel `{x}` is not in the context")),
        }
    }

    fn no_leftover(theta: &ProcEnv, rest: &ChannelCtx) -> R<()> {
        if let Some(q) = theta.keys().next() {
            return err(ErrorKind::LinearityViolation, format!("process variable `{q}` is never used"));
        }
        if let Some(x) = rest.keys().next() {
            return err(ErrorKind::LinearityViolation, format!("linear channel `{x}` is never used"));
        }
        Ok(())
    }

    fn mismatch<T>(x: &str, t: &Type, expected: &str) -> R<T> {
        err(ErrorKind::TypeMismatch, format!("channel `{x}` has type `{t}` but is used at {expected}"))
    }

    fn rule(&mut self, theta: &ProcEnv, p: &Process, gamma: &ChannelCtx) -> R<Derivation> {
        use Process::*;
        match p {
            Link(x, y, a) => {
                self.cp_type(a)?;
                if self.opts.atomic_axioms && !a.is_atomic() {
                    return err(ErrorKind::TypeMismatch, format!("link at non-atomic type `{a}` with atomic axioms"));
                }
                if x == y {
                    return err(ErrorKind::LinearityViolation, format!("link between `{x}` and itself"));
                }
                let (tx, rest) = self.subject(gamma, x)?;
                let (ty, rest) = self.subject(&rest, y)?;
                if !type_alpha_eq(&tx, &dual(a)) {
                    return Self::mismatch(x, &tx, &format!("`{}`", dual(a)));
                }
                if !type_alpha_eq(&ty, a) {
                    return Self::mismatch(y, &ty, &format!("`{a}`"));
                }
                Self::no_leftover(theta, &rest)?;
                Ok(node(Rule::Axiom, theta, p, gamma, vec![]))
            }
            Cut(x, a, y, l, r) => {
                self.cp_type(a)?;
                let (x2, l2) = self.apart(x, gamma.contains_key(x), l);
                let (y2, r2) = self.apart(y, gamma.contains_key(y), r);
                let routings = self.routings(
                    theta,
                    gamma,
                    &[minus(l2.free_channels(), &x2), minus(r2.free_channels(), &y2)],
                    &[l2.free_proc_vars(), r2.free_proc_vars()],
                    &[has_top(&l2), has_top(&r2)],
                )?;
                let prems = self.first_ok(routings, |c, rt| {
                    let d1 = c.check(&rt[0].0, &l2, &with(&rt[0].1, &x2, a.clone()))?;
                    let d2 = c.check(&rt[1].0, &r2, &with(&rt[1].1, &y2, dual(a)))?;
                    Ok(vec![d1, d2])
                })?;
                Ok(node(Rule::Cut { x: x2, y: y2 }, theta, p, gamma, prems))
            }
            Send(x, y, l, r) => {
                let (t, rest) = self.subject(gamma, x)?;
                let Type::Tensor(a, b) = &t else { return Self::mismatch(x, &t, "an output") };
                if x != y && l.count_free(x) > 0 {
                    return err(
                        ErrorKind::LinearityViolation,
                        format!("channel `{x}` is used both by its output and by the sent session"),
                    );
                }
                let (y2, l2) = self.apart(y, gamma.contains_key(y), l);
                let routings = self.routings(
                    theta,
                    &rest,
                    &[minus(l2.free_channels(), &y2), minus(r.free_channels(), x)],
                    &[l2.free_proc_vars(), r.free_proc_vars()],
                    &[has_top(&l2), has_top(r)],
                )?;
                let prems = self.first_ok(routings, |c, rt| {
                    let d1 = c.check(&rt[0].0, &l2, &with(&rt[0].1, &y2, (**a).clone()))?;
                    let d2 = c.check(&rt[1].0, r, &with(&rt[1].1, x, (**b).clone()))?;
                    Ok(vec![d1, d2])
                })?;
                Ok(node(Rule::Tensor { y: y2 }, theta, p, gamma, prems))
            }
            Recv(x, y, body) => {
                let (t, rest) = self.subject(gamma, x)?;
                let Type::Par(a, b) = &t else { return Self::mismatch(x, &t, "an input") };
                let (y2, body2) = self.apart(y, gamma.contains_key(y), body);
                let g = with(&with(&rest, &y2, (**a).clone()), x, (**b).clone());
                let d = self.check(theta, &body2, &g)?;
                Ok(node(Rule::Par { y: y2 }, theta, p, gamma, vec![d]))
            }
            SelL(x, body) | SelR(x, body) => {
                let (t, rest) = self.subject(gamma, x)?;
                let Type::Plus(a, b) = &t else { return Self::mismatch(x, &t, "a selection") };
                let (rule, c) = if matches!(p, SelL(..)) { (Rule::Plus1, a) } else { (Rule::Plus2, b) };
                let d = self.check(theta, body, &with(&rest, x, (**c).clone()))?;
                Ok(node(rule, theta, p, gamma, vec![d]))
            }
            Offer(x, l, r) => {
                let (t, rest) = self.subject(gamma, x)?;
                let Type::With(a, b) = &t else { return Self::mismatch(x, &t, "a branching") };
                let d1 = self.check(theta, l, &with(&rest, x, (**a).clone()))?;
                let d2 = self.check(theta, r, &with(&rest, x, (**b).clone()))?;
                Ok(node(Rule::With, theta, p, gamma, vec![d1, d2]))
            }
            EmptyOffer(x) => {
                let (t, _) = self.subject(gamma, x)?;
                if t != Type::Top {
                    return Self::mismatch(x, &t, "`top`");
                }
                Ok(node(Rule::Top, theta, p, gamma, vec![]))
            }
            Client(x, y, body) => {
                let (t, rest) = self.subject(gamma, x)?;
                let Type::WhyNot(a) = &t else { return Self::mismatch(x, &t, "a client request") };
                let (y2, body2) = self.apart(y, rest.contains_key(y), body);
                let d = self.check(theta, &body2, &with(&rest, &y2, (**a).clone()))?;
                Ok(node(Rule::WhyNot { y: y2 }, theta, p, gamma, vec![d]))
            }
            Server(x, y, body) => {
                let (t, rest) = self.subject(gamma, x)?;
                let Type::OfCourse(a) = &t else { return Self::mismatch(x, &t, "a server") };
                if let Some(q) = theta.keys().next() {
                    return err(ErrorKind::ContextNotEmpty, format!("server `{x}` cannot use process variable `{q}`"));
                }
                if let Some((z, tz)) = rest.iter().find(|(_, t)| !t.is_why_not()) {
                    return err(
                        ErrorKind::NonExponentialServerContext,
                        format!("server `{x}` uses channel `{z}` of non-exponential type `{tz}`"),
                    );
                }
                let (y2, body2) = self.apart(y, rest.contains_key(y), body);
                let d = self.check(theta, &body2, &with(&rest, &y2, (**a).clone()))?;
                Ok(node(Rule::OfCourse { y: y2 }, theta, p, gamma, vec![d]))
            }
            SendType(x, a, body) => {
                self.cp_type(a)?;
                let (t, rest) = self.subject(gamma, x)?;
                let Type::Exists(v, b) = &t else { return Self::mismatch(x, &t, "a type output") };
                let b2 = subst_types(b, &BTreeMap::from([(v.clone(), a.clone())]), &mut self.fresh);
                let d = self.check(theta, body, &with(&rest, x, b2))?;
                Ok(node(Rule::Exists, theta, p, gamma, vec![d]))
            }
            RecvType(x, v, body) => {
                let (t, rest) = self.subject(gamma, x)?;
                let Type::Forall(w, b) = &t else { return Self::mismatch(x, &t, "a type input") };
                let escapes = rest.values().any(|t| t.ftv().contains(v))
                    || theta.values().any(|c| c.iter().any(|(_, t)| t.ftv().contains(v)));
                if escapes {
                    return err(ErrorKind::TypeVarEscape, format!("type variable `{v}` is free in the context"));
                }
                let b2 = subst_types(b, &BTreeMap::from([(w.clone(), Type::Var(v.clone()))]), &mut self.fresh);
                let d = self.check(theta, body, &with(&rest, x, b2))?;
                Ok(node(Rule::Forall, theta, p, gamma, vec![d]))
            }
            SendProc(x, rho, body) => {
                self.cp_term("process output")?;
                let (t, rest) = self.subject(gamma, x)?;
                let Type::Provide(delta) = &t else { return Self::mismatch(x, &t, "a process output") };
                if let Some(z) = rest.keys().next() {
                    return err(
                        ErrorKind::ContextNotEmpty,
                        format!("process output on `{x}` leaves channel `{z}` in the context"),
                    );
                }
                let inst =
                    instantiate(delta, rho).map_err(|e| TypeError::new(ErrorKind::LabelMismatch, e.to_string()))?;
                let d = self.check(theta, body, &inst)?;
                Ok(node(Rule::Provide, theta, p, gamma, vec![d]))
            }
            RecvProc(x, q, body) => {
                self.cp_term("process input")?;
                let (t, rest) = self.subject(gamma, x)?;
                let Type::Assume(delta) = &t else { return Self::mismatch(x, &t, "a process input") };
                let (q2, body2) = self.apart_pvar(q, theta.contains_key(q), body);
                let mut th = theta.clone();
                th.insert(q2.clone(), delta.clone());
                let d = self.check(&th, &body2, &rest)?;
                Ok(node(Rule::Assume { p: q2 }, theta, p, gamma, vec![d]))
            }
            Invoke(q, rho) => {
                self.cp_term("process invocation")?;
                let Some(delta) = theta.get(q) else {
                    return err(ErrorKind::UnknownName, format!("process variable `{q}` is not in the environment"));
                };
                if let Some(other) = theta.keys().find(|k| *k != q) {
                    return err(ErrorKind::LinearityViolation, format!("process variable `{other}` is never used"));
                }
                let inst =
                    instantiate(delta, rho).map_err(|e| TypeError::new(ErrorKind::LabelMismatch, e.to_string()))?;
                let mut rest = gamma.clone();
                for (z, t) in &inst {
                    match rest.remove(z) {
                        None => return err(ErrorKind::UnknownName, format!("channel `{z}` is not in the context")),
                        Some(tz) if !type_alpha_eq(&tz, t) => return Self::mismatch(z, &tz, &format!("`{t}`")),
                        Some(_) => {}
                    }
                }
                Self::no_leftover(&ProcEnv::new(), &rest)?;
                Ok(node(Rule::Id, theta, p, gamma, vec![]))
            }
            Close(x) => {
                let (t, rest) = self.subject(gamma, x)?;
                if t != Type::One {
                    return Self::mismatch(x, &t, "`1`");
                }
                Self::no_leftover(theta, &rest)?;
                Ok(node(Rule::One, theta, p, gamma, vec![]))
            }
            Wait(x, body) => {
                let (t, rest) = self.subject(gamma, x)?;
                if t != Type::Bot {
                    return Self::mismatch(x, &t, "`bot`");
                }
                let d = self.check(theta, body, &rest)?;
                Ok(node(Rule::Bot, theta, p, gamma, vec![d]))
            }
            ExplSubst(scope, q, rho, delta, body) => {
                self.cp_term("explicit substitution")?;
                let bound: BTreeSet<Name> = rho.names().into_iter().cloned().collect();
                if let Some(z) = body.free_channels().into_iter().find(|z| !bound.contains(z)) {
                    return err(
                        ErrorKind::UnknownName,
                        format!("abstraction for `{q}` refers to channel `{z}` outside its parameters"),
                    );
                }
                let inst =
                    instantiate(delta, rho).map_err(|e| TypeError::new(ErrorKind::LabelMismatch, e.to_string()))?;
                let (q2, scope2) = self.apart_pvar(q, theta.contains_key(q), scope);
                let routings = self.routings(
                    theta,
                    &ChannelCtx::new(),
                    &[BTreeSet::new(), BTreeSet::new()],
                    &[body.free_proc_vars(), minus(scope2.free_proc_vars(), &q2)],
                    &[has_top(body), has_top(&scope2)],
                )?;
                let prems = self.first_ok(routings, |c, rt| {
                    let d1 = c.check(&rt[0].0, body, &inst)?;
                    let mut th = rt[1].0.clone();
                    th.insert(q2.clone(), delta.clone());
                    let d2 = c.check(&th, &scope2, gamma)?;
                    Ok(vec![d1, d2])
                })?;
                Ok(node(Rule::Chop { p: q2 }, theta, p, gamma, prems))
            }
            MCut(m) => self.ccut(theta, p, m, gamma),
            FreeSend(..) | SendProcCont(..) | RecvProcCont(..) | DefProc(..) | CallProc(..) | HOParam(..)
            | HOApply(..) => err(ErrorKind::TypeMismatch, "surface construct found; desugar before checking"),
        }
    }

    fn ccut(&mut self, theta: &ProcEnv, p: &Process, m: &MCut, gamma: &ChannelCtx) -> R<Derivation> {
        self.cp_term("coherence cut")?;
        let ends = check_coherence(&m.global)?;
        let chans: BTreeSet<&Name> = m.branches.iter().map(|b| &b.chan).collect();
        if chans.len() != m.branches.len() || chans.len() != ends.len() || chans.iter().any(|c| !ends.contains_key(*c))
        {
            return err(
                ErrorKind::IncoherentGlobalType,
                format!(
                    "branches ({}) do not match the endpoints of the global type ({})",
                    m.branches.iter().map(|b| b.chan.as_str()).collect::<Vec<_>>().join(", "),
                    ends.keys().map(String::as_str).collect::<Vec<_>>().join(", ")
                ),
            );
        }
        for b in &m.branches {
            if !type_alpha_eq(&b.ty, &ends[&b.chan]) {
                return err(
                    ErrorKind::IncoherentGlobalType,
                    format!(
                        "endpoint `{}` is annotated `{}` but the global type gives `{}`",
                        b.chan, b.ty, ends[&b.chan]
                    ),
                );
            }
        }
        let mut renamed = Vec::new();
        for b in &m.branches {
            let (c, body) = self.apart(&b.chan, gamma.contains_key(&b.chan), &b.body);
            renamed.push((c, body, b.ty.clone()));
        }
        let routings = self.routings(
            theta,
            gamma,
            &renamed.iter().map(|(c, b, _)| minus(b.free_channels(), c)).collect::<Vec<_>>(),
            &renamed.iter().map(|(_, b, _)| b.free_proc_vars()).collect::<Vec<_>>(),
            &renamed.iter().map(|(_, b, _)| has_top(b)).collect::<Vec<_>>(),
        )?;
        let prems = self.first_ok(routings, |c, rt| {
            renamed
                .iter()
                .zip(rt)
                .map(|((ch, body, ty), (th, g))| c.check(th, body, &with(g, ch, ty.clone())))
                .collect()
        })?;
        let chans = renamed.into_iter().map(|(c, _, _)| c).collect();
        Ok(node(Rule::CCut { chans }, theta, p, gamma, prems))
    }
}

/// Renames the endpoints of a coherence cut, for callers rebuilding one from premises.
pub(super) fn rebuild_mcut(m: &MCut, chans: &[Name], bodies: Vec<Process>) -> MCut {
    let ends: BTreeMap<Name, Name> = m.branches.iter().zip(chans).map(|(b, c)| (b.chan.clone(), c.clone())).collect();
    MCut {
        global: rename_global(&m.global, &ends),
        branches: m
            .branches
            .iter()
            .zip(chans)
            .zip(bodies)
            .map(|((b, c), body)| crate::ast::Branch { chan: c.clone(), ty: b.ty.clone(), body })
            .collect(),
    }
}
