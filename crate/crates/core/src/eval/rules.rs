//! Local rewrite rules at a cut, a chop or a multiparty cut.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{compose_records, Name, ParamCtx, Process, Record, Type};
use crate::fresh::Fresh;
use crate::subst::{rename_channel_with, rename_channels, subst_type_in_process, Subst};
use crate::types::{dual, eta_expand_link, subst_types};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Principal,
    Eta,
    Commute,
    StructEquiv,
    Congruence,
}

/// Priority classes of the evaluation strategy; lower runs first.
pub(crate) const PRINCIPAL: u8 = 1;
pub(crate) const CHOP: u8 = 2;
pub(crate) const COMMUTE: u8 = 3;
pub(crate) const ETA: u8 = 4;
pub(crate) const CHOP_DUP: u8 = 5;

#[derive(Debug, Clone)]
pub(crate) struct Local {
    pub prio: u8,
    pub family: Family,
    pub rule: String,
    pub result: Process,
}

pub(crate) fn principal(rule: &str, result: Process) -> Local {
    Local { prio: PRINCIPAL, family: Family::Principal, rule: rule.into(), result }
}

pub(crate) fn local(p: &Process, fresh: &mut Fresh) -> Vec<Local> {
    match p {
        Process::Cut(x, a, y, l, r) => cut_steps(x, a, y, l, r, fresh),
        Process::ExplSubst(scope, v, rec, ctx, body) => chop_steps(scope, v, rec, ctx, body, fresh),
        Process::MCut(m) => crate::multiparty::mcut_steps(m, fresh),
        _ => Vec::new(),
    }
}

pub(crate) fn connective(t: &Type) -> &'static str {
    match t {
        Type::Var(_) | Type::DualVar(_) => "atom",
        Type::Tensor(..) => "⊗",
        Type::Par(..) => "⅋",
        Type::Plus(..) => "⊕",
        Type::With(..) => "&",
        Type::Zero => "0",
        Type::Top => "⊤",
        Type::One => "1",
        Type::Bot => "⊥",
        Type::WhyNot(_) => "?",
        Type::OfCourse(_) => "!",
        Type::Exists(..) => "∃",
        Type::Forall(..) => "∀",
        Type::Provide(_) => "⌈⌉",
        Type::Assume(_) => "⌊⌋",
    }
}

pub(crate) fn apart_chan(b: &Name, body: &Process, avoid: &BTreeSet<Name>, fresh: &mut Fresh) -> (Name, Process) {
    if !avoid.contains(b) {
        return (b.clone(), body.clone());
    }
    let n = fresh.name(b);
    let body = rename_channel_with(body, &n, b, fresh);
    (n, body)
}

fn apart_pvar(b: &Name, body: &Process, avoid: &BTreeSet<Name>, fresh: &mut Fresh) -> (Name, Process) {
    if !avoid.contains(b) {
        return (b.clone(), body.clone());
    }
    let n = fresh.name(b);
    let s = Subst { pvars: BTreeMap::from([(b.clone(), n.clone())]), ..Subst::default() };
    let body = s.apply(body, fresh);
    (n, body)
}

fn apart_tvar(b: &Name, body: &Process, avoid: &BTreeSet<Name>, fresh: &mut Fresh) -> (Name, Process) {
    if !avoid.contains(b) {
        return (b.clone(), body.clone());
    }
    let n = fresh.name(b);
    let body = subst_type_in_process(body, b, &Type::Var(n.clone()), fresh);
    (n, body)
}

/// What a commuting conversion pushes inward: a cut channel or a chop variable.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Key<'a> {
    Chan(&'a str),
    PVar(&'a str),
}

impl Key<'_> {
    fn occurs(&self, p: &Process) -> bool {
        match self {
            Key::Chan(x) => p.free_channels().contains(*x),
            Key::PVar(v) => p.free_proc_vars().contains(*v),
        }
    }

    fn is_subject(&self, w: &str) -> bool {
        matches!(self, Key::Chan(x) if *x == w)
    }
}

/// Names a commuting conversion must keep binders apart from.
#[derive(Debug, Clone, Default)]
pub(crate) struct Avoid {
    pub chans: BTreeSet<Name>,
    pub pvars: BTreeSet<Name>,
    pub tvars: BTreeSet<Name>,
}

/// Pushes the enclosing construct `wrap` under the head prefix of `p`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn commute(
    p: &Process,
    key: Key<'_>,
    avoid: &Avoid,
    kind: &str,
    prio: u8,
    dup_prio: u8,
    fresh: &mut Fresh,
    wrap: &dyn Fn(Process) -> Process,
) -> Option<Local> {
    use Process::*;
    let bx = Box::new;
    let mut prio = prio;
    let (sym, result) = match p {
        Send(w, u, p1, p2) if !key.is_subject(w) => {
            let (u2, p1b) = apart_chan(u, p1, &avoid.chans, fresh);
            let (in1, in2) = (key.occurs(&p1b), key.occurs(p2));
            if matches!(key, Key::Chan(_)) && in1 && in2 {
                return None;
            }
            let r = if in1 {
                Send(w.clone(), u2, bx(wrap(p1b)), p2.clone())
            } else {
                Send(w.clone(), u.clone(), p1.clone(), bx(wrap((**p2).clone())))
            };
            ("⊗", r)
        }
        Recv(w, u, p1) if !key.is_subject(w) => {
            let (u2, p1b) = apart_chan(u, p1, &avoid.chans, fresh);
            ("⅋", Recv(w.clone(), u2, bx(wrap(p1b))))
        }
        SelL(w, p1) if !key.is_subject(w) => ("⊕", SelL(w.clone(), bx(wrap((**p1).clone())))),
        SelR(w, p1) if !key.is_subject(w) => ("⊕", SelR(w.clone(), bx(wrap((**p1).clone())))),
        Offer(w, p1, p2) if !key.is_subject(w) => {
            prio = dup_prio;
            ("&", Offer(w.clone(), bx(wrap((**p1).clone())), bx(wrap((**p2).clone()))))
        }
        EmptyOffer(w) if !key.is_subject(w) => ("⊤", EmptyOffer(w.clone())),
        Client(w, u, p1) if !key.is_subject(w) => {
            let (u2, p1b) = apart_chan(u, p1, &avoid.chans, fresh);
            ("?", Client(w.clone(), u2, bx(wrap(p1b))))
        }
        Server(w, u, p1) if !key.is_subject(w) => {
            let (u2, p1b) = apart_chan(u, p1, &avoid.chans, fresh);
            ("!", Server(w.clone(), u2, bx(wrap(p1b))))
        }
        SendType(w, t, p1) if !key.is_subject(w) => ("∃", SendType(w.clone(), t.clone(), bx(wrap((**p1).clone())))),
        RecvType(w, v, p1) if !key.is_subject(w) => {
            let (v2, p1b) = apart_tvar(v, p1, &avoid.tvars, fresh);
            ("∀", RecvType(w.clone(), v2, bx(wrap(p1b))))
        }
        SendProc(w, r, p1) if matches!(key, Key::PVar(_)) => {
            ("⌈⌉", SendProc(w.clone(), r.clone(), bx(wrap((**p1).clone()))))
        }
        RecvProc(w, q, p1) if !key.is_subject(w) => {
            let (q2, p1b) = apart_pvar(q, p1, &avoid.pvars, fresh);
            ("⌊⌋", RecvProc(w.clone(), q2, bx(wrap(p1b))))
        }
        Wait(w, p1) if !key.is_subject(w) => ("⊥", Wait(w.clone(), bx(wrap((**p1).clone())))),
        _ => return None,
    };
    Some(Local { prio, family: Family::Commute, rule: format!("{kind}-commute-{sym}"), result })
}

fn cut_steps(x: &Name, a: &Type, y: &Name, l: &Process, r: &Process, fresh: &mut Fresh) -> Vec<Local> {
    let mut out = Vec::new();
    let ad = dual(a);
    if let Some(s) = cut_principal(x, a, y, l, r, fresh).or_else(|| cut_principal(y, &ad, x, r, l, fresh)) {
        out.push(s);
    }
    let cut = |p: Process, q: Process| Process::Cut(x.clone(), a.clone(), y.clone(), Box::new(p), Box::new(q));
    for (side, chan) in [(0, x), (1, y)] {
        let p = if side == 0 { l } else { r };
        if let Process::Link(u, w, t) = p {
            if (u == chan || w == chan) && !t.is_atomic() {
                if let Ok(e) = eta_expand_link(u, w, t, fresh) {
                    let result = if side == 0 { cut(e, r.clone()) } else { cut(l.clone(), e) };
                    out.push(Local { prio: ETA, family: Family::Eta, rule: format!("η-{}", connective(t)), result });
                }
            }
        }
    }
    for side in 0..2 {
        let (p, other, chan) = if side == 0 { (l, r, x) } else { (r, l, y) };
        let mut avoid =
            Avoid { chans: other.free_channels(), pvars: other.free_proc_vars(), tvars: other.free_type_vars() };
        avoid.chans.extend([x.clone(), y.clone()]);
        avoid.tvars.extend(a.ftv());
        let wrap = |b: Process| if side == 0 { cut(b, r.clone()) } else { cut(l.clone(), b) };
        if let Some(c) = commute(p, Key::Chan(chan), &avoid, "cut", COMMUTE, COMMUTE, fresh, &wrap) {
            out.push(c);
        }
    }
    out
}

fn cut_principal(x: &Name, a: &Type, y: &Name, p: &Process, q: &Process, fresh: &mut Fresh) -> Option<Local> {
    use Process::*;
    let bx = Box::new;
    match (p, q) {
        (Send(s, u, p1, p2), Recv(t, v, q1)) if s == x && t == y => {
            let Type::Tensor(a1, b1) = a else { return None };
            // v now scopes over the continuation cut as well.
            let mut avoid = p2.free_channels();
            avoid.extend([x.clone(), u.clone()]);
            let (v2, q1b) = apart_chan(v, q1, &avoid, fresh);
            let inner = Cut(x.clone(), (**b1).clone(), y.clone(), p2.clone(), bx(q1b));
            Some(principal("⊗⅋", Cut(u.clone(), (**a1).clone(), v2, p1.clone(), bx(inner))))
        }
        (SelL(s, p1), Offer(t, q1, _)) if s == x && t == y => {
            let Type::Plus(a1, _) = a else { return None };
            Some(principal("⊕&-left", Cut(x.clone(), (**a1).clone(), y.clone(), p1.clone(), q1.clone())))
        }
        (SelR(s, p1), Offer(t, _, q2)) if s == x && t == y => {
            let Type::Plus(_, b1) = a else { return None };
            Some(principal("⊕&-right", Cut(x.clone(), (**b1).clone(), y.clone(), p1.clone(), q2.clone())))
        }
        (Close(s), Wait(t, q1)) if s == x && t == y => Some(principal("1⊥", (**q1).clone())),
        (SendType(s, b, p1), RecvType(t, v, q1)) if s == x && t == y => {
            let Type::Exists(w, a1) = a else { return None };
            let a2 = subst_types(a1, &BTreeMap::from([(w.clone(), b.clone())]), fresh);
            let q2 = subst_type_in_process(q1, v, b, fresh);
            Some(principal("∃∀", Cut(x.clone(), a2, y.clone(), p1.clone(), bx(q2))))
        }
        (SendProc(s, rec, p1), RecvProc(t, v, q1)) if s == x && t == y => {
            let Type::Provide(d) = a else { return None };
            Some(principal("⌈⌉⌊⌋", ExplSubst(q1.clone(), v.clone(), rec.clone(), d.clone(), p1.clone())))
        }
        (Link(u, w, t), _) if (u == x || w == x) && t.is_atomic() => {
            let other = if u == x { w } else { u };
            Some(principal("axiom", rename_channel_with(q, other, y, fresh)))
        }
        (_, Server(t, v, s1)) if t == y => {
            let Type::WhyNot(a1) = a else { return None };
            if !p.free_channels().contains(x) {
                return Some(principal("?!weaken", p.clone()));
            }
            if let Client(s, u, p1) = p {
                if s == x && !p1.free_channels().contains(x) {
                    return Some(principal("?!", Cut(u.clone(), (**a1).clone(), v.clone(), p1.clone(), s1.clone())));
                }
            }
            let (x1, x2) = (fresh.name(x), fresh.name(x));
            let (y1, y2) = (fresh.name(y), fresh.name(y));
            let p2 = contract_split(p, x, &x1, &x2, fresh)?;
            let server = |z: &Name| Server(z.clone(), v.clone(), s1.clone());
            let inner = Cut(x1, a.clone(), y1.clone(), bx(p2), bx(server(&y1)));
            Some(principal("?!contract", Cut(x2, a.clone(), y2.clone(), bx(inner), bx(server(&y2)))))
        }
        _ => None,
    }
}

/// Splits the uses of a `?`-channel `x` into a head use, renamed `x1`, and
/// the remaining uses, renamed `x2`.
pub(crate) fn contract_split(p: &Process, x: &Name, x1: &Name, x2: &Name, fresh: &mut Fresh) -> Option<Process> {
    use Process::*;
    if let Client(s, u, p1) = p {
        if s == x && u != x && p1.free_channels().contains(x) {
            return Some(Client(x1.clone(), u.clone(), Box::new(rename_channel_with(p1, x2, x, fresh))));
        }
        return None;
    }
    let binders: Vec<Option<&Name>> = match p {
        Send(_, u, _, _) => vec![Some(u), None],
        Cut(c, _, d, _, _) => vec![Some(c), Some(d)],
        MCut(m) => m.branches.iter().map(|b| Some(&b.chan)).collect(),
        _ => return None,
    };
    let holders: Vec<usize> = p
        .children()
        .iter()
        .enumerate()
        .filter(|(i, c)| binders[*i] != Some(x) && c.free_channels().contains(x))
        .map(|(i, _)| i)
        .collect();
    if holders.len() < 2 {
        return None;
    }
    let mut out = p.clone();
    for (i, c) in out.children_mut().into_iter().enumerate() {
        if let Some(pos) = holders.iter().position(|h| *h == i) {
            let to = if pos == 0 { x1 } else { x2 };
            *c = rename_channel_with(c, to, x, fresh);
        }
    }
    Some(out)
}

fn chop_steps(
    scope: &Process,
    v: &Name,
    rec: &Record,
    ctx: &ParamCtx,
    body: &Process,
    fresh: &mut Fresh,
) -> Vec<Local> {
    use Process::*;
    let bx = Box::new;
    let wrap = |s: Process| ExplSubst(bx(s), v.clone(), rec.clone(), ctx.clone(), bx(body.clone()));
    let chop = |rule: &str, result: Process| Local { prio: CHOP, family: Family::Commute, rule: rule.into(), result };
    let step = match scope {
        Invoke(q, r2) if q == v => {
            let Ok(map) = compose_records(r2, rec) else { return Vec::new() };
            principal("chop-invoke", rename_channels(body, &map, fresh))
        }
        Cut(c, t, d, l, r) => {
            let result = if l.free_proc_vars().contains(v) {
                Cut(c.clone(), t.clone(), d.clone(), bx(wrap((**l).clone())), r.clone())
            } else {
                Cut(c.clone(), t.clone(), d.clone(), l.clone(), bx(wrap((**r).clone())))
            };
            chop("chop-commute-cut", result)
        }
        ExplSubst(s2, q, r2, c2, b2) if b2.free_proc_vars().contains(v) => chop(
            "chop-commute-chop",
            ExplSubst(s2.clone(), q.clone(), r2.clone(), c2.clone(), bx(wrap((**b2).clone()))),
        ),
        MCut(m) => {
            let Some(i) = m.branches.iter().position(|b| b.body.free_proc_vars().contains(v)) else {
                return Vec::new();
            };
            let mut m2 = (**m).clone();
            m2.branches[i].body = wrap(m2.branches[i].body.clone());
            chop("chop-commute-ccut", MCut(Box::new(m2)))
        }
        _ => {
            let mut avoid = Avoid { pvars: body.free_proc_vars(), tvars: body.free_type_vars(), ..Avoid::default() };
            avoid.pvars.insert(v.clone());
            for (_, t) in ctx.iter() {
                avoid.tvars.extend(t.ftv());
            }
            match commute(scope, Key::PVar(v), &avoid, "chop", CHOP, CHOP_DUP, fresh, &wrap) {
                Some(l) => l,
                None => return Vec::new(),
            }
        }
    };
    vec![step]
}
