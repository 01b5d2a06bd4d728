//! Multiparty cuts: the principal reduction selected by the head of the
//! global type, and commuting conversions inside a single branch.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{GlobalType, MCut, Name, Process};
use crate::check::check_coherence;
use crate::eval::rules::{apart_chan, commute, principal, Avoid, Key, Local, COMMUTE};
use crate::eval::StepTag;
use crate::fresh::Fresh;
use crate::subst::{rename_global, subst_type_in_global, subst_type_in_process};

/// One step at a multiparty cut: the principal reduction when every head
/// endpoint is exposed, otherwise a branch-local commuting conversion.
pub fn step_multiparty(m: &MCut) -> Option<(Process, StepTag)> {
    let mut names = BTreeSet::new();
    m.global.all_names(&mut names);
    for b in &m.branches {
        names.insert(b.chan.clone());
        names.extend(b.body.all_names());
    }
    let mut fresh = Fresh::avoiding(0, names);
    let best = mcut_steps(m, &mut fresh).into_iter().enumerate().min_by_key(|(i, l)| (l.prio, *i))?.1;
    Some((best.result, StepTag { family: best.family, rule: best.rule, path: Vec::new() }))
}

pub(crate) fn mcut_steps(m: &MCut, fresh: &mut Fresh) -> Vec<Local> {
    let mut out = Vec::new();
    if let Some(l) = mcut_principal(m, fresh) {
        out.push(l);
    }
    let head = m.global.head_endpoints();
    let mut order: Vec<usize> = (0..m.branches.len()).filter(|i| head.contains(&m.branches[*i].chan)).collect();
    order.extend((0..m.branches.len()).filter(|i| !head.contains(&m.branches[*i].chan)));
    for i in order {
        let b = &m.branches[i];
        let mut avoid = Avoid::default();
        m.global.all_names(&mut avoid.tvars);
        for (j, o) in m.branches.iter().enumerate() {
            avoid.chans.insert(o.chan.clone());
            avoid.tvars.extend(o.ty.ftv());
            if j != i {
                avoid.chans.extend(o.body.free_channels());
                avoid.pvars.extend(o.body.free_proc_vars());
                avoid.tvars.extend(o.body.free_type_vars());
            }
        }
        let wrap = |p: Process| {
            let mut m2 = m.clone();
            m2.branches[i].body = p;
            Process::MCut(Box::new(m2))
        };
        if let Some(l) = commute(&b.body, Key::Chan(&b.chan), &avoid, "ccut", COMMUTE, COMMUTE, fresh, &wrap) {
            out.push(l);
        }
    }
    out
}

/// A multiparty cut over `g`, with branch types read off its coherence.
fn rebuild(g: GlobalType, branches: Vec<(Name, Process)>) -> Option<Process> {
    let ends = check_coherence(&g).ok()?;
    let branches = branches
        .into_iter()
        .map(|(chan, body)| {
            let ty = ends.get(&chan)?.clone();
            Some(crate::ast::Branch { chan, ty, body })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Process::MCut(Box::new(MCut { global: g, branches })))
}

fn body<'a>(m: &'a MCut, c: &str) -> Option<&'a Process> {
    m.branches.iter().find(|b| b.chan == c).map(|b| &b.body)
}

/// Branches not among `used`, unchanged.
fn others(m: &MCut, used: &[&Name]) -> Vec<(Name, Process)> {
    m.branches.iter().filter(|b| !used.contains(&&b.chan)).map(|b| (b.chan.clone(), b.body.clone())).collect()
}

fn mcut_principal(m: &MCut, fresh: &mut Fresh) -> Option<Local> {
    use GlobalType as G;
    use Process::*;
    let all_names = |m: &crate::ast::MCut| {
        let mut s = BTreeSet::new();
        for b in &m.branches {
            s.extend(b.body.free_channels());
            s.insert(b.chan.clone());
        }
        s
    };
    match &m.global {
        G::OutIn(xs, y, g, h) => {
            let mut avoid = all_names(m);
            let mut outer = Vec::new();
            let mut inner = Vec::new();
            let mut ends = BTreeMap::new();
            for x in xs {
                let Some(Send(s, u, p1, p2)) = body(m, x) else { return None };
                if s != x {
                    return None;
                }
                let (u2, p1b) = apart_chan(u, p1, &avoid, fresh);
                avoid.insert(u2.clone());
                ends.insert(x.clone(), u2.clone());
                outer.push((u2, p1b));
                inner.push((x.clone(), (**p2).clone()));
            }
            let Some(Recv(s, v, q)) = body(m, y) else { return None };
            if s != y {
                return None;
            }
            let (v2, qb) = apart_chan(v, q, &avoid, fresh);
            ends.insert(y.clone(), v2.clone());
            inner.push((y.clone(), qb));
            let used: Vec<&Name> = xs.iter().chain([y]).collect();
            inner.extend(others(m, &used));
            let rest = rebuild((**h).clone(), inner)?;
            outer.push((v2, rest));
            Some(principal("ccut-⊗⅋", rebuild(rename_global(g, &ends), outer)?))
        }
        G::CloseWait(xs, y) => {
            if m.branches.len() != xs.len() + 1 {
                return None;
            }
            for x in xs {
                if !matches!(body(m, x), Some(Close(s)) if s == x) {
                    return None;
                }
            }
            match body(m, y) {
                Some(Wait(s, q)) if s == y => Some(principal("ccut-1⊥", (**q).clone())),
                _ => None,
            }
        }
        G::SelOffer(x, ys, g, h) => {
            let (left, p) = match body(m, x)? {
                SelL(s, p) if s == x => (true, p),
                SelR(s, p) if s == x => (false, p),
                _ => return None,
            };
            let mut bs = vec![(x.clone(), (**p).clone())];
            for y in ys {
                let Some(Offer(s, q1, q2)) = body(m, y) else { return None };
                if s != y {
                    return None;
                }
                bs.push((y.clone(), if left { (**q1).clone() } else { (**q2).clone() }));
            }
            let used: Vec<&Name> = [x].into_iter().chain(ys).collect();
            bs.extend(others(m, &used));
            let (g2, rule) = if left { (g, "ccut-⊕&-left") } else { (h, "ccut-⊕&-right") };
            Some(principal(rule, rebuild((**g2).clone(), bs)?))
        }
        G::EmptyChoice(..) => None,
        G::Bang(x, ys, g) => {
            let mut servers = Vec::new();
            for y in ys {
                let Some(Server(s, v, q)) = body(m, y) else { return None };
                if s != y {
                    return None;
                }
                servers.push((y, v, q));
            }
            let p = body(m, x)?;
            if !p.free_channels().contains(x) {
                return Some(principal("ccut-?!weaken", p.clone()));
            }
            let Client(s, u, p1) = p else {
                // TODO: multiparty contraction, when the client endpoint is used more than once.
                return None;
            };
            if s != x || p1.free_channels().contains(x) {
                return None;
            }
            let mut avoid = all_names(m);
            let (u2, p1b) = apart_chan(u, p1, &avoid, fresh);
            avoid.insert(u2.clone());
            let mut ends = BTreeMap::from([(x.clone(), u2.clone())]);
            let mut bs = vec![(u2, p1b)];
            for (y, v, q) in servers {
                let (v2, qb) = apart_chan(v, q, &avoid, fresh);
                avoid.insert(v2.clone());
                ends.insert(y.clone(), v2.clone());
                bs.push((v2, qb));
            }
            Some(principal("ccut-?!", rebuild(rename_global(g, &ends), bs)?))
        }
        G::TypeComm(tv, x, ys, g) => {
            let Some(SendType(s, b, p)) = body(m, x) else { return None };
            if s != x {
                return None;
            }
            let mut bs = vec![(x.clone(), (**p).clone())];
            for y in ys {
                let Some(RecvType(s, v, q)) = body(m, y) else { return None };
                if s != y {
                    return None;
                }
                bs.push((y.clone(), subst_type_in_process(q, v, b, fresh)));
            }
            let used: Vec<&Name> = [x].into_iter().chain(ys).collect();
            bs.extend(others(m, &used));
            Some(principal("ccut-∃∀", rebuild(subst_type_in_global(g, tv, b, fresh), bs)?))
        }
        G::GAxiom(x, a, y) => {
            let (p, q) = (body(m, x)?, body(m, y)?);
            Some(principal(
                "ccut-axiom",
                Cut(x.clone(), a.clone(), y.clone(), Box::new(p.clone()), Box::new(q.clone())),
            ))
        }
        G::ProvideAssume(x, y, d) => match (body(m, x)?, body(m, y)?) {
            (SendProc(s, rec, p), RecvProc(t, v, q)) if s == x && t == y => {
                Some(principal("ccut-⌈⌉⌊⌋", ExplSubst(q.clone(), v.clone(), rec.clone(), d.clone(), p.clone())))
            }
            _ => None,
        },
    }
}
