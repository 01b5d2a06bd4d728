//! Brute-force derivability with nondeterministic context splitting.
//!
//! Every linear name may go to any premise and every `?`-typed channel to any
//! subset of premises. Exponential in the size of the term; meant for
//! cross-checking the algorithmic checker on small terms.

use std::collections::BTreeMap;

use super::coherence::check_coherence;
use super::CheckOptions;
use crate::ast::{ChannelCtx, Name, ProcEnv, Process, Type};
use crate::fresh::Fresh;
use crate::subst::{fresh_for, rename_channel_with, Subst};
use crate::types::{dual, instantiate, subst_types, type_alpha_eq};

pub fn derivable(theta: &ProcEnv, p: &Process, gamma: &ChannelCtx, opts: CheckOptions) -> bool {
    if !p.is_core() {
        return false;
    }
    let mut fresh = fresh_for([p]);
    fresh.reserve(gamma.keys().cloned());
    fresh.reserve(theta.keys().cloned());
    Oracle { opts, fresh }.d(theta, p, gamma)
}

struct Oracle {
    opts: CheckOptions,
    fresh: Fresh,
}

fn with(c: &ChannelCtx, x: &Name, t: Type) -> ChannelCtx {
    let mut c = c.clone();
    c.insert(x.clone(), t);
    c
}

fn take(c: &ChannelCtx, x: &str) -> Option<(Type, ChannelCtx)> {
    let mut c = c.clone();
    let t = c.remove(x)?;
    Some((t, c))
}

fn all_why_not(c: &ChannelCtx) -> bool {
    c.values().all(Type::is_why_not)
}

/// Every way of distributing the contexts over `n` premises.
fn splits(theta: &ProcEnv, gamma: &ChannelCtx, n: usize) -> Vec<Vec<(ProcEnv, ChannelCtx)>> {
    let mut acc: Vec<Vec<(ProcEnv, ChannelCtx)>> = vec![vec![(ProcEnv::new(), ChannelCtx::new()); n]];
    for (x, t) in gamma {
        let mut next = Vec::new();
        for a in &acc {
            if t.is_why_not() {
                for mask in 0..(1usize << n) {
                    let mut b = a.clone();
                    for (i, part) in b.iter_mut().enumerate() {
                        if mask & (1 << i) != 0 {
                            part.1.insert(x.clone(), t.clone());
                        }
                    }
                    next.push(b);
                }
            } else {
                for i in 0..n {
                    let mut b = a.clone();
                    b[i].1.insert(x.clone(), t.clone());
                    next.push(b);
                }
            }
        }
        acc = next;
    }
    for (q, c) in theta {
        let mut next = Vec::new();
        for a in &acc {
            for i in 0..n {
                let mut b = a.clone();
                b[i].0.insert(q.clone(), c.clone());
                next.push(b);
            }
        }
        acc = next;
    }
    acc
}

impl Oracle {
    fn apart(&mut self, b: &Name, clash: bool, body: &Process) -> (Name, Process) {
        if !clash {
            return (b.clone(), body.clone());
        }
        let n = self.fresh.name(b);
        let body = rename_channel_with(body, &n, b, &mut self.fresh);
        (n, body)
    }

    fn d(&mut self, theta: &ProcEnv, p: &Process, gamma: &ChannelCtx) -> bool {
        use Process::*;
        match p {
            Link(x, y, a) => {
                if !theta.is_empty() || x == y || (self.opts.atomic_axioms && !a.is_atomic()) {
                    return false;
                }
                let Some((tx, rest)) = take(gamma, x) else { return false };
                let Some((ty, rest)) = take(&rest, y) else { return false };
                type_alpha_eq(&tx, &dual(a)) && type_alpha_eq(&ty, a) && all_why_not(&rest)
            }
            Close(x) => {
                theta.is_empty() && take(gamma, x).is_some_and(|(t, rest)| t == Type::One && all_why_not(&rest))
            }
            EmptyOffer(x) => gamma.get(x) == Some(&Type::Top),
            Invoke(q, rho) => {
                if theta.len() != 1 || self.opts.cp {
                    return false;
                }
                let Some(delta) = theta.get(q) else { return false };
                let Ok(inst) = instantiate(delta, rho) else { return false };
                let mut rest = gamma.clone();
                for (z, t) in &inst {
                    match rest.remove(z) {
                        Some(tz) if type_alpha_eq(&tz, t) => {}
                        _ => return false,
                    }
                }
                all_why_not(&rest)
            }
            Wait(x, body) => match take(gamma, x) {
                Some((Type::Bot, rest)) => self.d(theta, body, &rest),
                _ => false,
            },
            SelL(x, body) | SelR(x, body) => match take(gamma, x) {
                Some((Type::Plus(a, b), rest)) => {
                    let c = if matches!(p, SelL(..)) { *a } else { *b };
                    self.d(theta, body, &with(&rest, x, c))
                }
                _ => false,
            },
            Offer(x, l, r) => match take(gamma, x) {
                Some((Type::With(a, b), rest)) => {
                    self.d(theta, l, &with(&rest, x, *a)) && self.d(theta, r, &with(&rest, x, *b))
                }
                _ => false,
            },
            Recv(x, y, body) => match take(gamma, x) {
                Some((Type::Par(a, b), rest)) => {
                    let (y2, body2) = self.apart(y, gamma.contains_key(y), body);
                    self.d(theta, &body2, &with(&with(&rest, &y2, *a), x, *b))
                }
                _ => false,
            },
            Client(x, y, body) => match take(gamma, x) {
                Some((Type::WhyNot(a), rest)) => {
                    let (y2, body2) = self.apart(y, gamma.contains_key(y), body);
                    let g = with(&rest, &y2, (*a).clone());
                    self.d(theta, &body2, &g) || self.d(theta, &body2, &with(&g, x, Type::WhyNot(a)))
                }
                _ => false,
            },
            Server(x, y, body) => match take(gamma, x) {
                Some((Type::OfCourse(a), rest)) if theta.is_empty() && all_why_not(&rest) => {
                    let (y2, body2) = self.apart(y, gamma.contains_key(y), body);
                    self.d(theta, &body2, &with(&rest, &y2, *a))
                }
                _ => false,
            },
            SendType(x, a, body) => match take(gamma, x) {
                Some((Type::Exists(v, b), rest)) if !(self.opts.cp && a.mentions_higher_order()) => {
                    let b2 = subst_types(&b, &BTreeMap::from([(v, a.clone())]), &mut self.fresh);
                    self.d(theta, body, &with(&rest, x, b2))
                }
                _ => false,
            },
            RecvType(x, v, body) => match take(gamma, x) {
                Some((Type::Forall(w, b), rest)) => {
                    let escapes = rest.values().any(|t| t.ftv().contains(v))
                        || theta.values().any(|c| c.iter().any(|(_, t)| t.ftv().contains(v)));
                    if escapes {
                        return false;
                    }
                    let b2 = subst_types(&b, &BTreeMap::from([(w, Type::Var(v.clone()))]), &mut self.fresh);
                    self.d(theta, body, &with(&rest, x, b2))
                }
                _ => false,
            },
            SendProc(x, rho, body) => match take(gamma, x) {
                Some((Type::Provide(delta), rest)) if !self.opts.cp && all_why_not(&rest) => {
                    instantiate(&delta, rho).is_ok_and(|inst| self.d(theta, body, &inst))
                }
                _ => false,
            },
            RecvProc(x, q, body) => match take(gamma, x) {
                Some((Type::Assume(delta), rest)) if !self.opts.cp => {
                    let (q2, body2) = if theta.contains_key(q) {
                        let n = self.fresh.name(q);
                        let s = Subst { pvars: BTreeMap::from([(q.clone(), n.clone())]), ..Subst::default() };
                        (n, s.apply(body, &mut self.fresh))
                    } else {
                        (q.clone(), (**body).clone())
                    };
                    let mut th = theta.clone();
                    th.insert(q2, delta);
                    self.d(&th, &body2, &rest)
                }
                _ => false,
            },
            Cut(x, a, y, l, r) => {
                if self.opts.cp && a.mentions_higher_order() {
                    return false;
                }
                let (x2, l2) = self.apart(x, gamma.contains_key(x), l);
                let (y2, r2) = self.apart(y, gamma.contains_key(y), r);
                splits(theta, gamma, 2).into_iter().any(|s| {
                    self.d(&s[0].0, &l2, &with(&s[0].1, &x2, a.clone()))
                        && self.d(&s[1].0, &r2, &with(&s[1].1, &y2, dual(a)))
                })
            }
            Send(x, y, l, r) => match take(gamma, x) {
                Some((Type::Tensor(a, b), rest)) => {
                    let (y2, l2) = self.apart(y, gamma.contains_key(y), l);
                    splits(theta, &rest, 2).into_iter().any(|s| {
                        self.d(&s[0].0, &l2, &with(&s[0].1, &y2, (*a).clone()))
                            && self.d(&s[1].0, r, &with(&s[1].1, x, (*b).clone()))
                    })
                }
                _ => false,
            },
            ExplSubst(scope, q, rho, delta, body) => {
                if self.opts.cp {
                    return false;
                }
                let Ok(inst) = instantiate(delta, rho) else { return false };
                let (q2, scope2) = if theta.contains_key(q) {
                    let n = self.fresh.name(q);
                    let s = Subst { pvars: BTreeMap::from([(q.clone(), n.clone())]), ..Subst::default() };
                    (n, s.apply(scope, &mut self.fresh))
                } else {
                    (q.clone(), (**scope).clone())
                };
                splits(theta, &ChannelCtx::new(), 2).into_iter().any(|s| {
                    let mut th = s[1].0.clone();
                    th.insert(q2.clone(), delta.clone());
                    self.d(&s[0].0, body, &inst) && self.d(&th, &scope2, gamma)
                })
            }
            MCut(m) => {
                if self.opts.cp {
                    return false;
                }
                let Ok(ends) = check_coherence(&m.global) else { return false };
                if ends.len() != m.branches.len()
                    || m.branches.iter().any(|b| !ends.get(&b.chan).is_some_and(|t| type_alpha_eq(t, &b.ty)))
                {
                    return false;
                }
                let bs: Vec<(Name, Process, Type)> = m
                    .branches
                    .iter()
                    .map(|b| {
                        let (c, body) = self.apart(&b.chan, gamma.contains_key(&b.chan), &b.body);
                        (c, body, b.ty.clone())
                    })
                    .collect();
                splits(theta, gamma, bs.len())
                    .into_iter()
                    .any(|s| bs.iter().zip(&s).all(|((c, body, t), (th, g))| self.d(th, body, &with(g, c, t.clone()))))
            }
            _ => false,
        }
    }
}
