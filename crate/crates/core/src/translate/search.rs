//! Bounded search over CP reductions, used to test that every CHOP step is
//! matched by a sequence of steps on the translations.

use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{translate_term, TranslateError};
use crate::ast::{ChannelCtx, ProcEnv, Process, Type};
use crate::eval::rules::apart_chan;
use crate::eval::{all_steps, run, RunOptions, Status, StepTag};
use crate::fresh::Fresh;
use crate::subst::{alpha_eq, canonical, rename_channel, rename_channel_with, subst_type_in_process};
use crate::syntax::print_process;
use crate::types::{dual, type_alpha_eq};

/// States visited before a search gives up regardless of depth.
pub const MAX_STATES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Reached after this many CP steps.
    Found(usize),
    SearchExhausted,
}

#[derive(Debug, Clone)]
pub struct CorrespondenceEntry {
    pub tag: StepTag,
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
pub struct Correspondence {
    pub entries: Vec<CorrespondenceEntry>,
    /// Whether the CP normal form of `⟦P⟧` matches the translation of the
    /// CHOP normal form. `None` when either run does not terminate.
    pub normal_forms_agree: Option<bool>,
}

impl Correspondence {
    pub fn exhausted(&self) -> usize {
        self.entries.iter().filter(|e| e.outcome == Outcome::SearchExhausted).count()
    }
}

/// Runs `p` and, for each step `P → P'`, searches from `⟦P⟧` for `⟦P'⟧`.
pub fn correspondence_check(
    p: &Process,
    gamma: &ChannelCtx,
    max_depth: usize,
) -> Result<Correspondence, TranslateError> {
    let theta = ProcEnv::new();
    let trace = run(p, &RunOptions::default()).map_err(|e| TranslateError::Eval(e.to_string()))?;
    let mut cur = translate_term(&theta, p, gamma)?;
    let mut entries = Vec::new();
    for (tag, next) in &trace.steps {
        let target = translate_term(&theta, next, gamma)?;
        let outcome = search(&cur, &target, max_depth);
        entries.push(CorrespondenceEntry { tag: tag.clone(), outcome });
        cur = target;
    }
    let normal_forms_agree = match trace.status {
        Status::NormalForm => {
            let first = translate_term(&theta, p, gamma)?;
            let opts = RunOptions { deep: true, ..RunOptions::default() };
            let cp = run(&first, &opts).ok().filter(|t| t.status == Status::NormalForm);
            let chop = run(&cur, &opts).ok().filter(|t| t.status == Status::NormalForm);
            match (cp, chop) {
                (Some(a), Some(b)) => Some(cp_equiv(a.last(), b.last())),
                _ => None,
            }
        }
        _ => None,
    };
    Ok(Correspondence { entries, normal_forms_agree })
}

/// Breadth-first search over CP reductions, at any depth, up to the
/// equivalences on cuts and links.
pub fn search(from: &Process, target: &Process, max_depth: usize) -> Outcome {
    let mut seen: HashSet<String> = HashSet::new();
    let mut queue = VecDeque::from([(from.clone(), 0usize)]);
    seen.insert(key(from));
    while let Some((s, depth)) = queue.pop_front() {
        if cp_equiv(&s, target) {
            return Outcome::Found(depth);
        }
        if depth == max_depth {
            continue;
        }
        for n in moves(&s) {
            if seen.len() >= MAX_STATES {
                return Outcome::SearchExhausted;
            }
            if seen.insert(key(&n)) {
                queue.push_back((n, depth + 1));
            }
        }
    }
    Outcome::SearchExhausted
}

fn key(p: &Process) -> String {
    print_process(&canonical(p))
}

/// Engine steps everywhere, plus the axiom reduction at every type and cut
/// associativity.
fn moves(p: &Process) -> Vec<Process> {
    let mut out: Vec<Process> = all_steps(p, true).into_iter().map(|(q, _)| q).collect();
    let mut fresh = Fresh::avoiding(0, p.all_names());
    let mut path = Vec::new();
    extra(p, p, &mut path, &mut fresh, &mut out);
    out
}

fn extra(root: &Process, p: &Process, path: &mut Vec<usize>, fresh: &mut Fresh, out: &mut Vec<Process>) {
    if let Process::Cut(x, a, y, l, r) = p {
        for q in axiom_any(x, y, l, r, fresh).into_iter().chain(assoc(x, a, y, l, r, fresh)) {
            out.push(root.replace_at(path, q));
        }
    }
    for (i, c) in p.children().into_iter().enumerate() {
        path.push(i);
        extra(root, c, path, fresh, out);
        path.pop();
    }
}

fn axiom_any(x: &str, y: &str, l: &Process, r: &Process, fresh: &mut Fresh) -> Option<Process> {
    let forwarded = |link: &Process, chan: &str| match link {
        Process::Link(u, w, t) if !t.is_atomic() && u != w && (u == chan || w == chan) => {
            Some(if u == chan { w.clone() } else { u.clone() })
        }
        _ => None,
    };
    if let Some(o) = forwarded(l, x) {
        return Some(rename_channel_with(r, &o, y, fresh));
    }
    forwarded(r, y).map(|o| rename_channel_with(l, &o, x, fresh))
}

/// Moves a cut into the side of a neighbouring cut that uses its channel.
fn assoc(x: &str, a: &Type, y: &str, l: &Process, r: &Process, fresh: &mut Fresh) -> Vec<Process> {
    let mut out = Vec::new();
    let cut = |x: &str, a: &Type, y: &str, p: Process, q: Process| Process::cut(x, a.clone(), y, p, q);
    for side in 0..2 {
        let (inner, other, chan) = if side == 0 { (l, r, x) } else { (r, l, y) };
        let Process::Cut(u, b, v, p, q) = inner else { continue };
        let avoid: BTreeSet<_> = other.free_channels().into_iter().chain([x.to_string(), y.to_string()]).collect();
        let (u2, p2) = apart_chan(u, p, &avoid, fresh);
        let (v2, q2) = apart_chan(v, q, &avoid, fresh);
        let outer = |body: Process| {
            if side == 0 {
                cut(x, a, y, body, other.clone())
            } else {
                cut(x, a, y, other.clone(), body)
            }
        };
        if p2.free_channels().contains(chan) {
            out.push(cut(&u2, b, &v2, outer(p2.clone()), q2.clone()));
        }
        if q2.free_channels().contains(chan) {
            out.push(cut(&u2, b, &v2, p2, outer(q2)));
        }
    }
    out
}

/// Alpha-equivalence up to the symmetry of cuts and links.
pub fn cp_equiv(p: &Process, q: &Process) -> bool {
    alpha_eq(p, q) || Eqv { next: 0 }.eq(p, q)
}

struct Eqv {
    next: usize,
}

impl Eqv {
    fn common(&mut self) -> String {
        self.next += 1;
        format!("%e{}", self.next)
    }

    fn bind(&mut self, x: &str, p: &Process, y: &str, q: &Process) -> bool {
        let n = self.common();
        self.eq(&rename_channel(p, &n, x), &rename_channel(q, &n, y))
    }

    fn eq(&mut self, p: &Process, q: &Process) -> bool {
        use Process::*;
        match (p, q) {
            (Send(x, y, p1, p2), Send(u, v, q1, q2)) => x == u && self.bind(y, p1, v, q1) && self.eq(p2, q2),
            (Recv(x, y, p1), Recv(u, v, q1))
            | (Client(x, y, p1), Client(u, v, q1))
            | (Server(x, y, p1), Server(u, v, q1)) => x == u && self.bind(y, p1, v, q1),
            (SelL(x, p1), SelL(u, q1)) | (SelR(x, p1), SelR(u, q1)) | (Wait(x, p1), Wait(u, q1)) => {
                x == u && self.eq(p1, q1)
            }
            (Offer(x, p1, p2), Offer(u, q1, q2)) => x == u && self.eq(p1, q1) && self.eq(p2, q2),
            (EmptyOffer(x), EmptyOffer(u)) | (Close(x), Close(u)) => x == u,
            (SendType(x, a, p1), SendType(u, b, q1)) => x == u && type_alpha_eq(a, b) && self.eq(p1, q1),
            (RecvType(x, v, p1), RecvType(u, w, q1)) => {
                if x != u {
                    return false;
                }
                let n = Type::Var(self.common());
                let mut fresh = Fresh::avoiding(0, p1.all_names().into_iter().chain(q1.all_names()));
                let p2 = subst_type_in_process(p1, v, &n, &mut fresh);
                let q2 = subst_type_in_process(q1, w, &n, &mut fresh);
                self.eq(&p2, &q2)
            }
            (Link(x, y, a), Link(u, v, b)) => {
                (x == u && y == v && type_alpha_eq(a, b)) || (x == v && y == u && type_alpha_eq(a, &dual(b)))
            }
            (Cut(x, a, y, p1, p2), Cut(u, b, v, q1, q2)) => {
                (type_alpha_eq(a, b) && self.bind(x, p1, u, q1) && self.bind(y, p2, v, q2))
                    || (type_alpha_eq(a, &dual(b)) && self.bind(x, p1, v, q2) && self.bind(y, p2, u, q1))
            }
            _ => alpha_eq(p, q),
        }
    }
}
