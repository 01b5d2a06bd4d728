//! Capture-avoiding substitution over processes, and alpha-equivalence.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{compose_records, Branch, GlobalType, MCut, Name, ParamCtx, Process, Record, Type};
use crate::fresh::Fresh;
use crate::types::subst_types;

/// An abstraction `λρ.P` substituted for a process variable.
#[derive(Debug, Clone)]
pub struct Abstraction {
    pub rec: Record,
    pub body: Process,
}

/// Simultaneous substitution of channels, process variables (renaming),
/// type variables and abstractions for process variables.
#[derive(Debug, Clone, Default)]
pub struct Subst {
    pub chans: BTreeMap<Name, Name>,
    pub pvars: BTreeMap<Name, Name>,
    pub types: BTreeMap<Name, Type>,
    pub procs: BTreeMap<Name, Abstraction>,
}

impl Subst {
    pub fn chans(map: BTreeMap<Name, Name>) -> Subst {
        Subst { chans: map, ..Subst::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.chans.is_empty() && self.pvars.is_empty() && self.types.is_empty() && self.procs.is_empty()
    }

    pub fn apply(&self, p: &Process, fresh: &mut Fresh) -> Process {
        if self.is_empty() && !fresh.is_canonical() {
            return p.clone();
        }
        self.go(p, fresh)
    }

    fn chan(&self, x: &Name) -> Name {
        self.chans.get(x).cloned().unwrap_or_else(|| x.clone())
    }

    fn pvar(&self, x: &Name) -> Name {
        self.pvars.get(x).cloned().unwrap_or_else(|| x.clone())
    }

    fn ty(&self, t: &Type, fresh: &mut Fresh) -> Type {
        subst_types(t, &self.types, fresh)
    }

    fn ctx(&self, c: &ParamCtx, fresh: &mut Fresh) -> ParamCtx {
        c.map_types(|t| self.ty(t, fresh))
    }

    fn record(&self, r: &Record) -> Record {
        r.map_names(|x| self.chan(x))
    }

    fn bind_chan(&self, y: &Name, fresh: &mut Fresh) -> (Subst, Name) {
        let mut s = self.clone();
        s.chans.remove(y);
        if fresh.is_canonical() || s.chans.values().any(|v| v == y) {
            let y2 = fresh.name(y);
            s.chans.insert(y.clone(), y2.clone());
            (s, y2)
        } else {
            (s, y.clone())
        }
    }

    fn bind_chans(&self, ys: &[&Name], fresh: &mut Fresh) -> (Subst, Vec<Name>) {
        let mut s = self.clone();
        let mut out = Vec::new();
        for y in ys {
            let (s2, y2) = s.bind_chan(y, fresh);
            s = s2;
            out.push(y2);
        }
        (s, out)
    }

    fn bind_record(&self, r: &Record, fresh: &mut Fresh) -> (Subst, Record) {
        let names = r.names();
        let (s, renamed) = self.bind_chans(&names, fresh);
        let mut it = renamed.into_iter();
        (s, r.map_names(|_| it.next().expect("one name per entry")))
    }

    fn bind_pvar(&self, q: &Name, fresh: &mut Fresh) -> (Subst, Name) {
        let mut s = self.clone();
        s.pvars.remove(q);
        s.procs.remove(q);
        let captures = fresh.is_canonical()
            || s.pvars.values().any(|v| v == q)
            || s.procs.values().any(|a| a.body.free_proc_vars().contains(q));
        if captures {
            let q2 = fresh.name(q);
            s.pvars.insert(q.clone(), q2.clone());
            (s, q2)
        } else {
            (s, q.clone())
        }
    }

    fn bind_tvar(&self, x: &Name, fresh: &mut Fresh) -> (Subst, Name) {
        let mut s = self.clone();
        s.types.remove(x);
        let captures = fresh.is_canonical()
            || s.types.values().any(|t| t.ftv().contains(x))
            || s.procs.values().any(|a| a.body.free_type_vars().contains(x));
        if captures {
            let x2 = fresh.name(x);
            s.types.insert(x.clone(), Type::Var(x2.clone()));
            (s, x2)
        } else {
            (s, x.clone())
        }
    }

    fn go(&self, p: &Process, fresh: &mut Fresh) -> Process {
        use Process::*;
        let bx = Box::new;
        match p {
            Send(x, y, a, b) => {
                let x2 = self.chan(x);
                let (s, y2) = self.bind_chan(y, fresh);
                let a2 = s.go(a, fresh);
                Send(x2, y2, bx(a2), bx(self.go(b, fresh)))
            }
            Recv(x, y, a) => {
                let (s, y2) = self.bind_chan(y, fresh);
                Recv(self.chan(x), y2, bx(s.go(a, fresh)))
            }
            Client(x, y, a) => {
                let (s, y2) = self.bind_chan(y, fresh);
                Client(self.chan(x), y2, bx(s.go(a, fresh)))
            }
            Server(x, y, a) => {
                let (s, y2) = self.bind_chan(y, fresh);
                Server(self.chan(x), y2, bx(s.go(a, fresh)))
            }
            SelL(x, a) => SelL(self.chan(x), bx(self.go(a, fresh))),
            SelR(x, a) => SelR(self.chan(x), bx(self.go(a, fresh))),
            Wait(x, a) => Wait(self.chan(x), bx(self.go(a, fresh))),
            Offer(x, a, b) => {
                let a2 = self.go(a, fresh);
                Offer(self.chan(x), bx(a2), bx(self.go(b, fresh)))
            }
            EmptyOffer(x) => EmptyOffer(self.chan(x)),
            Close(x) => Close(self.chan(x)),
            SendType(x, t, a) => {
                let t2 = self.ty(t, fresh);
                SendType(self.chan(x), t2, bx(self.go(a, fresh)))
            }
            RecvType(x, v, a) => {
                let (s, v2) = self.bind_tvar(v, fresh);
                RecvType(self.chan(x), v2, bx(s.go(a, fresh)))
            }
            SendProc(x, r, a) => {
                let (s, r2) = self.bind_record(r, fresh);
                SendProc(self.chan(x), r2, bx(s.go(a, fresh)))
            }
            RecvProc(x, q, a) => {
                let (s, q2) = self.bind_pvar(q, fresh);
                RecvProc(self.chan(x), q2, bx(s.go(a, fresh)))
            }
            Invoke(q, r) => {
                let r2 = self.record(r);
                match self.procs.get(q) {
                    Some(abs) => {
                        let map = compose_records(&r2, &abs.rec).expect("invocation matches abstraction labels");
                        Subst::chans(map).go(&abs.body, fresh)
                    }
                    None => Invoke(self.pvar(q), r2),
                }
            }
            Link(x, y, t) => Link(self.chan(x), self.chan(y), self.ty(t, fresh)),
            Cut(x, t, y, a, b) => {
                let t2 = self.ty(t, fresh);
                let (s1, x2) = self.bind_chan(x, fresh);
                let a2 = s1.go(a, fresh);
                let (s2, y2) = self.bind_chan(y, fresh);
                Cut(x2, t2, y2, bx(a2), bx(s2.go(b, fresh)))
            }
            ExplSubst(scope, q, r, c, body) => {
                let (s1, q2) = self.bind_pvar(q, fresh);
                let scope2 = s1.go(scope, fresh);
                let c2 = self.ctx(c, fresh);
                let (s2, r2) = self.bind_record(r, fresh);
                ExplSubst(bx(scope2), q2, r2, c2, bx(s2.go(body, fresh)))
            }
            MCut(m) => MCut(Box::new(self.mcut(m, fresh))),
            FreeSend(x, y, a) => FreeSend(self.chan(x), self.chan(y), bx(self.go(a, fresh))),
            SendProcCont(x, r, a, b) => {
                let (s, r2) = self.bind_record(r, fresh);
                let a2 = s.go(a, fresh);
                SendProcCont(self.chan(x), r2, bx(a2), bx(self.go(b, fresh)))
            }
            RecvProcCont(x, q, a) => {
                let (s, q2) = self.bind_pvar(q, fresh);
                RecvProcCont(self.chan(x), q2, bx(s.go(a, fresh)))
            }
            HOParam(x, q, a) => {
                let (s, q2) = self.bind_pvar(q, fresh);
                HOParam(self.chan(x), q2, bx(s.go(a, fresh)))
            }
            DefProc(k, r, c, body, scope) => {
                let c2 = self.ctx(c, fresh);
                let (s1, r2) = self.bind_record(r, fresh);
                let body2 = s1.go(body, fresh);
                let (s2, k2) = self.bind_chan(k, fresh);
                DefProc(k2, r2, c2, bx(body2), bx(s2.go(scope, fresh)))
            }
            CallProc(k, r) => CallProc(self.chan(k), self.record(r)),
            HOApply(scope, x, r, c, body) => {
                let (s1, x2) = self.bind_chan(x, fresh);
                let scope2 = s1.go(scope, fresh);
                let c2 = self.ctx(c, fresh);
                let (s2, r2) = self.bind_record(r, fresh);
                HOApply(bx(scope2), x2, r2, c2, bx(s2.go(body, fresh)))
            }
        }
    }

    fn mcut(&self, m: &MCut, fresh: &mut Fresh) -> MCut {
        let mut renames = BTreeMap::new();
        let mut branches = Vec::new();
        for b in &m.branches {
            let ty = self.ty(&b.ty, fresh);
            let (s, c2) = self.bind_chan(&b.chan, fresh);
            renames.insert(b.chan.clone(), c2.clone());
            branches.push(Branch { chan: c2, ty, body: s.go(&b.body, fresh) });
        }
        let global = self.global(&m.global, &renames, fresh);
        MCut { global, branches }
    }

    fn global(&self, g: &GlobalType, ends: &BTreeMap<Name, Name>, fresh: &mut Fresh) -> GlobalType {
        use GlobalType::*;
        let e = |x: &Name| ends.get(x).cloned().unwrap_or_else(|| x.clone());
        let es = |xs: &[Name]| xs.iter().map(e).collect::<Vec<_>>();
        let bx = Box::new;
        match g {
            OutIn(xs, y, g1, h) => {
                let g2 = self.global(g1, ends, fresh);
                OutIn(es(xs), e(y), bx(g2), bx(self.global(h, ends, fresh)))
            }
            CloseWait(xs, y) => CloseWait(es(xs), e(y)),
            SelOffer(x, ys, g1, h) => {
                let g2 = self.global(g1, ends, fresh);
                SelOffer(e(x), es(ys), bx(g2), bx(self.global(h, ends, fresh)))
            }
            EmptyChoice(x, ys, ctx) => {
                let ctx2 = ctx.iter().map(|(z, t)| (e(z), self.ty(t, fresh))).collect();
                EmptyChoice(e(x), es(ys), ctx2)
            }
            Bang(x, ys, g1) => Bang(e(x), es(ys), bx(self.global(g1, ends, fresh))),
            TypeComm(v, x, ys, g1) => {
                let (s, v2) = self.bind_tvar(v, fresh);
                TypeComm(v2, e(x), es(ys), bx(s.global(g1, ends, fresh)))
            }
            GAxiom(x, t, y) => GAxiom(e(x), self.ty(t, fresh), e(y)),
            ProvideAssume(x, y, c) => ProvideAssume(e(x), e(y), self.ctx(c, fresh)),
        }
    }
}

/// Renames endpoints of a global type.
pub fn rename_global(g: &GlobalType, ends: &BTreeMap<Name, Name>) -> GlobalType {
    let mut fresh = Fresh::new(0);
    Subst::default().global(g, ends, &mut fresh)
}

/// Substitutes a type for a type variable throughout a global type.
pub fn subst_type_in_global(g: &GlobalType, x: &str, a: &Type, fresh: &mut Fresh) -> GlobalType {
    let s = Subst { types: BTreeMap::from([(x.to_string(), a.clone())]), ..Subst::default() };
    s.global(g, &BTreeMap::new(), fresh)
}

/// A supply avoiding every name in the given processes.
pub fn fresh_for<'a>(ps: impl IntoIterator<Item = &'a Process>) -> Fresh {
    let mut names = BTreeSet::new();
    for p in ps {
        names.extend(p.all_names());
    }
    Fresh::avoiding(0, names)
}

/// `p{w/y}`.
pub fn rename_channel(p: &Process, w: &str, y: &str) -> Process {
    let mut fresh = fresh_for([p]);
    fresh.reserve([w, y]);
    rename_channel_with(p, w, y, &mut fresh)
}

pub fn rename_channel_with(p: &Process, w: &str, y: &str, fresh: &mut Fresh) -> Process {
    if w == y {
        return p.clone();
    }
    Subst::chans(BTreeMap::from([(y.to_string(), w.to_string())])).apply(p, fresh)
}

/// Simultaneous renaming of free channels.
pub fn rename_channels(p: &Process, map: &BTreeMap<Name, Name>, fresh: &mut Fresh) -> Process {
    let map: BTreeMap<Name, Name> = map.iter().filter(|(k, v)| k != v).map(|(k, v)| (k.clone(), v.clone())).collect();
    Subst::chans(map).apply(p, fresh)
}

pub fn subst_type_in_process(p: &Process, x: &str, a: &Type, fresh: &mut Fresh) -> Process {
    let s = Subst { types: BTreeMap::from([(x.to_string(), a.clone())]), ..Subst::default() };
    s.apply(p, fresh)
}

/// Renames every bound name to a canonical one; free names are kept.
pub fn canonical(p: &Process) -> Process {
    let mut fresh = Fresh::canonical();
    Subst::default().apply(p, &mut fresh)
}

pub fn alpha_eq(p: &Process, q: &Process) -> bool {
    p == q || canonical(p) == canonical(q)
}
