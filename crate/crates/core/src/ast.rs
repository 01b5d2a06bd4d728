//! Terms, types, records and contexts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub type Name = String;
pub type Label = String;

/// Channel typing: channel name to session type.
pub type ChannelCtx = BTreeMap<Name, Type>;

/// Higher-order context: process variable to the parameter context it expects.
pub type ProcEnv = BTreeMap<Name, ParamCtx>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(Label),
    #[error("channel `{0}` appears twice in a record")]
    DuplicateChannel(Name),
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Var(Name),
    DualVar(Name),
    Tensor(Box<Type>, Box<Type>),
    Par(Box<Type>, Box<Type>),
    Plus(Box<Type>, Box<Type>),
    With(Box<Type>, Box<Type>),
    Zero,
    Top,
    One,
    Bot,
    WhyNot(Box<Type>),
    OfCourse(Box<Type>),
    Exists(Name, Box<Type>),
    Forall(Name, Box<Type>),
    Provide(ParamCtx),
    Assume(ParamCtx),
}

impl Type {
    pub fn var(x: &str) -> Type {
        Type::Var(x.to_string())
    }
    pub fn tensor(a: Type, b: Type) -> Type {
        Type::Tensor(Box::new(a), Box::new(b))
    }
    pub fn par(a: Type, b: Type) -> Type {
        Type::Par(Box::new(a), Box::new(b))
    }
    pub fn plus(a: Type, b: Type) -> Type {
        Type::Plus(Box::new(a), Box::new(b))
    }
    pub fn with(a: Type, b: Type) -> Type {
        Type::With(Box::new(a), Box::new(b))
    }
    pub fn why_not(a: Type) -> Type {
        Type::WhyNot(Box::new(a))
    }
    pub fn of_course(a: Type) -> Type {
        Type::OfCourse(Box::new(a))
    }
    pub fn exists(x: &str, a: Type) -> Type {
        Type::Exists(x.to_string(), Box::new(a))
    }
    pub fn forall(x: &str, a: Type) -> Type {
        Type::Forall(x.to_string(), Box::new(a))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Type::Var(_) | Type::DualVar(_))
    }

    /// True for `?A`, the only types that admit weakening and contraction.
    pub fn is_why_not(&self) -> bool {
        matches!(self, Type::WhyNot(_))
    }

    /// Number of constructors, counting parameter contexts entrywise.
    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) | Type::DualVar(_) | Type::Zero | Type::Top | Type::One | Type::Bot => 1,
            Type::Tensor(a, b) | Type::Par(a, b) | Type::Plus(a, b) | Type::With(a, b) => 1 + a.size() + b.size(),
            Type::WhyNot(a) | Type::OfCourse(a) | Type::Exists(_, a) | Type::Forall(_, a) => 1 + a.size(),
            Type::Provide(c) | Type::Assume(c) => 1 + c.iter().map(|(_, t)| t.size()).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Type::Var(_) | Type::DualVar(_) | Type::Zero | Type::Top | Type::One | Type::Bot => 0,
            Type::Tensor(a, b) | Type::Par(a, b) | Type::Plus(a, b) | Type::With(a, b) => 1 + a.depth().max(b.depth()),
            Type::WhyNot(a) | Type::OfCourse(a) | Type::Exists(_, a) | Type::Forall(_, a) => 1 + a.depth(),
            Type::Provide(c) | Type::Assume(c) => 1 + c.iter().map(|(_, t)| t.depth()).max().unwrap_or(0),
        }
    }

    /// Free type variables.
    pub fn ftv(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_ftv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_ftv(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Type::Var(x) | Type::DualVar(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Type::Tensor(a, b) | Type::Par(a, b) | Type::Plus(a, b) | Type::With(a, b) => {
                a.collect_ftv(bound, out);
                b.collect_ftv(bound, out);
            }
            Type::WhyNot(a) | Type::OfCourse(a) => a.collect_ftv(bound, out),
            Type::Exists(x, a) | Type::Forall(x, a) => {
                bound.push(x.clone());
                a.collect_ftv(bound, out);
                bound.pop();
            }
            Type::Provide(c) | Type::Assume(c) => {
                for (_, t) in c.iter() {
                    t.collect_ftv(bound, out);
                }
            }
            Type::Zero | Type::Top | Type::One | Type::Bot => {}
        }
    }

    /// Every type variable name occurring in the type, bound or free.
    pub fn all_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Type::Var(x) | Type::DualVar(x) => {
                out.insert(x.clone());
            }
            Type::Tensor(a, b) | Type::Par(a, b) | Type::Plus(a, b) | Type::With(a, b) => {
                a.all_vars(out);
                b.all_vars(out);
            }
            Type::WhyNot(a) | Type::OfCourse(a) => a.all_vars(out),
            Type::Exists(x, a) | Type::Forall(x, a) => {
                out.insert(x.clone());
                a.all_vars(out);
            }
            Type::Provide(c) | Type::Assume(c) => {
                for (_, t) in c.iter() {
                    t.all_vars(out);
                }
            }
            Type::Zero | Type::Top | Type::One | Type::Bot => {}
        }
    }

    pub fn mentions_higher_order(&self) -> bool {
        match self {
            Type::Provide(_) | Type::Assume(_) => true,
            Type::Tensor(a, b) | Type::Par(a, b) | Type::Plus(a, b) | Type::With(a, b) => {
                a.mentions_higher_order() || b.mentions_higher_order()
            }
            Type::WhyNot(a) | Type::OfCourse(a) | Type::Exists(_, a) | Type::Forall(_, a) => a.mentions_higher_order(),
            _ => false,
        }
    }

    pub fn mentions_exponential(&self) -> bool {
        match self {
            Type::WhyNot(_) | Type::OfCourse(_) => true,
            Type::Tensor(a, b) | Type::Par(a, b) | Type::Plus(a, b) | Type::With(a, b) => {
                a.mentions_exponential() || b.mentions_exponential()
            }
            Type::Exists(_, a) | Type::Forall(_, a) => a.mentions_exponential(),
            Type::Provide(c) | Type::Assume(c) => c.iter().any(|(_, t)| t.mentions_exponential()),
            _ => false,
        }
    }
}

/// A process type over parameter labels, kept sorted by label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ParamCtx(Vec<(Label, Type)>);

impl ParamCtx {
    pub fn new(mut entries: Vec<(Label, Type)>) -> Result<ParamCtx, RecordError> {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(RecordError::DuplicateLabel(w[0].0.clone()));
            }
        }
        Ok(ParamCtx(entries))
    }

    pub fn empty() -> ParamCtx {
        ParamCtx(Vec::new())
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Label, Type)> {
        self.0.iter()
    }

    pub fn entries(&self) -> &[(Label, Type)] {
        &self.0
    }

    pub fn labels(&self) -> Vec<&str> {
        self.0.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn get(&self, l: &str) -> Option<&Type> {
        self.0.iter().find(|(k, _)| k == l).map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map_types(&self, mut f: impl FnMut(&Type) -> Type) -> ParamCtx {
        ParamCtx(self.0.iter().map(|(l, t)| (l.clone(), f(t))).collect())
    }
}

/// Parameter record mapping labels to channel names, kept sorted by label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Record(Vec<(Label, Name)>);

impl Record {
    pub fn new(mut entries: Vec<(Label, Name)>) -> Result<Record, RecordError> {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(RecordError::DuplicateLabel(w[0].0.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for (_, x) in &entries {
            if !seen.insert(x) {
                return Err(RecordError::DuplicateChannel(x.clone()));
            }
        }
        Ok(Record(entries))
    }

    pub fn empty() -> Record {
        Record(Vec::new())
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Label, Name)> {
        self.0.iter()
    }

    pub fn entries(&self) -> &[(Label, Name)] {
        &self.0
    }

    pub fn labels(&self) -> Vec<&str> {
        self.0.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn names(&self) -> Vec<&Name> {
        self.0.iter().map(|(_, x)| x).collect()
    }

    pub fn get(&self, l: &str) -> Option<&Name> {
        self.0.iter().find(|(k, _)| k == l).map(|(_, x)| x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Renames the channels of the record, leaving labels alone.
    pub fn map_names(&self, mut f: impl FnMut(&Name) -> Name) -> Record {
        Record(self.0.iter().map(|(l, x)| (l.clone(), f(x))).collect())
    }
}

/// Composes `rho` after the inverse of `rho_prime`: maps `rho_prime(l)` to `rho(l)`.
pub fn compose_records(rho: &Record, rho_prime: &Record) -> Result<BTreeMap<Name, Name>, RecordError> {
    if rho.labels() != rho_prime.labels() {
        return Err(RecordError::LabelMismatch(format!(
            "({}) against ({})",
            rho.labels().join(", "),
            rho_prime.labels().join(", ")
        )));
    }
    Ok(rho_prime.iter().zip(rho.iter()).map(|((_, from), (_, to))| (from.clone(), to.clone())).collect())
}

/// A typed parameter record `(l = x : A, ...)`, as written on abstractions whose
/// interface is not determined by an enclosing channel type.
pub fn split_typed_record(entries: Vec<(Label, Name, Type)>) -> Result<(Record, ParamCtx), RecordError> {
    let rec = Record::new(entries.iter().map(|(l, x, _)| (l.clone(), x.clone())).collect())?;
    let ctx = ParamCtx::new(entries.into_iter().map(|(l, _, t)| (l, t)).collect())?;
    Ok((rec, ctx))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Process {
    /// `x[y].(P | Q)`: `y` bound in `P`.
    Send(Name, Name, Box<Process>, Box<Process>),
    /// `x(y).P`
    Recv(Name, Name, Box<Process>),
    SelL(Name, Box<Process>),
    SelR(Name, Box<Process>),
    Offer(Name, Box<Process>, Box<Process>),
    EmptyOffer(Name),
    /// `?x[y].P`
    Client(Name, Name, Box<Process>),
    /// `!x(y).P`
    Server(Name, Name, Box<Process>),
    SendType(Name, Type, Box<Process>),
    RecvType(Name, Name, Box<Process>),
    /// `x[λρ.P]`: the record's channels are bound in `P`.
    SendProc(Name, Record, Box<Process>),
    /// `x(p).P`
    RecvProc(Name, Name, Box<Process>),
    Invoke(Name, Record),
    Close(Name),
    Wait(Name, Box<Process>),
    /// `link x y : A` with `x : dual A` and `y : A`.
    Link(Name, Name, Type),
    /// `new x:A y (P | Q)`: `x : A` bound in `P`, `y : dual A` bound in `Q`.
    Cut(Name, Type, Name, Box<Process>, Box<Process>),
    /// `P let p = λρ.Q`, fields in order: scope `P`, `p`, `ρ`, the abstraction's
    /// parameter context, and the abstraction body `Q`.
    ExplSubst(Box<Process>, Name, Record, ParamCtx, Box<Process>),
    /// Coherence cut over a global type.
    MCut(Box<MCut>),
    /// `x[=y].P`
    FreeSend(Name, Name, Box<Process>),
    /// `x[[λρ.P]].Q`
    SendProcCont(Name, Record, Box<Process>, Box<Process>),
    /// `x((p)).P`
    RecvProcCont(Name, Name, Box<Process>),
    /// `def K(ρ) = P in Q`
    DefProc(Name, Record, ParamCtx, Box<Process>, Box<Process>),
    /// `call K(ρ)`
    CallProc(Name, Record),
    /// `x\p.P`
    HOParam(Name, Name, Box<Process>),
    /// `P <x = λρ.Q>`: `x` bound in `P`.
    HOApply(Box<Process>, Name, Record, ParamCtx, Box<Process>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MCut {
    pub global: GlobalType,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Branch {
    pub chan: Name,
    pub ty: Type,
    pub body: Process,
}

/// Coherence proofs for multiparty cuts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GlobalType {
    OutIn(Vec<Name>, Name, Box<GlobalType>, Box<GlobalType>),
    CloseWait(Vec<Name>, Name),
    SelOffer(Name, Vec<Name>, Box<GlobalType>, Box<GlobalType>),
    /// The extra context lists the endpoints the rule leaves unconstrained.
    EmptyChoice(Name, Vec<Name>, ChannelCtx),
    Bang(Name, Vec<Name>, Box<GlobalType>),
    TypeComm(Name, Name, Vec<Name>, Box<GlobalType>),
    GAxiom(Name, Type, Name),
    ProvideAssume(Name, Name, ParamCtx),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgement {
    pub theta: ProcEnv,
    pub process: Process,
    pub gamma: ChannelCtx,
}

impl Process {
    pub fn send(x: &str, y: &str, p: Process, q: Process) -> Process {
        Process::Send(x.into(), y.into(), Box::new(p), Box::new(q))
    }
    pub fn recv(x: &str, y: &str, p: Process) -> Process {
        Process::Recv(x.into(), y.into(), Box::new(p))
    }
    pub fn close(x: &str) -> Process {
        Process::Close(x.into())
    }
    pub fn wait(x: &str, p: Process) -> Process {
        Process::Wait(x.into(), Box::new(p))
    }
    pub fn link(x: &str, y: &str, a: Type) -> Process {
        Process::Link(x.into(), y.into(), a)
    }
    pub fn cut(x: &str, a: Type, y: &str, p: Process, q: Process) -> Process {
        Process::Cut(x.into(), a, y.into(), Box::new(p), Box::new(q))
    }
    pub fn invoke(p: &str, rho: Record) -> Process {
        Process::Invoke(p.into(), rho)
    }
    pub fn send_proc(x: &str, rho: Record, p: Process) -> Process {
        Process::SendProc(x.into(), rho, Box::new(p))
    }
    pub fn recv_proc(x: &str, p: &str, q: Process) -> Process {
        Process::RecvProc(x.into(), p.into(), Box::new(q))
    }
    pub fn expl_subst(scope: Process, p: &str, rho: Record, ctx: ParamCtx, body: Process) -> Process {
        Process::ExplSubst(Box::new(scope), p.into(), rho, ctx, Box::new(body))
    }

    /// True when no surface-only construct occurs.
    pub fn is_core(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |p| {
            if matches!(
                p,
                Process::FreeSend(..)
                    | Process::SendProcCont(..)
                    | Process::RecvProcCont(..)
                    | Process::DefProc(..)
                    | Process::CallProc(..)
                    | Process::HOParam(..)
                    | Process::HOApply(..)
            ) {
                ok = false;
            }
        });
        ok
    }

    /// Pre-order traversal over every sub-process, abstraction bodies included.
    pub fn visit(&self, f: &mut impl FnMut(&Process)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn children(&self) -> Vec<&Process> {
        use Process::*;
        match self {
            Send(_, _, p, q) | Offer(_, p, q) | Cut(_, _, _, p, q) => vec![p, q],
            ExplSubst(p, _, _, _, q) | SendProcCont(_, _, p, q) | DefProc(_, _, _, p, q) => vec![p, q],
            HOApply(p, _, _, _, q) => vec![p, q],
            Recv(_, _, p) | SelL(_, p) | SelR(_, p) | Client(_, _, p) | Server(_, _, p) => vec![p],
            SendType(_, _, p) | RecvType(_, _, p) | SendProc(_, _, p) | RecvProc(_, _, p) => vec![p],
            Wait(_, p) | FreeSend(_, _, p) | RecvProcCont(_, _, p) | HOParam(_, _, p) => vec![p],
            MCut(m) => m.branches.iter().map(|b| &b.body).collect(),
            EmptyOffer(_) | Invoke(..) | Close(_) | Link(..) | CallProc(..) => vec![],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Process> {
        use Process::*;
        match self {
            Send(_, _, p, q) | Offer(_, p, q) | Cut(_, _, _, p, q) => vec![p, q],
            ExplSubst(p, _, _, _, q) | SendProcCont(_, _, p, q) | DefProc(_, _, _, p, q) => vec![p, q],
            HOApply(p, _, _, _, q) => vec![p, q],
            Recv(_, _, p) | SelL(_, p) | SelR(_, p) | Client(_, _, p) | Server(_, _, p) => vec![p],
            SendType(_, _, p) | RecvType(_, _, p) | SendProc(_, _, p) | RecvProc(_, _, p) => vec![p],
            Wait(_, p) | FreeSend(_, _, p) | RecvProcCont(_, _, p) | HOParam(_, _, p) => vec![p],
            MCut(m) => m.branches.iter_mut().map(|b| &mut b.body).collect(),
            EmptyOffer(_) | Invoke(..) | Close(_) | Link(..) | CallProc(..) => vec![],
        }
    }

    /// The sub-process at `path`, following child indices as in `children`.
    pub fn at_path(&self, path: &[usize]) -> Option<&Process> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i)?.at_path(rest),
        }
    }

    /// Replaces the sub-process at `path`.
    pub fn replace_at(&self, path: &[usize], new: Process) -> Process {
        let mut out = self.clone();
        let mut cur = &mut out;
        for i in path {
            cur = cur.children_mut().swap_remove(*i);
        }
        *cur = new;
        out
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn count_expl_subst(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |p| {
            if matches!(p, Process::ExplSubst(..)) {
                n += 1
            }
        });
        n
    }

    /// Free channel names.
    pub fn free_channels(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fc(self, &mut Vec::new(), &mut out);
        out
    }

    /// Free process variables.
    pub fn free_proc_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        fpv(self, &mut Vec::new(), &mut out);
        out
    }

    /// Free type variables of every annotation.
    pub fn free_type_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        ftv_proc(self, &mut Vec::new(), &mut out);
        out
    }

    /// Number of free occurrences of channel `x`.
    pub fn count_free(&self, x: &str) -> usize {
        count_free(self, x)
    }

    /// Every name occurring anywhere (channels, process variables, type variables, labels excluded).
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| collect_local_names(p, &mut out));
        out
    }
}

fn collect_local_names(p: &Process, out: &mut BTreeSet<Name>) {
    use Process::*;
    let mut add = |x: &Name| {
        out.insert(x.clone());
    };
    match p {
        Send(x, y, ..) | Recv(x, y, _) | Client(x, y, _) | Server(x, y, _) | FreeSend(x, y, _) => {
            add(x);
            add(y)
        }
        RecvType(x, y, _) | RecvProc(x, y, _) | RecvProcCont(x, y, _) | HOParam(x, y, _) => {
            add(x);
            add(y)
        }
        SelL(x, _) | SelR(x, _) | Offer(x, ..) | EmptyOffer(x) | Close(x) | Wait(x, _) => add(x),
        SendType(x, t, _) => {
            add(x);
            t.all_vars(out)
        }
        SendProc(x, r, _) | SendProcCont(x, r, ..) | Invoke(x, r) | CallProc(x, r) => {
            add(x);
            for (_, y) in r.iter() {
                out.insert(y.clone());
            }
        }
        Link(x, y, t) => {
            add(x);
            add(y);
            t.all_vars(out)
        }
        Cut(x, t, y, ..) => {
            add(x);
            add(y);
            t.all_vars(out)
        }
        ExplSubst(_, q, r, c, _) | DefProc(q, r, c, ..) | HOApply(_, q, r, c, _) => {
            add(q);
            for (_, y) in r.iter() {
                out.insert(y.clone());
            }
            for (_, t) in c.iter() {
                t.all_vars(out);
            }
        }
        MCut(m) => {
            for b in &m.branches {
                out.insert(b.chan.clone());
                b.ty.all_vars(out);
            }
            m.global.all_names(out);
        }
    }
}

fn with_bound<R>(
    bound: &mut Vec<Name>,
    names: impl IntoIterator<Item = Name>,
    f: impl FnOnce(&mut Vec<Name>) -> R,
) -> R {
    let n = bound.len();
    bound.extend(names);
    let r = f(bound);
    bound.truncate(n);
    r
}

fn fc(p: &Process, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    use Process::*;
    let free = |x: &Name, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
        if !bound.contains(x) {
            out.insert(x.clone());
        }
    };
    match p {
        Send(x, y, a, b) => {
            free(x, bound, out);
            with_bound(bound, [y.clone()], |bd| fc(a, bd, out));
            fc(b, bound, out);
        }
        Recv(x, y, a) | Client(x, y, a) | Server(x, y, a) => {
            free(x, bound, out);
            with_bound(bound, [y.clone()], |bd| fc(a, bd, out));
        }
        SelL(x, a) | SelR(x, a) | Wait(x, a) | SendType(x, _, a) | RecvType(x, _, a) | RecvProc(x, _, a) => {
            free(x, bound, out);
            fc(a, bound, out);
        }
        RecvProcCont(x, _, a) | HOParam(x, _, a) => {
            free(x, bound, out);
            fc(a, bound, out);
        }
        Offer(x, a, b) => {
            free(x, bound, out);
            fc(a, bound, out);
            fc(b, bound, out);
        }
        EmptyOffer(x) | Close(x) => free(x, bound, out),
        SendProc(x, r, a) => {
            free(x, bound, out);
            with_bound(bound, r.names().into_iter().cloned(), |bd| fc(a, bd, out));
        }
        SendProcCont(x, r, a, b) => {
            free(x, bound, out);
            with_bound(bound, r.names().into_iter().cloned(), |bd| fc(a, bd, out));
            fc(b, bound, out);
        }
        Invoke(_, r) => {
            for x in r.names() {
                free(x, bound, out);
            }
        }
        CallProc(k, r) => {
            free(k, bound, out);
            for x in r.names() {
                free(x, bound, out);
            }
        }
        Link(x, y, _) => {
            free(x, bound, out);
            free(y, bound, out);
        }
        FreeSend(x, y, a) => {
            free(x, bound, out);
            free(y, bound, out);
            fc(a, bound, out);
        }
        Cut(x, _, y, a, b) => {
            with_bound(bound, [x.clone()], |bd| fc(a, bd, out));
            with_bound(bound, [y.clone()], |bd| fc(b, bd, out));
        }
        ExplSubst(scope, _, r, _, body) => {
            fc(scope, bound, out);
            with_bound(bound, r.names().into_iter().cloned(), |bd| fc(body, bd, out));
        }
        DefProc(k, r, _, body, scope) => {
            with_bound(bound, r.names().into_iter().cloned(), |bd| fc(body, bd, out));
            with_bound(bound, [k.clone()], |bd| fc(scope, bd, out));
        }
        HOApply(scope, x, r, _, body) => {
            with_bound(bound, [x.clone()], |bd| fc(scope, bd, out));
            with_bound(bound, r.names().into_iter().cloned(), |bd| fc(body, bd, out));
        }
        MCut(m) => {
            for b in &m.branches {
                with_bound(bound, [b.chan.clone()], |bd| fc(&b.body, bd, out));
            }
        }
    }
}

fn fpv(p: &Process, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    use Process::*;
    match p {
        Invoke(q, _) => {
            if !bound.contains(q) {
                out.insert(q.clone());
            }
        }
        RecvProc(_, q, a) | RecvProcCont(_, q, a) | HOParam(_, q, a) => {
            with_bound(bound, [q.clone()], |bd| fpv(a, bd, out));
        }
        ExplSubst(scope, q, _, _, body) => {
            with_bound(bound, [q.clone()], |bd| fpv(scope, bd, out));
            fpv(body, bound, out);
        }
        _ => {
            for c in p.children() {
                fpv(c, bound, out);
            }
        }
    }
}

fn ftv_proc(p: &Process, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    use Process::*;
    let add = |t: &Type, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
        for v in t.ftv() {
            if !bound.contains(&v) {
                out.insert(v);
            }
        }
    };
    match p {
        RecvType(_, x, a) => {
            with_bound(bound, [x.clone()], |bd| ftv_proc(a, bd, out));
            return;
        }
        SendType(_, t, _) | Link(_, _, t) | Cut(_, t, ..) => add(t, bound, out),
        ExplSubst(_, _, _, c, _) | DefProc(_, _, c, ..) | HOApply(_, _, _, c, _) => {
            for (_, t) in c.iter() {
                add(t, bound, out);
            }
        }
        MCut(m) => {
            for b in &m.branches {
                add(&b.ty, bound, out);
            }
        }
        _ => {}
    }
    for c in p.children() {
        ftv_proc(c, bound, out);
    }
}

fn count_free(p: &Process, x: &str) -> usize {
    use Process::*;
    let is = |y: &Name| usize::from(y == x);
    match p {
        Send(s, y, a, b) => is(s) + if y == x { 0 } else { count_free(a, x) } + count_free(b, x),
        Recv(s, y, a) | Client(s, y, a) | Server(s, y, a) => is(s) + if y == x { 0 } else { count_free(a, x) },
        SelL(s, a) | SelR(s, a) | Wait(s, a) | SendType(s, _, a) | RecvType(s, _, a) | RecvProc(s, _, a) => {
            is(s) + count_free(a, x)
        }
        RecvProcCont(s, _, a) | HOParam(s, _, a) => is(s) + count_free(a, x),
        Offer(s, a, b) => is(s) + count_free(a, x) + count_free(b, x),
        EmptyOffer(s) | Close(s) => is(s),
        SendProc(s, r, a) => is(s) + if r.names().iter().any(|y| *y == x) { 0 } else { count_free(a, x) },
        SendProcCont(s, r, a, b) => {
            is(s) + if r.names().iter().any(|y| *y == x) { 0 } else { count_free(a, x) } + count_free(b, x)
        }
        Invoke(_, r) => r.names().into_iter().map(is).sum(),
        CallProc(k, r) => is(k) + r.names().into_iter().map(is).sum::<usize>(),
        Link(a, b, _) => is(a) + is(b),
        FreeSend(s, y, a) => is(s) + is(y) + count_free(a, x),
        Cut(y1, _, y2, a, b) => {
            (if y1 == x { 0 } else { count_free(a, x) }) + if y2 == x { 0 } else { count_free(b, x) }
        }
        ExplSubst(scope, _, r, _, body) => {
            count_free(scope, x) + if r.names().iter().any(|y| *y == x) { 0 } else { count_free(body, x) }
        }
        DefProc(k, r, _, body, scope) => {
            (if r.names().iter().any(|y| *y == x) { 0 } else { count_free(body, x) })
                + if k == x { 0 } else { count_free(scope, x) }
        }
        HOApply(scope, y, r, _, body) => {
            (if y == x { 0 } else { count_free(scope, x) })
                + if r.names().iter().any(|z| *z == x) { 0 } else { count_free(body, x) }
        }
        MCut(m) => m.branches.iter().map(|b| if b.chan == x { 0 } else { count_free(&b.body, x) }).sum(),
    }
}

impl GlobalType {
    /// Endpoint names mentioned at the head constructor.
    pub fn head_endpoints(&self) -> Vec<Name> {
        use GlobalType::*;
        match self {
            OutIn(xs, y, ..) | CloseWait(xs, y) => xs.iter().cloned().chain([y.clone()]).collect(),
            SelOffer(x, ys, ..) | EmptyChoice(x, ys, _) | Bang(x, ys, _) | TypeComm(_, x, ys, _) => {
                [x.clone()].into_iter().chain(ys.iter().cloned()).collect()
            }
            GAxiom(x, _, y) | ProvideAssume(x, y, _) => vec![x.clone(), y.clone()],
        }
    }

    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        use GlobalType::*;
        for x in self.head_endpoints() {
            out.insert(x);
        }
        match self {
            OutIn(_, _, g, h) | SelOffer(_, _, g, h) => {
                g.all_names(out);
                h.all_names(out);
            }
            Bang(_, _, g) => g.all_names(out),
            TypeComm(x, _, _, g) => {
                out.insert(x.clone());
                g.all_names(out)
            }
            EmptyChoice(_, _, ctx) => {
                for (x, t) in ctx {
                    out.insert(x.clone());
                    t.all_vars(out);
                }
            }
            GAxiom(_, t, _) => t.all_vars(out),
            ProvideAssume(_, _, c) => {
                for (_, t) in c.iter() {
                    t.all_vars(out);
                }
            }
            CloseWait(..) => {}
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::printer::print_type(self))
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::printer::print_process(self))
    }
}

impl fmt::Display for GlobalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::printer::print_global(self))
    }
}
