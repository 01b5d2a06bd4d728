//! Expansion of the derived constructs into core processes.
//!
//! Only free output needs a type: it is read off the subject's `A * B`, or
//! failing that, off the type of the channel being sent. Channel types are
//! tracked through binders from the declaration and from annotations.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Decl, Pos, Program};
use crate::ast::{ChannelCtx, Name, ParamCtx, Process, Record, Type};
use crate::fresh::Fresh;
use crate::subst::fresh_for;
use crate::types::{dual, subst_type_var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("unknown procedure `{name}`")]
    UnknownProcedure { pos: Pos, name: Name },
    #[error("cannot determine the type sent by `{subject}[={sent}]`")]
    UnknownFreeOutputType { pos: Pos, subject: Name, sent: Name },
}

impl DesugarError {
    pub fn pos(&self) -> Pos {
        match self {
            DesugarError::UnknownProcedure { pos, .. } | DesugarError::UnknownFreeOutputType { pos, .. } => *pos,
        }
    }
}

pub fn desugar(prog: &Program) -> Result<Program, DesugarError> {
    let decls = prog.decls.iter().map(desugar_decl).collect::<Result<Vec<_>, _>>()?;
    Ok(Program { aliases: prog.aliases.clone(), globals: prog.globals.clone(), decls })
}

pub fn desugar_decl(d: &Decl) -> Result<Decl, DesugarError> {
    let body = desugar_process(&d.body, &d.gamma, d.pos)?;
    Ok(Decl { body, ..d.clone() })
}

/// Desugars a process whose free channels have the given types.
pub fn desugar_process(p: &Process, gamma: &ChannelCtx, pos: Pos) -> Result<Process, DesugarError> {
    if p.is_core() {
        return Ok(p.clone());
    }
    let mut fresh = fresh_for([p]);
    fresh.reserve(gamma.keys().cloned());
    let env: Env = gamma.iter().map(|(x, t)| (x.clone(), Some(t.clone()))).collect();
    Desugarer { fresh, pos }.go(p, &env)
}

/// Known channels; `None` when the type could not be tracked.
type Env = BTreeMap<Name, Option<Type>>;

struct Desugarer {
    fresh: Fresh,
    pos: Pos,
}

fn bind(env: &Env, x: &Name, t: Option<Type>) -> Env {
    let mut e = env.clone();
    e.insert(x.clone(), t);
    e
}

fn bind_record(env: &Env, r: &Record, c: Option<&ParamCtx>) -> Env {
    let mut e = env.clone();
    for (l, x) in r.iter() {
        e.insert(x.clone(), c.and_then(|c| c.get(l).cloned()));
    }
    e
}

impl Desugarer {
    fn go(&mut self, p: &Process, env: &Env) -> Result<Process, DesugarError> {
        use Process::*;
        let ty = |x: &Name| env.get(x).cloned().flatten();
        Ok(match p {
            Send(x, y, a, b) => {
                let (ta, tb) = match ty(x) {
                    Some(Type::Tensor(l, r)) => (Some(*l), Some(*r)),
                    _ => (None, None),
                };
                Send(
                    x.clone(),
                    y.clone(),
                    Box::new(self.go(a, &bind(env, y, ta))?),
                    Box::new(self.go(b, &bind(env, x, tb))?),
                )
            }
            Recv(x, y, a) => {
                let (ta, tb) = match ty(x) {
                    Some(Type::Par(l, r)) => (Some(*l), Some(*r)),
                    _ => (None, None),
                };
                let e = bind(&bind(env, x, tb), y, ta);
                Recv(x.clone(), y.clone(), Box::new(self.go(a, &e)?))
            }
            SelL(x, a) | SelR(x, a) => {
                let left = matches!(p, SelL(..));
                let t = match ty(x) {
                    Some(Type::Plus(l, r)) => Some(if left { *l } else { *r }),
                    _ => None,
                };
                let a = Box::new(self.go(a, &bind(env, x, t))?);
                if left {
                    SelL(x.clone(), a)
                } else {
                    SelR(x.clone(), a)
                }
            }
            Offer(x, a, b) => {
                let (ta, tb) = match ty(x) {
                    Some(Type::With(l, r)) => (Some(*l), Some(*r)),
                    _ => (None, None),
                };
                Offer(x.clone(), Box::new(self.go(a, &bind(env, x, ta))?), Box::new(self.go(b, &bind(env, x, tb))?))
            }
            Client(x, y, a) | Server(x, y, a) => {
                let t = match ty(x) {
                    Some(Type::WhyNot(b)) | Some(Type::OfCourse(b)) => Some(*b),
                    _ => None,
                };
                let a = Box::new(self.go(a, &bind(env, y, t))?);
                if matches!(p, Client(..)) {
                    Client(x.clone(), y.clone(), a)
                } else {
                    Server(x.clone(), y.clone(), a)
                }
            }
            SendType(x, t, a) => {
                let tb = match ty(x) {
                    Some(Type::Exists(v, b)) => Some(subst_type_var(&b, t, &v)),
                    _ => None,
                };
                SendType(x.clone(), t.clone(), Box::new(self.go(a, &bind(env, x, tb))?))
            }
            RecvType(x, v, a) => {
                let tb = match ty(x) {
                    Some(Type::Forall(w, b)) => Some(subst_type_var(&b, &Type::Var(v.clone()), &w)),
                    _ => None,
                };
                RecvType(x.clone(), v.clone(), Box::new(self.go(a, &bind(env, x, tb))?))
            }
            SendProc(x, r, a) => {
                let c = match ty(x) {
                    Some(Type::Provide(c)) => Some(c),
                    _ => None,
                };
                SendProc(x.clone(), r.clone(), Box::new(self.go(a, &bind_record(env, r, c.as_ref()))?))
            }
            RecvProc(x, q, a) => RecvProc(x.clone(), q.clone(), Box::new(self.go(a, env)?)),
            Wait(x, a) => Wait(x.clone(), Box::new(self.go(a, env)?)),
            EmptyOffer(_) | Invoke(..) | Close(_) | Link(..) => p.clone(),
            Cut(x, t, y, a, b) => Cut(
                x.clone(),
                t.clone(),
                y.clone(),
                Box::new(self.go(a, &bind(env, x, Some(t.clone())))?),
                Box::new(self.go(b, &bind(env, y, Some(dual(t))))?),
            ),
            ExplSubst(scope, q, r, c, body) => ExplSubst(
                Box::new(self.go(scope, env)?),
                q.clone(),
                r.clone(),
                c.clone(),
                Box::new(self.go(body, &bind_record(env, r, Some(c)))?),
            ),
            MCut(m) => {
                let mut m = (**m).clone();
                for b in &mut m.branches {
                    b.body = self.go(&b.body, &bind(env, &b.chan, Some(b.ty.clone())))?;
                }
                MCut(Box::new(m))
            }
            FreeSend(x, y, a) => {
                let (ta, tb) = match ty(x) {
                    Some(Type::Tensor(l, r)) => (Some(*l), Some(*r)),
                    _ => (ty(y).map(|t| dual(&t)), None),
                };
                let Some(ta) = ta else {
                    return Err(DesugarError::UnknownFreeOutputType {
                        pos: self.pos,
                        subject: x.clone(),
                        sent: y.clone(),
                    });
                };
                let z = self.fresh.name("z");
                let cont = self.go(a, &bind(env, x, tb))?;
                Send(x.clone(), z.clone(), Box::new(Link(y.clone(), z, ta)), Box::new(cont))
            }
            SendProcCont(x, r, a, b) => {
                let (c, tb) = match ty(x) {
                    Some(Type::Tensor(l, r)) => match *l {
                        Type::Provide(c) => (Some(c), Some(*r)),
                        _ => (None, Some(*r)),
                    },
                    _ => (None, None),
                };
                let y = self.fresh.name("y");
                let body = self.go(a, &bind_record(env, r, c.as_ref()))?;
                let cont = self.go(b, &bind(env, x, tb))?;
                Send(x.clone(), y.clone(), Box::new(SendProc(y, r.clone(), Box::new(body))), Box::new(cont))
            }
            RecvProcCont(x, q, a) => {
                let tb = match ty(x) {
                    Some(Type::Par(_, r)) => Some(*r),
                    _ => None,
                };
                let y = self.fresh.name("y");
                let cont = self.go(a, &bind(env, x, tb))?;
                Recv(x.clone(), y.clone(), Box::new(RecvProc(y, q.clone(), Box::new(cont))))
            }
            DefProc(k, r, c, body, scope) => {
                let x = self.fresh.name("x");
                let y = self.fresh.name("y");
                let body = self.go(body, &bind_record(env, r, Some(c)))?;
                let scope = self.go(scope, &bind(env, k, Some(Type::why_not(Type::Assume(c.clone())))))?;
                let server = Server(x.clone(), y.clone(), Box::new(SendProc(y, r.clone(), Box::new(body))));
                Cut(x, Type::of_course(Type::Provide(c.clone())), k.clone(), Box::new(server), Box::new(scope))
            }
            CallProc(k, r) => {
                if !env.contains_key(k) {
                    return Err(DesugarError::UnknownProcedure { pos: self.pos, name: k.clone() });
                }
                let y = self.fresh.name("y");
                let q = self.fresh.name("p");
                Client(k.clone(), y.clone(), Box::new(RecvProc(y, q.clone(), Box::new(Invoke(q, r.clone())))))
            }
            HOParam(x, q, a) => RecvProc(x.clone(), q.clone(), Box::new(self.go(a, env)?)),
            HOApply(scope, x, r, c, body) => {
                let y = self.fresh.name("y");
                let body = self.go(body, &bind_record(env, r, Some(c)))?;
                let scope = self.go(scope, &bind(env, x, Some(Type::Assume(c.clone()))))?;
                Cut(
                    y.clone(),
                    Type::Provide(c.clone()),
                    x.clone(),
                    Box::new(SendProc(y, r.clone(), Box::new(body))),
                    Box::new(scope),
                )
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::alpha_eq;
    use crate::syntax::parser::parse_process;

    fn ds(src: &str, gamma: &[(&str, Type)]) -> Process {
        let gamma = gamma.iter().map(|(x, t)| (x.to_string(), t.clone())).collect();
        desugar_process(&parse_process(src).unwrap(), &gamma, Pos::default()).unwrap()
    }

    #[test]
    fn free_output_sends_through_a_link() {
        let p = ds("x[=y]. close x", &[("x", Type::tensor(Type::One, Type::One)), ("y", Type::Bot)]);
        let want = Process::send("x", "z", Process::link("y", "z", Type::One), Process::close("x"));
        assert!(alpha_eq(&p, &want), "{p}");
    }

    #[test]
    fn free_output_type_from_sent_channel() {
        let p = ds("x[=y]. close x", &[("y", Type::Bot)]);
        let want = Process::send("x", "z", Process::link("y", "z", Type::One), Process::close("x"));
        assert!(alpha_eq(&p, &want), "{p}");
    }

    #[test]
    fn input_with_continuation() {
        let p = ds("x((p)). close x", &[]);
        let want = Process::recv("x", "y", Process::recv_proc("y", "p", Process::close("x")));
        assert!(alpha_eq(&p, &want), "{p}");
    }

    #[test]
    fn call_is_a_client_request() {
        let rec = Record::new(vec![("l".into(), "x".into())]).unwrap();
        let p = ds("call K(l=x)", &[("K", Type::why_not(Type::Assume(ParamCtx::empty())))]);
        let want =
            Process::Client("K".into(), "y".into(), Box::new(Process::recv_proc("y", "p", Process::invoke("p", rec))));
        assert!(alpha_eq(&p, &want), "{p}");
    }

    #[test]
    fn call_without_definition_is_rejected() {
        let e = desugar_process(&parse_process("call K()").unwrap(), &ChannelCtx::new(), Pos::default()).unwrap_err();
        assert!(matches!(e, DesugarError::UnknownProcedure { .. }));
    }

    #[test]
    fn core_terms_are_untouched() {
        let p = parse_process("new x:1 y { close x | wait y. close z }").unwrap();
        assert_eq!(desugar_process(&p, &ChannelCtx::new(), Pos::default()).unwrap(), p);
    }
}
