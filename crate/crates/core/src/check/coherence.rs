//! Coherence of global types: `G ⊨ (x_i : A_i)_i`.

use std::collections::BTreeSet;

use super::{ErrorKind, TypeError};
use crate::ast::{ChannelCtx, GlobalType, Name, Type};
use crate::types::{ctx_alpha_eq, dual};

fn incoherent(msg: impl Into<String>) -> TypeError {
    TypeError::new(ErrorKind::IncoherentGlobalType, msg)
}

fn distinct(g: &GlobalType) -> Result<(), TypeError> {
    let ends = g.head_endpoints();
    let set: BTreeSet<&Name> = ends.iter().collect();
    if set.len() != ends.len() {
        return Err(incoherent(format!("endpoints repeated in `{g}`")));
    }
    Ok(())
}

fn take(ctx: &mut ChannelCtx, x: &str, g: &GlobalType) -> Result<Type, TypeError> {
    ctx.remove(x).ok_or_else(|| incoherent(format!("endpoint `{x}` missing from the premise of `{g}`")))
}

/// The unique endpoint typing of `g`.
pub fn check_coherence(g: &GlobalType) -> Result<ChannelCtx, TypeError> {
    use GlobalType::*;
    distinct(g)?;
    match g {
        OutIn(xs, y, g1, h) => {
            let mut left = check_coherence(g1)?;
            let mut right = check_coherence(h)?;
            let mut out = ChannelCtx::new();
            for x in xs {
                let a = take(&mut left, x, g)?;
                let b = take(&mut right, x, g)?;
                out.insert(x.clone(), Type::tensor(a, b));
            }
            let c = take(&mut left, y, g)?;
            let d = take(&mut right, y, g)?;
            if let Some(extra) = left.keys().next() {
                return Err(incoherent(format!(
                    "endpoint `{extra}` in the first premise of `{g}` is not among its head endpoints"
                )));
            }
            out.insert(y.clone(), Type::par(c, d));
            for (z, t) in right {
                out.insert(z, t);
            }
            Ok(out)
        }
        CloseWait(xs, y) => {
            let mut out: ChannelCtx = xs.iter().map(|x| (x.clone(), Type::One)).collect();
            out.insert(y.clone(), Type::Bot);
            Ok(out)
        }
        SelOffer(x, ys, g1, h) => {
            let mut left = check_coherence(g1)?;
            let mut right = check_coherence(h)?;
            let a = take(&mut left, x, g)?;
            let b = take(&mut right, x, g)?;
            let mut out = ChannelCtx::new();
            out.insert(x.clone(), Type::plus(a, b));
            for y in ys {
                let c = take(&mut left, y, g)?;
                let d = take(&mut right, y, g)?;
                out.insert(y.clone(), Type::with(c, d));
            }
            if !ctx_alpha_eq(&left, &right) {
                return Err(incoherent(format!("the branches of `{g}` disagree on the remaining endpoints")));
            }
            out.extend(left);
            Ok(out)
        }
        EmptyChoice(x, ys, rest) => {
            let mut out = rest.clone();
            for z in [x].into_iter().chain(ys) {
                if out.contains_key(z) {
                    return Err(incoherent(format!("endpoint `{z}` listed twice in `{g}`")));
                }
            }
            out.insert(x.clone(), Type::Zero);
            for y in ys {
                out.insert(y.clone(), Type::Top);
            }
            Ok(out)
        }
        Bang(x, ys, g1) => {
            let mut inner = check_coherence(g1)?;
            let a = take(&mut inner, x, g)?;
            let mut out = ChannelCtx::new();
            out.insert(x.clone(), Type::why_not(a));
            for y in ys {
                out.insert(y.clone(), Type::of_course(take(&mut inner, y, g)?));
            }
            if let Some(extra) = inner.keys().next() {
                return Err(incoherent(format!(
                    "endpoint `{extra}` in the premise of `{g}` is not among its head endpoints"
                )));
            }
            Ok(out)
        }
        TypeComm(v, x, ys, g1) => {
            let mut inner = check_coherence(g1)?;
            let a = take(&mut inner, x, g)?;
            let mut out = ChannelCtx::new();
            out.insert(x.clone(), Type::Exists(v.clone(), Box::new(a)));
            for y in ys {
                out.insert(y.clone(), Type::Forall(v.clone(), Box::new(take(&mut inner, y, g)?)));
            }
            if inner.values().any(|t| t.ftv().contains(v)) {
                return Err(TypeError::new(ErrorKind::TypeVarEscape, format!("type variable `{v}` escapes `{g}`")));
            }
            out.extend(inner);
            Ok(out)
        }
        GAxiom(x, a, y) => Ok(ChannelCtx::from([(x.clone(), a.clone()), (y.clone(), dual(a))])),
        ProvideAssume(x, y, delta) => {
            Ok(ChannelCtx::from([(x.clone(), Type::Provide(delta.clone())), (y.clone(), Type::Assume(delta.clone()))]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ParamCtx;

    #[test]
    fn provide_assume_pair() {
        let d = ParamCtx::new(vec![("l".into(), Type::One)]).unwrap();
        let c = check_coherence(&GlobalType::ProvideAssume("x".into(), "y".into(), d.clone())).unwrap();
        assert_eq!(c["x"], Type::Provide(d.clone()));
        assert_eq!(c["y"], Type::Assume(d));
    }

    #[test]
    fn close_wait_and_axiom() {
        let c = check_coherence(&GlobalType::CloseWait(vec!["x1".into(), "x2".into()], "y".into())).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c["x1"], Type::One);
        assert_eq!(c["y"], Type::Bot);
        let a = Type::tensor(Type::One, Type::var("X"));
        let c = check_coherence(&GlobalType::GAxiom("x".into(), a.clone(), "y".into())).unwrap();
        assert_eq!(c["y"], dual(&a));
    }

    #[test]
    fn repeated_endpoint_is_incoherent() {
        let e = check_coherence(&GlobalType::CloseWait(vec!["x".into()], "x".into())).unwrap_err();
        assert_eq!(e.kind, ErrorKind::IncoherentGlobalType);
    }

    #[test]
    fn three_party_output() {
        let g = GlobalType::OutIn(
            vec!["a".into(), "b".into()],
            "c".into(),
            Box::new(GlobalType::CloseWait(vec!["a".into(), "b".into()], "c".into())),
            Box::new(GlobalType::CloseWait(vec!["a".into(), "b".into()], "c".into())),
        );
        let c = check_coherence(&g).unwrap();
        assert_eq!(c["a"], Type::tensor(Type::One, Type::One));
        assert_eq!(c["c"], Type::par(Type::Bot, Type::Bot));
    }
}
