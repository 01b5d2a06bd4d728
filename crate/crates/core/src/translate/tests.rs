use super::*;
use crate::check::typecheck;
use crate::subst::alpha_eq;
use crate::syntax::{
    parse, parse_channel_ctx, parse_proc_env, parse_process, parse_process_with, parse_type, ParseOptions,
};

fn ty(src: &str) -> Type {
    parse_type(src).unwrap()
}

fn reserved(src: &str) -> Process {
    parse_process_with(src, ParseOptions { allow_reserved: true }).unwrap()
}

/// Translates `src` under the given environments and re-checks it in CP mode.
fn tr(theta: &str, src: &str, gamma: &str) -> Process {
    let (theta, gamma) = (parse_proc_env(theta).unwrap(), parse_channel_ctx(gamma).unwrap());
    let d = typecheck(&theta, &parse_process(src).unwrap(), &gamma).unwrap();
    let q = translate_proc(&d).unwrap();
    assert!(is_cp(&q), "{q}");
    let cp = CheckOptions { cp: true, ..CheckOptions::default() };
    if let Err(e) = typecheck_with(&ProcEnv::new(), &q, &translate_judgement(&theta, &gamma), cp) {
        panic!("{q}\n{e}");
    }
    q
}

#[test]
fn type_examples() {
    assert_eq!(translate_type(&Type::One), Type::One);
    let d = ParamCtx::new(vec![("l".into(), Type::One)]).unwrap();
    assert_eq!(translate_ctx(&d), ty("bot * 1"));
    assert_eq!(translate_type(&Type::Provide(d.clone())), ty("(1 @ bot) * 1"));
    assert_eq!(translate_type(&Type::Assume(d.clone())), ty("(bot * 1) @ bot"));
    assert_eq!(dual(&translate_type(&Type::Provide(d.clone()))), translate_type(&Type::Assume(d)));
    assert_eq!(translate_ctx(&ParamCtx::empty()), Type::One);
}

#[test]
fn context_follows_label_order() {
    let d = ParamCtx::new(vec![("b".into(), Type::Bot), ("a".into(), ty("1 + bot"))]).unwrap();
    assert_eq!(translate_ctx(&d), ty("(bot & 1) * (1 * 1)"));
}

#[test]
fn env_examples() {
    assert!(translate_env(&ProcEnv::new()).is_empty());
    let e = translate_env(&parse_proc_env("p:{l:1}").unwrap());
    assert_eq!(e, ChannelCtx::from([(x_chan("p"), ty("bot * 1"))]));
    let e = translate_env(&parse_proc_env("p:{}, q:{m:bot}").unwrap());
    assert_eq!(e, ChannelCtx::from([(x_chan("p"), Type::One), (x_chan("q"), ty("1 * 1"))]));
}

#[test]
fn invoke_sends_parameters_then_closes() {
    let q = tr("p:{l:1}", "run p(l=z)", "z:1");
    assert!(alpha_eq(&q, &reserved("__x_p[c]. (link z c : bot | close __x_p)")), "{q}");
}

#[test]
fn provide_sends_a_server_for_the_body() {
    let q = tr("", "x[proc(l=a) => close a]", "x:provide{l:1}");
    assert!(alpha_eq(&q, &reserved("x[y]. (y(a). wait y. close a | close x)")), "{q}");
}

#[test]
fn assume_receives_the_reserved_channel() {
    let q = tr("", "y(proc p). run p(l=z)", "y:assume{l:1}, z:1");
    assert!(alpha_eq(&q, &reserved("y(__x_p). wait y. __x_p[c]. (link z c : bot | close __x_p)")), "{q}");
}

#[test]
fn chop_becomes_a_cut() {
    let q = tr("", "let p = proc(l=a : 1) => close a in run p(l=z)", "z:1");
    let want = reserved(
        "new __x_p:bot * 1 __y_p { __x_p[c]. (link z c : bot | close __x_p) | __y_p(a). wait __y_p. close a }",
    );
    assert!(alpha_eq(&q, &want), "{q}");
}

#[test]
fn contraction_merges_names() {
    let q = tr("", "?x[a]. ?x[b]. wait a. wait b. close z", "x:?bot, z:1");
    assert!(alpha_eq(&q, &reserved("?x[a]. ?x[b]. wait a. wait b. close z")), "{q}");
}

#[test]
fn weakening_is_erased() {
    let q = tr("", "close z", "w:?bot, z:1");
    assert_eq!(q, parse_process("close z").unwrap());
}

#[test]
fn cp_predicate() {
    assert!(is_cp(&parse_process("new x:1 y { close x | wait y. close z }").unwrap()));
    assert!(!is_cp(&parse_process("run p(l=z)").unwrap()));
    assert!(!is_cp(&parse_process("new x:provide{} y { x[proc() => close w] | y(proc p). run p() }").unwrap()));
}

#[test]
fn program_reports() {
    let prog = parse(
        "proc Open (p:{l:1}) (z:1) = run p(l=z)\n\
         proc Closed () (z:1) = let p = proc(l=a : 1) => close a in run p(l=z)\n",
    )
    .unwrap();
    let r = check_translation(&prog);
    assert!(r.iter().all(DeclTranslation::passed), "{r:?}");
    assert!(r[0].gamma.contains_key(&x_chan("p")));
    assert!(r[1].gamma.keys().all(|x| !x.starts_with(RESERVED_PREFIX)));
}

#[test]
fn multiparty_cut_is_rejected() {
    let prog = parse("proc M () (z:1) = mnew <close(a; b)> { a:1 -> close a | b:bot -> wait b. close z }").unwrap();
    let r = check_translation(&prog);
    assert!(r[0].result.as_ref().unwrap_err().contains("multiparty"), "{r:?}");
}

#[test]
fn completeness_on_close_wait() {
    let p = parse_process("new x:1 y { close x | wait y. close z }").unwrap();
    let c = correspondence_check(&p, &parse_channel_ctx("z:1").unwrap(), 32).unwrap();
    assert_eq!(c.entries.len(), 1);
    assert!(matches!(c.entries[0].outcome, Outcome::Found(n) if n >= 1));
    assert_eq!(c.normal_forms_agree, Some(true));
}

#[test]
fn completeness_on_higher_order_exchange() {
    let p = parse_process("new x:provide{l:1} y { x[proc(l=a) => close a] | y(proc p). run p(l=z) }").unwrap();
    let c = correspondence_check(&p, &parse_channel_ctx("z:1").unwrap(), 16).unwrap();
    assert_eq!(c.entries[0].tag.rule, "⌈⌉⌊⌋");
    assert!(c.entries.iter().all(|e| matches!(e.outcome, Outcome::Found(n) if n <= 16)), "{:?}", c.entries);
}

#[test]
fn normal_form_has_empty_report() {
    let c = correspondence_check(&parse_process("close z").unwrap(), &parse_channel_ctx("z:1").unwrap(), 32).unwrap();
    assert!(c.entries.is_empty());
}

#[test]
fn equivalence_up_to_symmetry() {
    let a = parse_process("new x:1 y { close x | wait y. close z }").unwrap();
    let b = parse_process("new u:bot v { wait u. close z | close v }").unwrap();
    assert!(cp_equiv(&a, &b));
    assert!(cp_equiv(&parse_process("link a b : 1").unwrap(), &parse_process("link b a : bot").unwrap()));
    assert!(!cp_equiv(&a, &parse_process("close z").unwrap()));
}
