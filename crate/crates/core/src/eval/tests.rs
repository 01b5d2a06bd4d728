use super::*;
use crate::check::typecheck;
use crate::subst::alpha_eq;
use crate::syntax::parser::{parse_channel_ctx, parse_proc_env, parse_process};

fn p(src: &str) -> Process {
    parse_process(src).unwrap()
}

fn one(src: &str) -> (Process, StepTag) {
    step(&p(src)).expect("a step")
}

/// Runs to completion, re-checking every intermediate term.
fn run_checked(theta: &str, src: &str, gamma: &str) -> Trace {
    let (theta, gamma) = (parse_proc_env(theta).unwrap(), parse_channel_ctx(gamma).unwrap());
    typecheck(&theta, &p(src), &gamma).unwrap();
    let t = run(&p(src), &RunOptions::default()).unwrap();
    for (tag, q) in &t.steps {
        if let Err(e) = typecheck(&theta, q, &gamma) {
            panic!("after {tag}: {q}\n{e}");
        }
    }
    t
}

#[test]
fn close_wait() {
    let (q, tag) = one("new x:1 y { close x | wait y. close z }");
    assert_eq!(q, p("close z"));
    assert_eq!((tag.family, tag.rule.as_str()), (Family::Principal, "1⊥"));
    let t =
        run(&p("new x:1 y { close x | wait y. close z }"), &RunOptions { fuel: 10, ..RunOptions::default() }).unwrap();
    assert_eq!(t.steps.len(), 1);
    assert_eq!(t.status, Status::NormalForm);
}

#[test]
fn provide_meets_assume() {
    let (q, tag) = one("new x:provide{l:1} y { x[proc(l=a) => close a] | y(proc p). run p(l=z) }");
    assert!(alpha_eq(&q, &p("let p = proc(l=a : 1) => close a in run p(l=z)")), "{q}");
    assert_eq!(tag.rule, "⌈⌉⌊⌋");
}

#[test]
fn invoke_aligns_names() {
    let (q, tag) = one("let p = proc(l=a : 1) => close a in run p(l=z)");
    assert_eq!(q, p("close z"));
    assert_eq!((tag.family, tag.rule.as_str()), (Family::Principal, "chop-invoke"));
}

#[test]
fn chop_commutes_under_input() {
    let (q, tag) = one("let r = proc() => close w in x(y). run r()");
    assert_eq!(q, p("x(y). let r = proc() => close w in run r()"));
    assert_eq!((tag.family, tag.rule.as_str()), (Family::Commute, "chop-commute-⅋"));
}

#[test]
fn open_term_is_refused() {
    assert!(matches!(run(&p("run p(l=x)"), &RunOptions::default()), Err(EvalError::OpenTerm(_))));
}

#[test]
fn unchecked_term_is_refused() {
    let r = step_checked(
        &ProcEnv::new(),
        &p("close x"),
        &ChannelCtx::new(),
        CheckOptions::default(),
        &RunOptions::default(),
    );
    assert!(matches!(r, Err(EvalError::NotWellFormed(_))));
}

#[test]
fn tensor_par() {
    let t = run_checked("", "new x:1 * 1 y { x[a]. (close a | close x) | y(b). wait b. wait y. close z }", "z:1");
    assert_eq!(t.rule_names(), vec!["⊗⅋", "cut-commute-⊥", "1⊥", "1⊥"]);
    assert_eq!(t.last(), &p("close z"));
}

#[test]
fn choice_right() {
    let t = run_checked("", "new x:1 + 1 y { x[inr]. close x | y.case(wait y. close z, wait y. close z) }", "z:1");
    assert_eq!(t.rule_names()[0], "⊕&-right");
    assert_eq!(t.status, Status::NormalForm);
}

#[test]
fn exponential_weaken_and_contract() {
    let t = run_checked("", "new x:?bot y { close z | !y(v). close v }", "z:1");
    assert_eq!(t.rule_names(), vec!["?!weaken"]);
    let t = run_checked("", "new x:?bot y { ?x[a]. wait a. ?x[b]. wait b. close z | !y(v). close v }", "z:1");
    assert_eq!(t.status, Status::NormalForm);
    assert!(t.rule_names().contains(&"?!contract"));
    assert!(alpha_eq(t.last(), &p("close z")));
}

#[test]
fn type_exchange() {
    let t = run_checked(
        "",
        "new x:ex X. (X * (~X @ 1)) y { x[type 1]. x[a]. (close a | x(c). wait c. close x) | y(type X). y(b). y[d]. (link b d : X | wait y. close z) }",
        "z:1",
    );
    assert_eq!(t.rule_names()[0], "∃∀");
    assert_eq!(t.status, Status::NormalForm);
}

#[test]
fn eta_before_link_reduction() {
    let t = run_checked("", "new x:1 y { close x | link y z : 1 }", "z:1");
    assert_eq!(t.rule_names(), vec!["η-1", "1⊥"]);
    assert_eq!(t.last(), &p("close z"));
    let t = run_checked("", "new x:X y { link w x : X | link z y : ~X }", "w:~X, z:X");
    assert_eq!(t.rule_names(), vec!["axiom"]);
}

#[test]
fn cut_commutes_past_unrelated_prefix() {
    let t = run_checked("", "new x:1 y { wait u. close x | wait y. close z }", "u:bot, z:1");
    assert_eq!(t.rule_names()[0], "cut-commute-⊥");
    assert_eq!(t.status, Status::NormalForm);
    assert_eq!(t.last(), &p("wait u. new x:1 y { close x | wait y. close z }"));
}

#[test]
fn deep_run_normalises_under_prefixes() {
    let opts = RunOptions { deep: true, ..RunOptions::default() };
    let t = run(&p("new x:1 y { wait u. close x | wait y. close z }"), &opts).unwrap();
    assert_eq!(t.last(), &p("wait u. close z"));
}

#[test]
fn eliminate_examples() {
    assert_eq!(eliminate_chops(&p("let p = proc(l=a : 1) => close a in run p(l=z)")), p("close z"));
    let q = eliminate_chops(&p("let p = proc(l=a : 1) => close a in x.case(run p(l=z), run p(l=z))"));
    assert_eq!(q, p("x.case(close z, close z)"));
    let free = p("new x:1 y { close x | wait y. close z }");
    assert_eq!(eliminate_chops(&free), free);
}

#[test]
fn duplicating_chop_step_runs_last() {
    let t = run_checked(
        "",
        "let p = proc(l=a : 1) => close a in x.case(wait x. run p(l=z), wait x. run p(l=z))",
        "x:bot & bot, z:1",
    );
    assert_eq!(t.rule_names()[0], "chop-commute-&");
    assert_eq!(t.status, Status::NormalForm);
}

#[test]
fn run_is_deterministic() {
    let src = "new x:?bot y { ?x[a]. wait a. ?x[b]. wait b. close z | !y(v). close v }";
    let a = run(&p(src), &RunOptions::default()).unwrap();
    let b = run(&p(src), &RunOptions::default()).unwrap();
    assert_eq!(a, b);
}
