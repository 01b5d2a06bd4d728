//! Acceptance criteria 1 to 12. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use chop::check::{oracle, typecheck, typecheck_decl, typecheck_with, CheckOptions, Derivation};
use chop::eval::{eliminate_chops, run, RunOptions, Status, Trace};
use chop::fresh::Fresh;
use chop::subst::alpha_eq;
use chop::syntax::{
    desugar_process, parse, parse_channel_ctx, parse_process, parse_type, print_program, Decl, Pos, Program,
};
use chop::translate::{check_translation, correspondence_check, cp_equiv, translate_type};
use chop::types::{dual, eta_expand_full, type_alpha_eq};
use chop::{ChannelCtx, ProcEnv, Process, Type};
use common::{arb_type, closed_decls, corpus, is_multiparty, small_types, Entry};
use proptest::test_runner::{Config, TestCaseError, TestRunner};

const MIN_CORPUS: usize = 30;
const TYPING_TIME_LIMIT: Duration = Duration::from_secs(1);
const WORKED_FUEL: usize = 200;
const PROGRESS_FUEL: usize = 10_000;
const RANDOM_CASES: u32 = 1000;
const DUALITY_DEPTH: u32 = 6;
const ETA_DEPTH: u32 = 4;
const ETA_EXHAUSTIVE_DEPTH: usize = 2;
const TRANSLATION_DEPTH: u32 = 5;
const SEARCH_DEPTH: usize = 32;
const ORACLE_MAX_NODES: usize = 12;

/// Typing rules of the binary calculus that the corpus must exercise.
const CORE_RULES: [&str; 20] = [
    "Axiom", "Cut", "Tensor", "Par", "Plus1", "Plus2", "With", "WhyNot", "OfCourse", "Exists", "Forall", "Weaken",
    "Contract", "One", "Bot", "Top", "Id", "Chop", "Provide", "Assume",
];

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn entry<'a>(corpus: &'a [Entry], name: &str) -> &'a Entry {
    corpus.iter().find(|e| e.name == name).unwrap_or_else(|| panic!("corpus file {name} missing"))
}

fn run_with(p: &Process, fuel: usize, deep: bool) -> Trace {
    run(p, &RunOptions { fuel, deep, ..RunOptions::default() }).unwrap()
}

fn states(t: &Trace) -> impl Iterator<Item = &Process> {
    std::iter::once(&t.initial).chain(t.steps.iter().map(|(_, p)| p))
}

fn proptest_cases(
    cases: u32,
    strategy: impl proptest::strategy::Strategy<Value = Type>,
    f: impl Fn(Type) -> bool,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner
        .run(&strategy, |a| if f(a.clone()) { Ok(()) } else { Err(TestCaseError::fail(format!("{a}"))) })
        .map_err(|e| e.to_string())
}

fn c1_typing(corpus: &[Entry]) -> Outcome {
    let src = &entry(corpus, "cloud_server").source;
    let start = Instant::now();
    let prog = chop::syntax::desugar(&parse(src).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let server = prog.decl("Server").ok_or("no Server declaration")?;
    typecheck_decl(server, CheckOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let displayed =
        parse_type("!(all Y. ((assume{l:~Y, aud:?bot} @ assume{log:?bot, l:Y}) & (Y @ assume{log:?bot, l:Y})))")
            .unwrap();
    let cs = server.gamma.get("cs").ok_or("cs missing")?;
    if !type_alpha_eq(cs, &displayed) {
        return Err(format!("cs has type {cs}"));
    }
    // The client side must check against the dual.
    typecheck_decl(prog.decl("Client").ok_or("no Client")?, CheckOptions::default()).map_err(|e| e.to_string())?;
    if prog.decl("Client").unwrap().gamma["cc"] != dual(cs) {
        return Err("client type is not the dual of the server type".into());
    }
    if elapsed >= TYPING_TIME_LIMIT {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("cs : {cs} in {elapsed:?}"))
}

fn c2_worked_run(corpus: &[Entry]) -> Outcome {
    let main = entry(corpus, "cloud_server").core.main().unwrap().clone();
    let t = run_with(&main.body, WORKED_FUEL, false);
    let want = ["?!", "∃∀", "⊕&-right", "⊗⅋", "⌈⌉⌊⌋", "chop-invoke"];
    let names = t.rule_names();
    let mut it = names.iter();
    if !want.iter().all(|w| it.any(|n| n == w)) {
        return Err(format!("rule sequence {names:?}"));
    }
    let i = names.iter().position(|n| *n == "chop-invoke").unwrap();
    let after = &t.steps[i].1;
    let faces = match after {
        Process::Cut(_, _, extdb, _, r) => match &**r {
            Process::Cut(_, _, w, _, l) => {
                matches!(&**l, Process::Link(a, b, _) if (a == extdb && b == w) || (a == w && b == extdb))
            }
            _ => false,
        },
        _ => false,
    };
    let displayed = parse_process(
        "new d:bot @ bot extdb { d(b). wait b. wait d. close out | \
         new z:1 * 1 w { z[c].(close c | close z) | link extdb w : bot @ bot } }",
    )
    .unwrap();
    if !faces || !cp_equiv(after, &displayed) {
        return Err(format!("state after chop-invoke: {after}"));
    }
    if t.status != Status::NormalForm {
        return Err(format!("ended {} after {} steps", t.status, t.steps.len()));
    }
    Ok(format!("{} steps, database cut faces the application after step {}", t.steps.len(), i + 1))
}

fn rules_of(d: &Derivation, out: &mut BTreeSet<&'static str>) {
    out.extend(d.rules());
}

fn c3_preservation(corpus: &[Entry]) -> Outcome {
    if corpus.len() < MIN_CORPUS {
        return Err(format!("corpus has {} programs", corpus.len()));
    }
    let mut used = BTreeSet::new();
    let mut failures = Vec::new();
    let mut checked = 0;
    for e in corpus {
        for d in &e.core.decls {
            match typecheck_decl(d, CheckOptions::default()) {
                Ok(der) => rules_of(&der, &mut used),
                Err(err) => failures.push(format!("{}::{}: {err}", e.name, d.name)),
            }
        }
    }
    for (name, d) in closed_decls(corpus) {
        let t = run_with(&d.body, PROGRESS_FUEL, false);
        for (i, p) in states(&t).enumerate().skip(1) {
            checked += 1;
            match typecheck_with(&d.theta, p, &d.gamma, CheckOptions::default()) {
                Ok(der) => rules_of(&der, &mut used),
                Err(err) => failures.push(format!("{name} step {i}: {err}")),
            }
        }
    }
    let missing: Vec<_> = CORE_RULES.iter().filter(|r| !used.contains(*r)).collect();
    if !missing.is_empty() {
        failures.push(format!("rules never used: {missing:?}"));
    }
    if failures.is_empty() {
        Ok(format!("{} programs, {checked} reducts re-checked, all {} rules covered", corpus.len(), CORE_RULES.len()))
    } else {
        Err(failures.join("; "))
    }
}

fn c4_progress(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let mut redexes = 0;
    for (name, d) in closed_decls(corpus) {
        let t = run_with(&d.body, PROGRESS_FUEL, false);
        if matches!(d.body, Process::Cut(..) | Process::ExplSubst(..) | Process::MCut(..)) {
            redexes += 1;
            if t.steps.is_empty() {
                failures.push(format!("{name} takes no step"));
            }
        }
        if t.status == Status::Stuck {
            failures.push(format!("{name} is stuck: {}", t.last()));
        }
    }
    if failures.is_empty() {
        Ok(format!("{redexes} closed cut bodies all step, none stuck"))
    } else {
        Err(failures.join("; "))
    }
}

fn c5_duality() -> Outcome {
    proptest_cases(RANDOM_CASES, arb_type(DUALITY_DEPTH), |a| dual(&dual(&a)) == a)?;
    Ok(format!("{RANDOM_CASES} random types of depth <= {DUALITY_DEPTH}"))
}

fn eta_admissible(a: &Type) -> bool {
    let mut fresh = Fresh::avoiding(0, ["x", "y"]);
    let p = eta_expand_full("x", "y", a, &mut fresh);
    let mut atomic = true;
    p.visit(&mut |q| {
        if let Process::Link(_, _, t) = q {
            atomic &= t.is_atomic();
        }
    });
    let gamma = ChannelCtx::from([("x".into(), dual(a)), ("y".into(), a.clone())]);
    let opts = CheckOptions { atomic_axioms: true, ..CheckOptions::default() };
    atomic && typecheck_with(&ProcEnv::new(), &p, &gamma, opts).is_ok()
}

fn c6_eta() -> Outcome {
    let small = small_types(ETA_EXHAUSTIVE_DEPTH);
    if let Some(a) = small.iter().find(|a| !eta_admissible(a)) {
        return Err(format!("{a}"));
    }
    proptest_cases(RANDOM_CASES, arb_type(ETA_DEPTH), |a| eta_admissible(&a))?;
    Ok(format!(
        "{} enumerated types of depth <= {ETA_EXHAUSTIVE_DEPTH}, {RANDOM_CASES} random of depth <= {ETA_DEPTH}",
        small.len()
    ))
}

fn exponential_free(d: &Decl) -> bool {
    let mut ok = d.gamma.values().all(|t| !t.mentions_exponential());
    d.body.visit(&mut |q| match q {
        Process::Client(..) | Process::Server(..) => ok = false,
        Process::Cut(_, t, ..) | Process::Link(_, _, t) | Process::SendType(_, t, _) => ok &= !t.mentions_exponential(),
        Process::ExplSubst(_, _, _, c, _) => ok &= c.iter().all(|(_, t)| !t.mentions_exponential()),
        _ => {}
    });
    ok
}

fn c7_chop_elimination(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let (mut terms, mut compared) = (0, 0);
    let mut check = |what: String, theta: &ProcEnv, p: &Process, gamma: &ChannelCtx, failures: &mut Vec<String>| {
        terms += 1;
        let q = eliminate_chops(p);
        if q.count_expl_subst() != 0 {
            failures.push(format!("{what}: substitution left"));
        } else if let Err(e) = typecheck_with(theta, &q, gamma, CheckOptions::default()) {
            failures.push(format!("{what}: {e}"));
        }
    };
    for e in corpus {
        for d in &e.core.decls {
            check(format!("{}::{}", e.name, d.name), &d.theta, &d.body, &d.gamma, &mut failures);
        }
    }
    for (name, d) in closed_decls(corpus) {
        let t = run_with(&d.body, PROGRESS_FUEL, false);
        for (i, p) in states(&t).enumerate().skip(1) {
            check(format!("{name} step {i}"), &d.theta, p, &d.gamma, &mut failures);
        }
        if exponential_free(d) {
            compared += 1;
            let before = run_with(&d.body, PROGRESS_FUEL, true);
            let after = run_with(&eliminate_chops(&d.body), PROGRESS_FUEL, true);
            let agree = before.status == Status::NormalForm
                && after.status == Status::NormalForm
                && (alpha_eq(before.last(), after.last()) || cp_equiv(before.last(), after.last()));
            if !agree {
                failures.push(format!("{name}: normal forms {} and {}", before.last(), after.last()));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{terms} terms eliminated and re-checked, {compared} exponential-free normal forms agree"))
    } else {
        Err(failures.join("; "))
    }
}

fn c8_translation_typing(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let mut n = 0;
    for e in corpus.iter().filter(|e| !e.core.decls.iter().any(|d| is_multiparty(&d.body))) {
        for r in check_translation(&e.core) {
            n += 1;
            if let Err(err) = r.result {
                failures.push(format!("{}::{}: {err}", e.name, r.name));
            }
        }
    }
    proptest_cases(RANDOM_CASES, arb_type(TRANSLATION_DEPTH), |a| {
        translate_type(&dual(&a)) == dual(&translate_type(&a))
    })
    .map_err(|e| format!("duality does not commute: {e}"))?;
    if failures.is_empty() {
        Ok(format!(
            "{n} declarations re-check in CP mode; commutation on {RANDOM_CASES} types of depth <= {TRANSLATION_DEPTH}"
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn c9_completeness(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let mut steps = 0;
    for (name, d) in closed_decls(corpus) {
        if is_multiparty(&d.body) {
            continue;
        }
        let c = correspondence_check(&d.body, &d.gamma, SEARCH_DEPTH).map_err(|e| format!("{name}: {e}"))?;
        steps += c.entries.len();
        for (i, e) in c.entries.iter().enumerate() {
            if e.outcome == chop::translate::Outcome::SearchExhausted {
                failures.push(format!("{name} step {} ({}): SearchExhausted", i + 1, e.tag.rule));
            }
        }
        if c.normal_forms_agree == Some(false) {
            failures.push(format!("{name}: translated normal forms differ"));
        }
    }
    if failures.is_empty() {
        Ok(format!("{steps} steps matched within depth {SEARCH_DEPTH}"))
    } else {
        Err(format!("{} of {steps} steps: {}", failures.len(), failures.join("; ")))
    }
}

fn nodes(d: &Derivation, out: &mut Vec<(ProcEnv, Process, ChannelCtx)>) {
    if d.process.size() <= ORACLE_MAX_NODES {
        out.push((d.theta.clone(), d.process.clone(), d.gamma.clone()));
    }
    for p in &d.premises {
        nodes(p, out);
    }
}

/// The judgement itself and a handful of perturbations, most of them
/// underivable.
fn mutations(theta: &ProcEnv, gamma: &ChannelCtx) -> Vec<(ProcEnv, ChannelCtx)> {
    let mut out = vec![(theta.clone(), gamma.clone())];
    for x in gamma.keys() {
        let mut g = gamma.clone();
        g.remove(x);
        out.push((theta.clone(), g));
        let mut g = gamma.clone();
        g.insert(x.clone(), dual(&gamma[x]));
        out.push((theta.clone(), g));
    }
    for extra in [Type::One, Type::why_not(Type::Bot)] {
        let mut g = gamma.clone();
        g.insert("extra'".into(), extra);
        out.push((theta.clone(), g));
    }
    for p in theta.keys() {
        let mut t = theta.clone();
        t.remove(p);
        out.push((t, gamma.clone()));
    }
    out
}

fn c10_oracle(corpus: &[Entry]) -> Outcome {
    let mut judgements = Vec::new();
    for e in corpus {
        for d in &e.core.decls {
            if let Ok(der) = typecheck_decl(d, CheckOptions::default()) {
                nodes(&der, &mut judgements);
            }
        }
    }
    let (mut accepted, mut rejected) = (0, 0);
    let mut failures = Vec::new();
    let opts = CheckOptions::default();
    for (theta, p, gamma) in &judgements {
        for (t, g) in mutations(theta, gamma) {
            let algo = typecheck_with(&t, p, &g, opts).is_ok();
            let brute = oracle::derivable(&t, p, &g, opts);
            if algo != brute {
                failures.push(format!("{p} at {g:?}: checker {algo}, oracle {brute}"));
            }
            if algo {
                accepted += 1;
            } else {
                rejected += 1;
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{} judgements, {accepted} accepted and {rejected} rejected by both", accepted + rejected))
    } else {
        Err(format!("{} disagreements: {}", failures.len(), failures.join("; ")))
    }
}

fn c11_multiparty(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let (mut three_party, mut provide_assume, mut steps) = (0, 0, 0);
    for e in corpus.iter().filter(|e| e.name.starts_with("mp_")) {
        let d = e.core.main().unwrap();
        match typecheck_decl(d, CheckOptions::default()) {
            Ok(der) if der.uses_rule("CCut") => {}
            Ok(_) => failures.push(format!("{}: no CCut in derivation", e.name)),
            Err(err) => failures.push(format!("{}: {err}", e.name)),
        }
        if let Process::MCut(m) = &d.body {
            if m.branches.len() >= 3 {
                three_party += 1;
            }
        }
        let t = run_with(&d.body, PROGRESS_FUEL, false);
        if t.status != Status::NormalForm {
            failures.push(format!("{}: ended {}", e.name, t.status));
        }
        let mut prev = &t.initial;
        for (i, (tag, p)) in t.steps.iter().enumerate() {
            steps += 1;
            if let Err(err) = typecheck_with(&d.theta, p, &d.gamma, CheckOptions::default()) {
                failures.push(format!("{} step {}: {err}", e.name, i + 1));
            }
            if tag.rule == "ccut-⌈⌉⌊⌋" {
                if p.count_expl_subst() > prev.count_expl_subst() {
                    provide_assume += 1;
                } else {
                    failures.push(format!("{} step {}: no explicit substitution", e.name, i + 1));
                }
            }
            prev = p;
        }
    }
    if three_party < 3 {
        failures.push(format!("only {three_party} three-party programs"));
    }
    if provide_assume == 0 {
        failures.push("the higher-order coherence reduction never fired".into());
    }
    if failures.is_empty() {
        Ok(format!(
            "{three_party} three-party programs, {provide_assume} substitutions created, {steps} steps preserve types"
        ))
    } else {
        Err(failures.join("; "))
    }
}

/// Surface term, its judgement, and the core term it must desugar to.
const SUGAR: [(&str, &str, &str, &str, &str); 7] = [
    ("free output", "x[=y]. close x", "", "y:~X, x:X * 1", "x[z].(link y z : X | close x)"),
    (
        "output and continue",
        "x[[proc(l=a) => close a]]. close x",
        "",
        "x:provide{l:1} * 1",
        "x[u].(u[proc(l=a) => close a] | close x)",
    ),
    (
        "input and continue",
        "x((p)). wait x. run p(l=z)",
        "",
        "z:1, x:assume{l:1} @ bot",
        "x(u). u(proc p). wait x. run p(l=z)",
    ),
    (
        "procedure definition",
        "def K(l=a : 1) = close a in call K(l=z)",
        "",
        "z:1",
        "new k:!provide{l:1} K { !k(u). u[proc(l=a) => close a] | ?K[v]. v(proc p). run p(l=z) }",
    ),
    ("procedure invocation", "call K(l=z)", "", "z:1, K:?assume{l:1}", "?K[v]. v(proc p). run p(l=z)"),
    ("named parameter", "x\\p. run p(l=z)", "", "z:1, x:assume{l:1}", "x(proc p). run p(l=z)"),
    (
        "application",
        "(x\\p. run p(l=z)) <x = proc(l=a : 1) => close a>",
        "",
        "z:1",
        "new y:provide{l:1} x { y[proc(l=a) => close a] | x(proc p). run p(l=z) }",
    ),
];

fn without_positions(prog: &Program) -> Program {
    let mut p = prog.clone();
    for d in &mut p.decls {
        d.pos = Pos::default();
    }
    p
}

fn round_trips(prog: &Program) -> bool {
    let printed = print_program(prog);
    match parse(&printed) {
        Ok(again) => without_positions(&again) == without_positions(prog) && print_program(&again) == printed,
        Err(_) => false,
    }
}

fn c12_desugaring(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    for (form, src, theta, gamma, want) in SUGAR {
        let theta = chop::syntax::parse_proc_env(theta).unwrap();
        let gamma = parse_channel_ctx(gamma).unwrap();
        let surface = parse_process(src).unwrap();
        let core = match desugar_process(&surface, &gamma, Pos::default()) {
            Ok(q) => q,
            Err(e) => {
                failures.push(format!("{form}: {e}"));
                continue;
            }
        };
        if !core.is_core() || !cp_equiv(&core, &parse_process(want).unwrap()) {
            failures.push(format!("{form}: desugared to {core}"));
        }
        if let Err(e) = typecheck(&theta, &core, &gamma) {
            failures.push(format!("{form}: {e}"));
        }
    }
    for e in corpus {
        if !round_trips(&e.surface) || !round_trips(&e.core) {
            failures.push(format!("{}: print/parse round trip differs", e.name));
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "{} sugar instances check at their derived judgements, {} files round-trip",
            SUGAR.len(),
            corpus.len()
        ))
    } else {
        Err(failures.join("; "))
    }
}

#[test]
fn acceptance() {
    let corpus = corpus();
    let criteria: Vec<Criterion> = vec![
        ("worked example typing", Box::new(|| c1_typing(&corpus))),
        ("worked example evaluation", Box::new(|| c2_worked_run(&corpus))),
        ("type preservation", Box::new(|| c3_preservation(&corpus))),
        ("progress", Box::new(|| c4_progress(&corpus))),
        ("duality involution", Box::new(c5_duality)),
        ("general axiom via eta", Box::new(c6_eta)),
        ("chop elimination", Box::new(|| c7_chop_elimination(&corpus))),
        ("translation typing", Box::new(|| c8_translation_typing(&corpus))),
        ("translation completeness", Box::new(|| c9_completeness(&corpus))),
        ("context-splitting oracle", Box::new(|| c10_oracle(&corpus))),
        ("multiparty", Box::new(|| c11_multiparty(&corpus))),
        ("desugaring and round trip", Box::new(|| c12_desugaring(&corpus))),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed.push(i + 1);
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{:.2?}]", i + 1, start.elapsed());
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
