mod common;

use std::sync::OnceLock;

use chop::check::{typecheck_with, CheckOptions};
use chop::eval::{run, RunOptions, Status};
use chop::fresh::Fresh;
use chop::subst::{alpha_eq, canonical};
use chop::syntax::{parse_process, parse_type, print_process, print_type, Decl};
use chop::translate::translate_type;
use chop::types::{canonical_type, dual, eta_expand_full, type_alpha_eq};
use chop::{ChannelCtx, ProcEnv, Process, Type};
use common::{arb_type, closed_decls, corpus, Entry};
use proptest::prelude::*;

fn closed() -> &'static [(String, Decl)] {
    static CORPUS: OnceLock<Vec<(String, Decl)>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let c: Vec<Entry> = corpus();
        closed_decls(&c).into_iter().map(|(n, d)| (n, d.clone())).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn duality_is_an_involution(a in arb_type(6)) {
        prop_assert_eq!(dual(&dual(&a)), a);
    }

    #[test]
    fn duality_commutes_with_translation(a in arb_type(5)) {
        prop_assert_eq!(translate_type(&dual(&a)), dual(&translate_type(&a)));
    }

    #[test]
    fn translated_types_are_first_order(a in arb_type(5)) {
        prop_assert!(!translate_type(&a).mentions_higher_order());
    }

    #[test]
    fn types_round_trip_through_the_printer(a in arb_type(5)) {
        prop_assert_eq!(parse_type(&print_type(&a)).unwrap(), a);
    }

    #[test]
    fn renaming_binders_preserves_alpha_equivalence(a in arb_type(5)) {
        let b = Type::exists("Y", chop::types::subst_type_var(&a, &Type::var("Y"), "X"));
        prop_assert!(type_alpha_eq(&Type::exists("X", a.clone()), &b));
        prop_assert!(type_alpha_eq(&canonical_type(&a), &a));
    }

    #[test]
    fn eta_expansion_is_admissible(a in arb_type(4)) {
        let mut fresh = Fresh::avoiding(0, ["x", "y"]);
        let p = eta_expand_full("x", "y", &a, &mut fresh);
        let mut links = Vec::new();
        p.visit(&mut |q| if let Process::Link(_, _, t) = q { links.push(t.clone()) });
        prop_assert!(links.iter().all(Type::is_atomic), "{}", p);
        let gamma = ChannelCtx::from([("x".into(), dual(&a)), ("y".into(), a.clone())]);
        let opts = CheckOptions { atomic_axioms: true, ..CheckOptions::default() };
        prop_assert!(typecheck_with(&ProcEnv::new(), &p, &gamma, opts).is_ok(), "{}", p);
    }

    #[test]
    fn preservation_for_any_name_seed(i in 0usize..1000, seed in 0u64..1_000) {
        let (name, d) = &closed()[i % closed().len()];
        let t = run(&d.body, &RunOptions { seed, ..RunOptions::default() }).unwrap();
        for (tag, p) in &t.steps {
            prop_assert!(
                typecheck_with(&d.theta, p, &d.gamma, CheckOptions::default()).is_ok(),
                "{} after {}: {}", name, tag, p
            );
        }
    }

    #[test]
    fn deep_and_shallow_runs_agree_on_normal_forms(i in 0usize..1000) {
        let (name, d) = &closed()[i % closed().len()];
        let shallow = run(&d.body, &RunOptions::default()).unwrap();
        let deep = run(&d.body, &RunOptions { deep: true, ..RunOptions::default() }).unwrap();
        // Deep runs get stuck under binders that hold bound process variables.
        prop_assume!(deep.status == Status::NormalForm);
        prop_assert_eq!(shallow.status, Status::NormalForm);
        let fully = run(shallow.last(), &RunOptions { deep: true, ..RunOptions::default() }).unwrap();
        prop_assert!(chop::translate::cp_equiv(fully.last(), deep.last()), "{}", name);
    }

    #[test]
    fn canonical_names_preserve_alpha_equivalence(i in 0usize..1000, seed in 0u64..1_000) {
        let (_, d) = &closed()[i % closed().len()];
        let t = run(&d.body, &RunOptions { seed, ..RunOptions::default() }).unwrap();
        for p in t.steps.iter().map(|(_, p)| p).chain([&t.initial]) {
            let c = canonical(p);
            prop_assert!(alpha_eq(p, &c));
            prop_assert!(alpha_eq(&parse_process(&print_process(p)).unwrap(), p));
        }
    }
}
