//! Helpers shared by the integration tests: corpus loading and random types.

#![allow(dead_code)]

use std::path::PathBuf;

use chop::syntax::{desugar, parse, Decl, Program};
use chop::{ParamCtx, Process, Type};
use proptest::prelude::*;

pub struct Entry {
    pub name: String,
    pub source: String,
    pub surface: Program,
    pub core: Program,
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every `.chop` file in the corpus, parsed and desugared, sorted by name.
pub fn corpus() -> Vec<Entry> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "chop"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let name = f.file_stem().unwrap().to_string_lossy().into_owned();
            let source = std::fs::read_to_string(&f).unwrap();
            let surface = parse(&source).unwrap_or_else(|e| panic!("{name}: {e}"));
            let core = desugar(&surface).unwrap_or_else(|e| panic!("{name}: {e}"));
            Entry { name, source, surface, core }
        })
        .collect()
}

pub fn is_multiparty(p: &Process) -> bool {
    let mut found = false;
    p.visit(&mut |q| found |= matches!(q, Process::MCut(..)));
    found
}

/// Declarations with no process variables, tagged with their file name.
pub fn closed_decls(corpus: &[Entry]) -> Vec<(String, &Decl)> {
    corpus
        .iter()
        .flat_map(|e| {
            e.core.decls.iter().filter(|d| d.theta.is_empty()).map(move |d| (format!("{}::{}", e.name, d.name), d))
        })
        .collect()
}

fn ctx(entries: Vec<(&str, Type)>) -> ParamCtx {
    ParamCtx::new(entries.into_iter().map(|(l, t)| (l.to_string(), t)).collect()).unwrap()
}

/// Types of depth at most `depth` over the single atom `X`, every connective
/// included.
pub fn arb_type(depth: u32) -> BoxedStrategy<Type> {
    let leaf = prop_oneof![
        Just(Type::var("X")),
        Just(Type::DualVar("X".into())),
        Just(Type::One),
        Just(Type::Bot),
        Just(Type::Zero),
        Just(Type::Top),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        let pair = (inner.clone(), inner.clone());
        prop_oneof![
            pair.clone().prop_map(|(a, b)| Type::tensor(a, b)),
            pair.clone().prop_map(|(a, b)| Type::par(a, b)),
            pair.clone().prop_map(|(a, b)| Type::plus(a, b)),
            pair.clone().prop_map(|(a, b)| Type::with(a, b)),
            inner.clone().prop_map(Type::why_not),
            inner.clone().prop_map(Type::of_course),
            inner.clone().prop_map(|a| Type::exists("X", a)),
            inner.clone().prop_map(|a| Type::forall("X", a)),
            (proptest::option::of(inner.clone()), proptest::option::of(inner.clone())).prop_map(|(a, b)| {
                Type::Provide(ctx(a.map(|t| ("l", t)).into_iter().chain(b.map(|t| ("m", t))).collect()))
            }),
            inner.prop_map(|a| Type::Assume(ctx(vec![("l", a)]))),
        ]
    })
    .boxed()
}

/// Every type of depth at most `depth`, with binary connectives applied only
/// when one side is a leaf so the count stays small.
pub fn small_types(depth: usize) -> Vec<Type> {
    let leaves = vec![Type::var("X"), Type::DualVar("X".into()), Type::One, Type::Bot, Type::Zero, Type::Top];
    let mut all = leaves.clone();
    let mut layer = leaves.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for a in &layer {
            next.push(Type::why_not(a.clone()));
            next.push(Type::of_course(a.clone()));
            next.push(Type::exists("X", a.clone()));
            next.push(Type::forall("X", a.clone()));
            next.push(Type::Provide(ctx(vec![("l", a.clone())])));
            next.push(Type::Assume(ctx(vec![("l", a.clone())])));
            for l in &leaves {
                next.push(Type::tensor(a.clone(), l.clone()));
                next.push(Type::par(l.clone(), a.clone()));
                next.push(Type::plus(a.clone(), l.clone()));
                next.push(Type::with(l.clone(), a.clone()));
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}
