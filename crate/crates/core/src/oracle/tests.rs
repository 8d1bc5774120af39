use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::kernel::sym;
use crate::querytools::entails;
use crate::strengthen::eli_certain;
use crate::syntax::{parse_ontology, parse_tgds};
use crate::testutil::*;
use crate::typesat::certain_beliq;

fn chase_tgds(text: &str, d: &Database, depth: usize) -> ChaseTrace {
    let tgds = parse_tgds(text).unwrap();
    chase_bounded(&Ctx::default(), ChaseRules::Tgds(&tgds), d, depth).unwrap()
}

#[test]
fn one_existential_step() {
    let t = chase_tgds("A(x) -> r(x,y), B(y)", &db("A(a)"), 1);
    assert_eq!(t.db.len(), 3);
    assert_eq!(t.steps.len(), 1);
    let next = t.db.role_facts().next().unwrap();
    assert_eq!(next.1, &sym("a"));
    assert_ne!(next.2, &sym("a"));
}

#[test]
fn loops_are_copied_without_new_elements() {
    let t = chase_tgds("r(x,x) -> s(x,x)", &db("r(a,a)\nr(a,b)"), 0);
    assert!(t.db.contains(&Atom::role("s", "a", "a")));
    assert_eq!(t.db.len(), 3);
}

#[test]
fn no_rules_no_change() {
    let d = db("A(a)\nr(a,b)");
    let t = chase_bounded(&Ctx::default(), ChaseRules::Tgds(&[]), &d, 5).unwrap();
    assert_eq!(t.db, d);
    assert!(t.steps.is_empty());
}

#[test]
fn depth_caps_infinite_chains() {
    let t = chase_tgds("A(x) -> r(x,y), A(y)", &db("A(a)"), 3);
    assert_eq!(t.db.role_facts().count(), 3);
}

#[test]
fn denial_marks_inconsistency() {
    let o = parse_ontology("A and B sub bot\nC sub B").unwrap();
    let t = chase_bounded(&Ctx::default(), ChaseRules::Ontology(&o), &db("A(a)\nC(a)"), 1).unwrap();
    assert!(t.inconsistent);
}

#[test]
fn eli_rules_are_tree_shaped() {
    let o = parse_ontology("exists r-.A sub exists s.(B and exists r.C)").unwrap();
    let rules = eli_rules(&o).unwrap();
    assert_eq!(rules.len(), 1);
    assert!(rules[0].is_frontier_one());
    assert_eq!(rules[0].head.as_ref().unwrap().len(), 4);
}

#[test]
fn fact_guard_trips() {
    let ctx = Ctx::new(crate::Limits {
        max_facts: 10,
        ..crate::Limits::default()
    });
    let tgds = parse_tgds("A(x) -> r(x,y), A(y)").unwrap();
    let err = chase_bounded(&ctx, ChaseRules::Tgds(&tgds), &db("A(a)"), 100).unwrap_err();
    assert!(err.is_guard());
}

#[test]
fn tree_prefix_finds_the_disjunctive_answer() {
    let q = omq("A sub B or forall r.B", "q() :- B(x).");
    let d = db("A(a)\nr(a,b)");
    let none = BTreeSet::new();
    let got = prefix_certain(&Ctx::default(), &q.ontology, &d, &none, PrefixMode::Tree, 2, &q.query.disjuncts[0], &[]).unwrap();
    assert!(got);
}

#[test]
fn small_bags_miss_the_clique_conflict() {
    let q = omq(COLORING, "q() :- D(x).");
    let none = BTreeSet::new();
    let mode = PrefixMode::Lk { l: 1, k: 2 };
    let got = prefix_certain(&Ctx::default(), &q.ontology, &db(K4), &none, mode, 2, &q.query.disjuncts[0], &[]).unwrap();
    assert!(!got);
}

#[test]
fn full_anchor_set_is_the_database() {
    let q = omq(FIRST_ONTOLOGY, "q(x) :- A(x).");
    let d = db("r(a,b)\nr(b,a)\nP(a)");
    let all = d.adom();
    for c in ["a", "b"] {
        let t = tuple(&[c]);
        let want = certain_beliq(&d, &q.ontology, &q.query.disjuncts[0], &t).unwrap();
        let got = prefix_certain(&Ctx::default(), &q.ontology, &d, &all, PrefixMode::Tree, 0, &q.query.disjuncts[0], &t).unwrap();
        assert_eq!(got, want, "at {c}");
    }
}

#[test]
fn generation_is_deterministic() {
    let spec = InstanceSpec { seed: 1, max_cis: 2, max_constants: 4, ..InstanceSpec::default() };
    let (q1, d1, a1) = gen_instance(&spec);
    let (q2, d2, a2) = gen_instance(&spec);
    assert_eq!(format!("{q1:?}"), format!("{q2:?}"));
    assert_eq!(d1, d2);
    assert_eq!(a1, a2);
    assert!(q1.ontology.cis.len() <= 2);
    assert!(d1.adom().len() <= 4);
    assert!(q1.query.as_beliq().is_some());
}

#[test]
fn seeds_give_distinct_instances() {
    let distinct: BTreeSet<String> = (0..200)
        .map(|seed| {
            let (q, d, a) = gen_instance(&InstanceSpec { seed, ..InstanceSpec::default() });
            format!("{q:?}|{d:?}|{a:?}")
        })
        .collect();
    assert!(distinct.len() >= 195, "only {} distinct", distinct.len());
}

#[test]
fn generated_instances_respect_the_dialect_and_shape() {
    for seed in 0..50 {
        let spec = InstanceSpec {
            seed,
            dialect: Dialect::EliBot,
            db_shape: DbShape::Tree,
            shape: QueryShape::Ucq,
            ..InstanceSpec::default()
        };
        let (q, d, a) = gen_instance(&spec);
        assert!(q.ontology.dialect() <= Dialect::EliBot, "{:?}", q.ontology);
        assert_eq!(d.role_facts().count() + 1, d.adom().len());
        assert_eq!(a.len(), q.arity());
        assert!(d.signature().is_subset(&q.sigma));
    }
}

/// Certain answers of an ELI⊥ OMQ read off a deep oblivious chase.
fn chase_answer(o: &Ontology, d: &Database, q: &Ucq, a: &[Sym], depth: usize) -> bool {
    let t = chase_bounded(&Ctx::default(), ChaseRules::Ontology(o), d, depth).unwrap();
    t.inconsistent || q.disjuncts.iter().any(|p| entails(&t.db, p, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eli_certain_agrees_with_the_deep_chase(seed in 0u64..1_000_000) {
        let spec = InstanceSpec {
            seed,
            dialect: Dialect::EliBot,
            max_cis: 3,
            max_constants: 4,
            max_facts: 5,
            shape: QueryShape::Cq,
            ..InstanceSpec::default()
        };
        let (q, d, a) = gen_instance(&spec);
        let depth = q.query.disjuncts.iter().map(|p| p.vars().len()).max().unwrap_or(0)
            + q.ontology.role_depth() + 3;
        let want = chase_answer(&q.ontology, &d, &q.query, &a, depth);
        let got = eli_certain(&Ctx::default(), &q.ontology, &d, &q.query, &a).unwrap();
        prop_assert_eq!(got, want, "{:?} {:?} {:?} {:?}", q.ontology, d, q.query, a);
    }

    #[test]
    fn chase_is_monotone_in_depth(seed in 0u64..1_000_000) {
        let spec = InstanceSpec { seed, dialect: Dialect::Eli, max_cis: 3, ..InstanceSpec::default() };
        let (q, d, _) = gen_instance(&spec);
        let ctx = Ctx::default();
        let lo = chase_bounded(&ctx, ChaseRules::Ontology(&q.ontology), &d, 1).unwrap();
        let hi = chase_bounded(&ctx, ChaseRules::Ontology(&q.ontology), &d, 2).unwrap();
        prop_assert!(d.facts().is_subset(lo.db.facts()));
        prop_assert!(lo.db.len() <= hi.db.len());
        // Fresh names follow rule order, so the shallow chase is a prefix up to renaming;
        // compare through query answers over the original constants instead.
        for p in &q.query.disjuncts {
            let small = eval_cq(&lo.db, p);
            let big = eval_cq(&hi.db, p);
            prop_assert!(small.iter().filter(|t| t.iter().all(|c| d.adom().contains(c))).all(|t| big.contains(t)));
        }
    }
}
