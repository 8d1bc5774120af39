use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::syntax::{parse_concept, parse_ontology, parse_query};
use crate::testutil::arb_concept;

fn concept(text: &str) -> Concept {
    parse_concept(text).unwrap()
}

fn dialect(text: &str) -> Dialect {
    parse_ontology(text).unwrap().dialect()
}

#[test]
fn dialects_are_the_most_specific_fit() {
    assert_eq!(dialect(""), Dialect::Eli);
    assert_eq!(dialect("A sub exists r-.B"), Dialect::Eli);
    assert_eq!(dialect("A and B sub bot"), Dialect::EliBot);
    assert_eq!(dialect("A sub forall r.B"), Dialect::Alc);
    assert_eq!(dialect("A sub B or C"), Dialect::EliuUnionBot);
    assert_eq!(dialect("A sub not B"), Dialect::Alc);
    assert_eq!(dialect("A sub not exists r-.B"), Dialect::Alci);
    assert_eq!(dialect("A sub exists u.B"), Dialect::EliuBot);
}

#[test]
fn bottom_inside_a_horn_concept_is_not_horn() {
    assert_eq!(dialect("A sub exists r.bot"), Dialect::EliuUnionBot);
}

#[test]
fn nnf_pushes_negation_to_names() {
    let c = concept("not (A and exists r.(B or not C))");
    assert_eq!(c.to_nnf(), concept("not A or forall r.(not B and C)"));
    assert_eq!(concept("not top").to_nnf(), Concept::Bot);
}

#[test]
fn internalization_drops_trivial_sides() {
    assert_eq!(Ci::new(Concept::Top, concept("A")).internalize(), concept("A"));
    assert_eq!(Ci::new(concept("A"), Concept::Bot).internalize(), concept("not A"));
}

#[test]
fn role_depth_counts_nesting() {
    let o = parse_ontology("A sub exists r.exists s-.B\nforall r.C sub D").unwrap();
    assert_eq!(o.role_depth(), 2);
    assert_eq!(o.concept_names().len(), 4);
    assert_eq!(o.role_names(), BTreeSet::from([sym("r"), sym("s")]));
}

#[test]
fn query_shapes() {
    let eliq = parse_query("q(x) :- r(x,y), s(z,y), A(z).").unwrap();
    assert!(eliq.disjuncts[0].is_eliq());
    let cyclic = parse_query("q(x) :- r(x,y), r(y,x).").unwrap();
    assert!(!cyclic.disjuncts[0].is_beliq());
    let looped = parse_query("q() :- r(x,x).").unwrap();
    assert!(!looped.disjuncts[0].is_beliq());
    let split = parse_query("q() :- A(x), B(y).").unwrap();
    assert!(!split.disjuncts[0].is_connected());
    assert!(!split.disjuncts[0].is_beliq());
}

#[test]
fn eliq_concept_follows_the_tree() {
    let q = parse_query("q(x) :- r(x,y), s(z,y), A(z).").unwrap();
    let c = q.disjuncts[0].to_concept().unwrap();
    assert_eq!(c, concept("exists r.exists s-.A"));
}

#[test]
fn answer_variables_are_checked() {
    let atoms = BTreeSet::from([Atom::concept("A", "x")]);
    assert!(Cq::new(vec![sym("y")], atoms.clone()).is_err());
    assert!(Cq::new(vec![sym("x"), sym("x")], atoms).is_err());
}

#[test]
fn restriction_keeps_isolated_constants() {
    let d = crate::syntax::parse_database("r(a,b)\nA(b)").unwrap();
    let keep = BTreeSet::from([sym("a")]);
    let r = d.restrict(&keep);
    assert_eq!(r.adom(), keep);
    assert_eq!(r.len(), 1);
    assert!(r.contains(&Atom::concept(TOP_NAME, "a")));
}

#[test]
fn union_drops_redundant_tops() {
    let d = crate::syntax::parse_database("top(a)").unwrap();
    let e = crate::syntax::parse_database("A(a)").unwrap();
    assert_eq!(d.union(&e), e);
}

#[test]
fn frontier_of_a_tgd() {
    let t = crate::syntax::parse_tgds("r(x,y), A(z) -> s(y,w)").unwrap();
    assert_eq!(t[0].frontier(), BTreeSet::from([sym("y")]));
    assert!(t[0].is_frontier_one());
}

#[test]
fn gaifman_graph_ignores_loops() {
    let d = crate::syntax::parse_database("r(a,a)\nr(a,b)\nA(c)").unwrap();
    let g = d.gaifman();
    assert_eq!(g[&sym("a")], BTreeSet::from([sym("b")]));
    assert!(g[&sym("c")].is_empty());
}

fn is_nnf(c: &Concept) -> bool {
    match c {
        Concept::Not(inner) => matches!(**inner, Concept::Name(_)),
        Concept::And(a, b) | Concept::Or(a, b) => is_nnf(a) && is_nnf(b),
        Concept::Exists(_, c) | Concept::Forall(_, c) => is_nnf(c),
        _ => true,
    }
}

proptest! {
    #[test]
    fn nnf_is_normal_and_idempotent(c in arb_concept()) {
        let n = c.to_nnf();
        prop_assert!(is_nnf(&n));
        prop_assert_eq!(n.to_nnf(), n.clone());
        prop_assert_eq!(Concept::not(c).to_nnf(), Concept::not(n).to_nnf());
    }

    #[test]
    fn dialects_are_nested(cs in proptest::collection::vec((arb_concept(), arb_concept()), 1..4)) {
        let o = Ontology::new(cs.into_iter().map(|(l, r)| Ci::new(l, r)).collect());
        let d = o.dialect();
        // Dropping a CI never makes the ontology less specific.
        let smaller = Ontology::new(o.cis[1..].to_vec());
        prop_assert!(smaller.dialect() <= d);
    }
}
