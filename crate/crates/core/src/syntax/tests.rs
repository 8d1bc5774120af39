use proptest::prelude::*;

use super::*;
use crate::kernel::{sym, Atom, Concept, Dialect, Role};
use crate::testutil::arb_concept;

fn parse_err(r: Result<impl std::fmt::Debug>) -> (usize, usize, String) {
    match r {
        Err(Error::Parse { span, message }) => (span.line, span.column, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn precedence_and_binds_tighter_than_or() {
    let c = parse_concept("A or B and C").unwrap();
    assert_eq!(c, Concept::or(Concept::name("A"), Concept::and(Concept::name("B"), Concept::name("C"))));
}

#[test]
fn implication_is_right_associative_and_loosest() {
    let c = parse_concept("A imp B imp C or D").unwrap();
    let want = Concept::imp(
        Concept::name("A"),
        Concept::imp(Concept::name("B"), Concept::or(Concept::name("C"), Concept::name("D"))),
    );
    assert_eq!(c, want);
}

#[test]
fn quantifiers_take_a_prefix_concept() {
    let c = parse_concept("exists r-.A and B").unwrap();
    assert_eq!(c, Concept::and(Concept::exists(Role::named("r").inv(), Concept::name("A")), Concept::name("B")));
    let u = parse_concept("forall u.not A").unwrap();
    assert_eq!(u, Concept::forall(Role::Universal, Concept::not(Concept::name("A"))));
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let o = parse_ontology("# colours\n\nA sub B   # trailing\n\n").unwrap();
    assert_eq!(o.cis.len(), 1);
    assert_eq!(o.dialect(), Dialect::Eli);
}

#[test]
fn database_facts_may_end_with_a_dot() {
    let d = parse_database("r(a,b).\nA(a)\ntop(c)").unwrap();
    assert_eq!(d.len(), 3);
    assert!(d.contains(&Atom::role("r", "a", "b")));
    assert!(d.adom().contains(&sym("c")));
}

#[test]
fn rules_may_span_lines() {
    let q = parse_query("q(x) :-\n  r(x,y),\n  A(y).\nq(x) :- B(x).").unwrap();
    assert_eq!(q.disjuncts.len(), 2);
    assert_eq!(q.arity(), 1);
}

#[test]
fn tgds_and_denials() {
    let t = parse_tgds("A(x), r(x,y) -> B(y)\nA(x), B(x) -> false").unwrap();
    assert_eq!(t.len(), 2);
    assert!(t[1].head.is_none());
}

#[test]
fn errors_point_at_the_offending_token() {
    let (line, col, msg) = parse_err(parse_ontology("A sub B\nA sub or"));
    assert_eq!((line, col), (2, 7));
    assert!(msg.contains("expected a concept"), "{msg}");
    let (line, col, _) = parse_err(parse_query("q(x) :- A(x)"));
    assert_eq!((line, col), (1, 13));
    let (_, _, msg) = parse_err(parse_database("A(a, b, c)"));
    assert!(msg.contains("unary or binary"), "{msg}");
}

#[test]
fn arity_conflicts_name_the_first_use() {
    let (line, _, msg) = parse_err(parse_ontology("A sub exists r.B\nr sub A"));
    assert_eq!(line, 2);
    assert!(msg.contains("at 1:14"), "{msg}");
}

#[test]
fn universal_role_only_after_a_quantifier() {
    let (_, _, msg) = parse_err(parse_database("u(a,b)"));
    assert!(msg.contains("universal role"), "{msg}");
}

#[test]
fn head_variables_must_agree() {
    let (line, _, msg) = parse_err(parse_query("q(x) :- A(x).\nq(y) :- B(y)."));
    assert_eq!(line, 2);
    assert!(msg.contains("different head"), "{msg}");
    assert!(parse_query("q(x) :- A(y).").is_err());
    assert!(parse_query("").is_err());
}

#[test]
fn printed_queries_and_tgds_parse_back() {
    let q = parse_query("q(x,z) :- r(x,y), s(y,z), A(y).\nq(x,z) :- r(x,z).").unwrap();
    assert_eq!(parse_query(&print_query(&q)).unwrap(), q);
    let t = parse_tgds("A(x), r(x,y) -> s(y,w), B(w)\nA(x), B(x) -> false").unwrap();
    assert_eq!(parse_tgds(&print_tgds(&t)).unwrap(), t);
    let d = parse_database("r(a,b)\nA(b)\ntop(c)").unwrap();
    assert_eq!(parse_database(&print_database(&d)).unwrap(), d);
}

proptest! {
    #[test]
    fn concepts_round_trip(c in arb_concept()) {
        prop_assert_eq!(parse_concept(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn ontologies_round_trip(cs in proptest::collection::vec((arb_concept(), arb_concept()), 0..4)) {
        let o = Ontology::new(cs.into_iter().map(|(l, r)| Ci::new(l, r)).collect());
        prop_assert_eq!(parse_ontology(&print_ontology(&o)).unwrap(), o);
    }

    #[test]
    fn databases_round_trip(facts in proptest::collection::btree_set((0..3usize, 0..4usize, 0..4usize), 1..8)) {
        let d = Database::from_facts(facts.into_iter().map(|(p, a, b)| {
            let (a, b) = (format!("c{a}"), format!("c{b}"));
            match p {
                0 => Atom::concept("A", &a),
                1 => Atom::role("r", &a, &b),
                _ => Atom::role("s", &b, &a),
            }
        }));
        prop_assert_eq!(parse_database(&print_database(&d)).unwrap(), d);
    }
}
