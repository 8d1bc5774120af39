use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::kernel::sym;
use crate::querytools::{entails, find_tree_decomposition_db};
use crate::testutil::*;
use crate::typesat::certain_beliq;

const CLIQUE3_DB: &str = "r(a1,a2)\nr(a2,a1)\nr(a1,a3)\nr(a3,a1)\nr(a2,a3)\nr(a3,a2)";
const CLIQUE3_Q: &str = "q() :- r(x,y), r(y,x), r(x,z), r(z,x), r(y,z), r(z,y).";

fn none() -> BTreeSet<Sym> {
    BTreeSet::new()
}

/// Independent answer for an empty ontology and S = ∅: some contraction of
/// the query with treewidth (ℓ,k) maps into the database.
fn empty_ontology_oracle(q: &Cq, d: &Database, a: &[Sym], l: usize, k: usize) -> bool {
    contractions(q)
        .into_iter()
        .any(|c| has_treewidth(&c.atoms, l, k, 64).unwrap() && entails(d, &c, a))
}

#[test]
fn loop_survives_in_small_bags() {
    let ctx = Ctx::default();
    let d = db("r(a,a)");
    let unary = omq(FIRST_ONTOLOGY, "q(x) :- A(x).");
    assert!(eliminate_beliq(&ctx, &unary, &d, &none(), &tuple(&["a"]), 1, 2).unwrap());
    let boolean = omq(FIRST_ONTOLOGY, "q() :- A(x).");
    assert!(eliminate_beliq(&ctx, &boolean, &d, &none(), &[], 1, 2).unwrap());
}

#[test]
fn clique_bags_decide_colorability() {
    let ctx = Ctx::default();
    let q = omq(COLORING, "q() :- D(x).");
    let d = db(K4);
    assert!(eliminate_beliq(&ctx, &q, &d, &none(), &[], 1, 4).unwrap());
    assert!(!eliminate_beliq(&ctx, &q, &d, &none(), &[], 1, 2).unwrap());
    assert!(!eliminate_beliq(&ctx, &q, &d, &none(), &[], 2, 3).unwrap());
}

#[test]
fn unary_probe_outside_anchors() {
    let ctx = Ctx::default();
    let q = omq(COLORING, "q(x) :- D(x).");
    let d = db(K4);
    // Every 3-coloring of a 4-clique has a conflict, but not at a fixed vertex.
    assert!(!eliminate_beliq(&ctx, &q, &d, &none(), &tuple(&["a"]), 1, 4).unwrap());
}

#[test]
fn clique_query_needs_a_full_bag() {
    let ctx = Ctx::default();
    let q = omq("", CLIQUE3_Q);
    let d = db(CLIQUE3_DB);
    assert!(!eliminate_ucq(&ctx, &q, &d, &[], 1, 2).unwrap());
    assert!(eliminate_ucq(&ctx, &q, &d, &[], 1, 3).unwrap());
}

#[test]
fn tree_database_is_exact_for_eliqs() {
    let ctx = Ctx::default();
    let q = omq(
        "top sub (forall r.(B1 imp A)) or (forall r.(B2 imp A))",
        "q(x) :- r(x,y), A(y).",
    );
    let d = db("r(a,b1)\nr(a,b2)\nB1(b1)\nB2(b2)\nr(c,b2)");
    for c in ["a", "b1", "b2", "c"] {
        let t = tuple(&[c]);
        let exact = certain_beliq(&d, &q.ontology, &q.query.disjuncts[0], &t).unwrap();
        assert_eq!(eliminate_ucq(&ctx, &q, &d, &t, 1, 2).unwrap(), exact, "at {c}");
    }
}

#[test]
fn answers_with_an_anchored_cycle() {
    let ctx = Ctx::default();
    let q = omq("", "q(x) :- r(x,y), r(y,z), r(z,x).");
    let d = db("r(a,b)\nr(b,c)\nr(c,a)\nr(d,e)");
    // With x anchored the remaining path y,z fits into bags of size two.
    let got = eliminate_ucq_answers(&ctx, &q, &d, 1, 2).unwrap();
    assert_eq!(got, crate::querytools::eval_cq(&d, &q.query.disjuncts[0]));
}

#[test]
fn non_tree_query_over_ontology() {
    let ctx = Ctx::default();
    // Whichever disjunct holds, some A-element on the 2-cycle gets B.
    let q = omq("A sub B or forall r.B", "q() :- A(x), B(x), r(x,y), r(y,x).");
    let d = db("A(a)\nr(a,b)\nr(b,a)\nA(b)");
    assert!(eliminate_ucq(&ctx, &q, &d, &[], 1, 2).unwrap());
    let one = db("A(a)\nr(a,b)\nr(b,a)");
    assert!(!eliminate_ucq(&ctx, &q, &one, &[], 1, 2).unwrap());
}

#[test]
fn unsatisfiable_unraveling_answers_everything() {
    let ctx = Ctx::default();
    let q = omq("A and exists r.A sub bot", "q(x) :- Z(x), r(x,y), r(y,x).");
    let d = db("A(a)\nr(a,a)\nr(a,b)");
    assert!(eliminate_ucq(&ctx, &q, &d, &tuple(&["b"]), 1, 2).unwrap());
}

#[test]
fn bad_widths_are_rejected() {
    let q = omq("", "q() :- r(x,y).");
    let err = eliminate_ucq(&Ctx::default(), &q, &db("r(a,b)"), &[], 2, 2);
    assert!(matches!(err, Err(Error::Invalid(_))));
}

#[test]
fn tree_databases_match_certain_answers_at_width_two() {
    let ctx = Ctx::default();
    let q = omq(FIRST_ONTOLOGY, "q(x) :- A(x).");
    let d = db("r(a,b)\nr(b,c)\nP(a)\nP(b)\nr(c,d)");
    assert!(find_tree_decomposition_db(&d, 1, 2, 64).unwrap().is_some());
    for c in ["a", "b", "c", "d"] {
        let t = tuple(&[c]);
        let exact = certain_beliq(&d, &q.ontology, &q.query.disjuncts[0], &t).unwrap();
        let s: BTreeSet<Sym> = [sym(c)].into();
        assert_eq!(eliminate_beliq(&ctx, &q, &d, &s, &t, 1, 2).unwrap(), exact, "at {c}");
    }
}

fn small_db() -> impl Strategy<Value = Database> {
    let consts = ["a", "b", "c", "d"];
    proptest::collection::btree_set((0..4usize, 0..4usize), 1..7).prop_map(move |edges| {
        let text: Vec<String> = edges
            .into_iter()
            .map(|(i, j)| format!("r({},{})", consts[i], consts[j]))
            .collect();
        db(&text.join("\n"))
    })
}

const QUERIES: [&str; 5] = [
    "q() :- r(x,y), r(y,z), r(z,x).",
    "q() :- r(x,y), r(y,x).",
    "q() :- r(x,y), r(y,z), r(x,z).",
    "q() :- r(x,x).",
    "q() :- r(x,y), r(y,z), r(z,w), r(w,x), r(x,z).",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn empty_ontology_agrees_with_contraction_oracle(d in small_db(), qi in 0..QUERIES.len(), wide in any::<bool>()) {
        let q = omq("", QUERIES[qi]);
        let (l, k) = if wide { (1, 3) } else { (1, 2) };
        let want = empty_ontology_oracle(&q.query.disjuncts[0], &d, &[], l, k);
        let got = eliminate_ucq(&Ctx::default(), &q, &d, &[], l, k).unwrap();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn unary_probe_agrees_with_contraction_oracle(d in small_db(), wide in any::<bool>()) {
        let (l, k) = if wide { (1, 3) } else { (1, 2) };
        let p = crate::syntax::parse_query("q(x) :- r(x,y), r(y,z), r(z,x).").unwrap().disjuncts[0].clone();
        let a = tuple(&["a"]);
        let want = empty_ontology_oracle(&p, &d, &a, l, k);
        let targets: Vec<Cq> = contractions(&p)
            .into_iter()
            .filter(|c| has_treewidth(&c.atoms, l, k, 64).unwrap())
            .collect();
        let pieces = decided_pieces(std::slice::from_ref(&p), l, k, l, 64).unwrap();
        let problem = Problem { pieces, probe: Some(Probe::Pieces(sym("a"), targets)), ..Problem::default() };
        let got = entailed(&Ctx::default(), &Ontology::default(), &d, &none(), l, k, &problem).unwrap();
        prop_assert_eq!(got, want);
    }
}
