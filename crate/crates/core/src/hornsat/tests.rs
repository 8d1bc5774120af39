use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::kernel::sym;
use crate::syntax::{parse_database, parse_ontology, parse_query};
use crate::Ctx;

fn formula(n: usize, clauses: &[(&[u32], Option<u32>)]) -> HornFormula {
    HornFormula {
        num_vars: n,
        clauses: clauses
            .iter()
            .map(|(b, h)| Clause {
                body: b.to_vec(),
                head: *h,
            })
            .collect(),
    }
}

#[test]
fn solver_examples() {
    assert_eq!(horn_solve(&formula(1, &[(&[], Some(0)), (&[0], None)])), HornResult::Unsat);
    assert_eq!(
        horn_solve(&formula(2, &[(&[], Some(0)), (&[0], Some(1))])),
        HornResult::Sat(vec![true, true])
    );
}

#[test]
fn dump_format() {
    let f = formula(3, &[(&[], Some(0)), (&[0, 1], Some(2)), (&[2], None)]);
    assert_eq!(f.dump(), ">0\n0-1>2\n2>F\n");
}

/// Brute force over all valuations; returns the least model if satisfiable.
fn truth_table(f: &HornFormula) -> Option<Vec<bool>> {
    let n = f.num_vars;
    let mut least: Option<u32> = None;
    for v in 0u32..(1 << n) {
        let holds = |x: u32| v >> x & 1 == 1;
        let ok = f.clauses.iter().all(|c| {
            !c.body.iter().all(|&b| holds(b)) || c.head.is_some_and(holds)
        });
        if ok {
            least = Some(least.map_or(v, |l| l & v));
        }
    }
    least.map(|l| (0..n).map(|i| l >> i & 1 == 1).collect())
}

fn arb_formula() -> impl Strategy<Value = HornFormula> {
    (1usize..=10).prop_flat_map(|n| {
        let clause = (
            proptest::collection::vec(0..n as u32, 0..4),
            proptest::option::weighted(0.8, 0..n as u32),
        )
            .prop_map(|(body, head)| Clause { body, head });
        proptest::collection::vec(clause, 0..20).prop_map(move |clauses| HornFormula { num_vars: n, clauses })
    })
}

proptest! {
    #[test]
    fn solver_matches_truth_table(f in arb_formula()) {
        let expected = truth_table(&f);
        match horn_solve(&f) {
            HornResult::Unsat => prop_assert!(expected.is_none()),
            HornResult::Sat(m) => prop_assert_eq!(Some(m), expected),
        }
    }
}

#[test]
fn disjunction_forces_boolean_query() {
    let o = parse_ontology("A sub B or forall r.B").unwrap();
    let d = parse_database("A(a)\nr(a,b)").unwrap();
    let q = parse_query("q() :- B(x).").unwrap();
    assert!(unravel_entails(&q.disjuncts, &o, &d, &[], &BTreeSet::new()).unwrap());
}

#[test]
fn self_loop_is_unraveled_unless_kept() {
    let o = parse_ontology("P and exists r.P sub A\nnot P and exists r.(not P) sub A").unwrap();
    let d = parse_database("r(a,a)").unwrap();
    let q = parse_query("q(x) :- A(x).").unwrap();
    let a = [sym("a")];
    assert!(!unravel_entails(&q.disjuncts, &o, &d, &a, &BTreeSet::new()).unwrap());
    assert!(unravel_entails(&q.disjuncts, &o, &d, &a, &BTreeSet::from([sym("a")])).unwrap());
}

#[test]
fn batch_agrees_with_single_targets() {
    let o = parse_ontology("exists r.A sub A\nB sub A or C").unwrap();
    let d = parse_database("r(a,b)\nr(b,c)\nA(c)\nB(d)\nr(d,e)").unwrap();
    let q = parse_query("q(x) :- A(x).").unwrap();
    let c = q.disjuncts[0].to_concept().unwrap();
    let ctx = Ctx::default();
    let batch = entailed_constants(&ctx, &o, &d, &c).unwrap();
    assert_eq!(batch, BTreeSet::from([sym("a"), sym("b"), sym("c")]));
    for x in d.adom() {
        let single = unravel_entails(&q.disjuncts, &o, &d, std::slice::from_ref(&x), &BTreeSet::new()).unwrap();
        assert_eq!(single, batch.contains(&x), "constant {x}");
    }
}

#[test]
fn unsatisfiable_database_entails_everything() {
    let o = parse_ontology("A sub bot").unwrap();
    let d = parse_database("A(a)\nr(a,b)").unwrap();
    let ctx = Ctx::default();
    assert!(unravel_unsat(&ctx, &o, &d, &BTreeSet::new()).unwrap());
    let q = parse_query("q(x) :- Z(x).").unwrap();
    let c = q.disjuncts[0].to_concept().unwrap();
    assert_eq!(entailed_constants(&ctx, &o, &d, &c).unwrap(), d.adom());
}

#[test]
fn s_constants_are_not_copied() {
    // On a 2-cycle the loop-free unraveling loses the cycle, but keeping
    // both constants in S preserves it.
    let o = parse_ontology("P and exists r.P sub A\nnot P and exists r.(not P) sub A\nexists r.A sub A").unwrap();
    let d = parse_database("r(a,a)\nr(a,b)").unwrap();
    let q = parse_query("q() :- A(x).").unwrap();
    assert!(!unravel_entails(&q.disjuncts, &o, &d, &[], &BTreeSet::new()).unwrap());
    assert!(unravel_entails(&q.disjuncts, &o, &d, &[], &BTreeSet::from([sym("a")])).unwrap());
}

#[test]
fn horn_dump_is_written() {
    let dir = std::env::temp_dir().join(format!("omq-dump-{}", std::process::id()));
    let ctx = Ctx::default().with_horn_dump(&dir).unwrap();
    let o = parse_ontology("A sub bot").unwrap();
    let d = parse_database("A(a)").unwrap();
    assert!(unravel_unsat(&ctx, &o, &d, &BTreeSet::new()).unwrap());
    let text = std::fs::read_to_string(&dir).unwrap();
    assert!(text.lines().any(|l| l.ends_with(">F")));
    assert!(ctx.stats.horn_vars() > 0);
    let _ = std::fs::remove_file(&dir);
}
