use super::*;
use crate::kernel::{sym, Concept};
use crate::syntax::{parse_concept, parse_database, parse_ontology, parse_query};

const COLORING: &str = "top sub R or G or B
R and exists e.R sub D
G and exists e.G sub D
B and exists e.B sub D";

const K4: &str = "e(a,b)\ne(a,c)\ne(a,d)\ne(b,c)\ne(b,d)\ne(c,d)";
const TRIANGLE: &str = "e(a,b)\ne(b,c)\ne(c,a)";

#[test]
fn single_name_gives_two_types() {
    let sys = build_types(&parse_ontology("").unwrap(), Some(&Concept::name("A"))).unwrap();
    assert_eq!(sys.tables.len(), 1);
    assert_eq!(sys.tables[0].types.len(), 2);
}

#[test]
fn unsatisfiable_name_is_absent() {
    let sys = build_types(&parse_ontology("A sub bot").unwrap(), Some(&Concept::name("A"))).unwrap();
    let a = sys.closure.name_atom(&sym("A")).unwrap();
    assert!(sys.tables.iter().all(|t| t.types.iter().all(|ty| ty >> a & 1 == 0)));
}

#[test]
fn coloring_types_carry_a_color() {
    let q = parse_concept("exists u.D").unwrap();
    let sys = build_types(&parse_ontology(COLORING).unwrap(), Some(&q)).unwrap();
    let bits: Vec<u32> = ["R", "G", "B"]
        .iter()
        .map(|n| sys.closure.name_atom(&sym(n)).unwrap())
        .collect();
    assert_eq!(sys.tables.len(), 2, "both guesses for the universal atom survive");
    for table in &sys.tables {
        for t in &table.types {
            assert!(bits.iter().any(|b| t >> b & 1 == 1));
        }
    }
}

#[test]
fn kb_sat_examples() {
    let d = parse_database("A(a)").unwrap();
    assert!(!kb_sat(&d, &parse_ontology("A sub bot").unwrap(), &[]).unwrap());
    assert!(kb_sat(&d, &parse_ontology("A sub exists r.B").unwrap(), &[]).unwrap());
    // A witness forced into an unsatisfiable concept kills the type.
    let o = parse_ontology("A sub exists r.B\nB sub bot").unwrap();
    assert!(!kb_sat(&d, &o, &[]).unwrap());
    // Globals apply to every element, anonymous ones included.
    let o = parse_ontology("A sub exists r.B").unwrap();
    assert!(!kb_sat(&d, &o, &[parse_concept("not B").unwrap()]).unwrap());
}

#[test]
fn coloring_certain_answers() {
    let o = parse_ontology(COLORING).unwrap();
    let q = parse_query("q() :- D(x).").unwrap();
    let k4 = parse_database(K4).unwrap();
    let tri = parse_database(TRIANGLE).unwrap();
    assert!(certain_beliq(&k4, &o, &q.disjuncts[0], &[]).unwrap());
    assert!(!certain_beliq(&tri, &o, &q.disjuncts[0], &[]).unwrap());
}

#[test]
fn eliq_certain_answers() {
    let q = parse_query("q(x) :- A(x).").unwrap();
    let d = parse_database("A(a)\nr(a,b)").unwrap();
    let empty = parse_ontology("").unwrap();
    assert!(certain_beliq(&d, &empty, &q.disjuncts[0], &[sym("a")]).unwrap());
    assert!(!certain_beliq(&d, &empty, &q.disjuncts[0], &[sym("b")]).unwrap());
    let o = parse_ontology("exists r-.A sub A").unwrap();
    assert!(certain_beliq(&d, &o, &q.disjuncts[0], &[sym("b")]).unwrap());
    // Constants outside the database are answers only when forced.
    assert!(!certain_beliq(&d, &o, &q.disjuncts[0], &[sym("z")]).unwrap());
}

#[test]
fn disjunction_case_split() {
    // Either a is B or its r-successor b is B.
    let o = parse_ontology("A sub B or forall r.B").unwrap();
    let d = parse_database("A(a)\nr(a,b)").unwrap();
    let q = parse_query("q() :- B(x).").unwrap();
    assert!(certain_beliq(&d, &o, &q.disjuncts[0], &[]).unwrap());
    let q = parse_query("q(x) :- B(x).").unwrap();
    assert!(!certain_beliq(&d, &o, &q.disjuncts[0], &[sym("a")]).unwrap());
    assert!(!certain_beliq(&d, &o, &q.disjuncts[0], &[sym("b")]).unwrap());
}

#[test]
fn non_beliq_rejected() {
    let q = parse_query("q() :- r(x,y), r(y,x).").unwrap();
    let d = parse_database("r(a,a)").unwrap();
    assert!(certain_beliq(&d, &parse_ontology("").unwrap(), &q.disjuncts[0], &[]).is_err());
}

#[test]
fn closure_guard_trips() {
    let cis: Vec<String> = (0..30).map(|i| format!("A{i} sub exists r.A{}", i + 1)).collect();
    let o = parse_ontology(&cis.join("\n")).unwrap();
    assert!(kb_sat(&parse_database("A0(a)").unwrap(), &o, &[]).unwrap_err().is_guard());
}

#[test]
fn no_universal_atoms_means_one_guess() {
    let o = parse_ontology("A sub exists r.B\nB and C sub bot").unwrap();
    let sys = build_types(&o, None).unwrap();
    assert_eq!(sys.tables.len(), 1);
}
