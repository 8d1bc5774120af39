use std::collections::BTreeSet;

use super::*;
use crate::kernel::{sym, Sym};
use crate::syntax::{parse_database, parse_query};

fn tuples(rows: &[&[&str]]) -> BTreeSet<Vec<Sym>> {
    rows.iter().map(|r| r.iter().map(|s| sym(s)).collect()).collect()
}

#[test]
fn eval_follows_homomorphisms() {
    let d = parse_database("r(a,b)\nr(b,c)\nA(c)").unwrap();
    let q = parse_query("q(x) :- r(x,y), r(y,z), A(z).").unwrap();
    assert_eq!(eval_cq(&d, &q.disjuncts[0]), tuples(&[&["a"]]));
}

#[test]
fn contraction_count_is_bell_number() {
    let q = parse_query("q() :- r(x,y), r(y,z), r(z,w).").unwrap();
    assert_eq!(contractions(&q.disjuncts[0]).len(), 15);
    let q = parse_query("q(x,y) :- r(x,y), r(y,z).").unwrap();
    // z may join x, y, or stay alone; x and y never merge.
    assert_eq!(contractions(&q.disjuncts[0]).len(), 3);
}

#[test]
fn canonical_form_identifies_isomorphic_queries() {
    let a = parse_query("q(x) :- r(x,y), r(y,z), A(z).").unwrap();
    let b = parse_query("q(u) :- A(w), r(v,w), r(u,v).").unwrap();
    assert_eq!(canonical_cq(&a.disjuncts[0]), canonical_cq(&b.disjuncts[0]));
    let c = parse_query("q(u) :- A(u), r(v,w), r(u,v).").unwrap();
    assert_ne!(canonical_cq(&a.disjuncts[0]), canonical_cq(&c.disjuncts[0]));
}

#[test]
fn treewidth_of_cycles_and_cliques() {
    let tri = parse_query("q() :- r(x,y), r(y,z), r(z,x).").unwrap();
    let atoms = &tri.disjuncts[0].atoms;
    assert!(!has_treewidth(atoms, 1, 2, 16).unwrap());
    assert!(has_treewidth(atoms, 2, 3, 16).unwrap());
    let sq = parse_query("q() :- r(x,y), r(y,z), r(z,w), r(w,x).").unwrap();
    let atoms = &sq.disjuncts[0].atoms;
    assert!(!has_treewidth(atoms, 1, 3, 16).unwrap());
    assert!(has_treewidth(atoms, 2, 3, 16).unwrap());
    let (elems, edges) = gaifman_of(atoms);
    let td = find_tree_decomposition(&sq.disjuncts[0], 2, 3, 16).unwrap().unwrap();
    assert!(td.is_valid_for(&elems, &edges));
}

#[test]
fn treewidth_guard_trips() {
    let mut text = String::from("q() :- ");
    let atoms: Vec<String> = (0..17).map(|i| format!("r(x{i},x{})", i + 1)).collect();
    text.push_str(&atoms.join(", "));
    text.push('.');
    let q = parse_query(&text).unwrap();
    assert!(find_tree_decomposition(&q.disjuncts[0], 1, 2, 16).unwrap_err().is_guard());
}

#[test]
fn trees_closure_of_triangle() {
    let q = parse_query("q() :- r(x,y), r(y,z), r(z,x).").unwrap();
    let names = BTreeSet::from([sym("A")]);
    let trees = trees_closure(&q.disjuncts[0], None, &names, 16).unwrap();
    // Every member is a bELIQ or an ELIQ with one answer variable.
    for t in &trees {
        assert!(t.answer.len() <= 1);
        assert!(t.is_tree_on(&t.vars()) || t.atoms.len() == 1);
    }
    // The single self-loop arises by merging everything.
    assert!(trees.iter().any(|t| t.is_boolean() && t.atoms.len() == 1));
    // The atomic query for A is included.
    assert!(trees.iter().any(|t| t.answer.len() == 1 && t.atoms.len() == 1 && t.signature().contains(&sym("A"))));
}

#[test]
fn qc_keeps_tree_shaped_quantified_parts() {
    let q = parse_query("q(x) :- r(x,y), r(y,z), r(z,x).").unwrap();
    let qc = contraction_closure_qc(&q).unwrap();
    assert!(!qc.disjuncts.is_empty());
    for c in &qc.disjuncts {
        assert!(c.is_tree_on(&c.quantified_vars()));
    }
}

#[test]
fn cl_marks_full_contractions() {
    let q = parse_query("q() :- r(x,y), A(y).").unwrap();
    let cl = cl_contractions(&q, 1, 2, 16).unwrap();
    let full: Vec<_> = cl.iter().filter(|p| p.full_of.contains(&0)).collect();
    // r(x,y),A(y) and r(x,x),A(x), each with every answer-variable choice.
    assert_eq!(full.len(), 4 + 2);
}
