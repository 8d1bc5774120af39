//! Shared fixtures for unit tests.

use proptest::prelude::*;

use crate::kernel::{sym, Concept, Database, Omq, Role, Sym};
use crate::syntax::{parse_database, parse_ontology, parse_query};

pub fn omq(ontology: &str, query: &str) -> Omq {
    Omq::new(parse_ontology(ontology).unwrap(), parse_query(query).unwrap())
}

pub fn db(text: &str) -> Database {
    parse_database(text).unwrap()
}

pub fn tuple(names: &[&str]) -> Vec<Sym> {
    names.iter().map(|n| sym(n)).collect()
}

pub const COLORING: &str = "top sub R or G or B
R and exists e.R sub D
G and exists e.G sub D
B and exists e.B sub D";

pub const K4: &str = "e(a,b)\ne(a,c)\ne(a,d)\ne(b,c)\ne(b,d)\ne(c,d)";


pub const FIRST_ONTOLOGY: &str = "P and exists r.P sub A\nnot P and exists r.(not P) sub A";

fn name() -> impl Strategy<Value = Concept> {
    prop_oneof![
        Just(Concept::Top),
        Just(Concept::Bot),
        Just(Concept::name("A")),
        Just(Concept::name("B")),
    ]
}

fn role() -> impl Strategy<Value = Role> {
    prop_oneof![
        Just(Role::named("r")),
        Just(Role::named("r").inv()),
        Just(Role::Universal),
    ]
}

/// Random concepts over `A`, `B` and the role `r`, with inverses and `u`.
pub fn arb_concept() -> impl Strategy<Value = Concept> {
    name().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Concept::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::or(a, b)),
            (role(), inner.clone()).prop_map(|(r, c)| Concept::exists(r, c)),
            (role(), inner).prop_map(|(r, c)| Concept::forall(r, c)),
        ]
    })
}
