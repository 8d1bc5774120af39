//! Domain types: concepts, ontologies, databases, queries and TGDs.

mod concept;
mod data;
mod query;
mod sym;

pub use concept::{classify_dialect, Ci, Concept, Dialect, Ontology, Role};
pub use data::{Atom, Database, Fact};
pub use query::{
    atom_terms, components_of, is_tree, sig_of, Cq, Omq, Signature, Tgd, Ucq,
};
pub use sym::{sym, Sym, TOP_NAME};

#[cfg(test)]
mod tests;
