//! Exact reasoning by type elimination: types over the closure of an
//! ontology and query, knowledge-base satisfiability, and certain answers
//! for bELIQs.

mod closure;
mod sat;
mod types;

pub use closure::{ClAtom, Closure, Core, Edge, MAX_ATOMS};
pub use sat::{
    certain_beliq, certain_beliq_limited, entailed_names, kb_sat, kb_sat_limited, sat_with,
    Network,
};
pub use types::{keys_compat, TypeSystem, TypeTable};

use crate::error::Result;
use crate::kernel::{Concept, Ontology};
use crate::Limits;

/// Types for `o`, with the query concept `q` (if any) in the closure.
pub fn build_types(o: &Ontology, q: Option<&Concept>) -> Result<TypeSystem> {
    let extra: Vec<Concept> = q.into_iter().cloned().collect();
    Ok(TypeSystem::for_ontology(o, &extra, &[], Limits::default().max_closure)?.0)
}

#[cfg(test)]
mod tests;
