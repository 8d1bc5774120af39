//! Approximate answering of ontology-mediated queries over ALC and ALCI
//! ontologies: sound approximations from below (ontology relaxing and
//! database relaxing) and complete approximations from above (ontology
//! strengthening and database strengthening), plus exact reasoning for
//! tree-shaped queries used to cross-check them.

pub mod ctx;
pub mod error;
pub mod hornsat;
pub mod kernel;
pub mod oracle;
pub mod querytools;
pub mod relax_eliu;
pub mod relax_btw;
pub mod relax_tgd;
pub mod relax_tree;
pub mod strengthen;
pub mod typesat;
pub mod unraveling;

#[cfg(test)]
mod testutil;
pub mod syntax;

pub use ctx::{Ctx, Limits};
pub use error::{Error, Result, SourceSpan};
