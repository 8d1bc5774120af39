//! Query evaluation, contractions, closures, and tree decompositions.

mod canon;
mod closure;
mod contraction;
mod glue;
mod hom;
mod treewidth;

pub use canon::{canonical_cq, canonize};
pub use closure::{cl_contractions, contraction_closure_qc, trees_closure, ClPiece};
pub use contraction::{contractions, for_each_partition};
pub use glue::{add_copy, all_tuples, Fresh};
pub use hom::{db_hom, entails, entails_indexed, eval_cq, eval_cq_indexed, DbIndex, Matcher};
pub use treewidth::{
    find_tree_decomposition, find_tree_decomposition_db, find_tree_decomposition_graph,
    gaifman_of, has_treewidth, TreeDecomposition,
};

#[cfg(test)]
mod tests;
