//! Propositional Horn satisfiability and the reduction deciding answers of
//! bELIQ disjunctions on tree unravelings.

mod reduce;
mod solver;

pub use reduce::{
    availability, entailed_constants, entails_disjunction, split_beliqs, unravel_entails,
    unravel_entails_ctx, unravel_unsat, Availability, Target,
};
pub use solver::{horn_solve, Clause, HornFormula, HornResult};

#[cfg(test)]
mod tests;
