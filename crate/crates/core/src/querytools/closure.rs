use std::collections::{BTreeMap, BTreeSet};

use super::canon::canonical_cq;
use super::contraction::contractions;
use super::treewidth::has_treewidth;
use crate::error::Result;
use crate::kernel::{Atom, Cq, Sym, Ucq};

/// Upper bound on variables for subset enumeration in closures.
const MAX_CLOSURE_VARS: usize = 12;

fn guard_vars(q: &Cq) -> Result<()> {
    let n = q.vars().len();
    if n > MAX_CLOSURE_VARS {
        return Err(crate::error::Error::guard(format!(
            "query closure over {n} variables exceeds the limit of {MAX_CLOSURE_VARS}"
        )));
    }
    Ok(())
}

/// Contractions of every disjunct whose quantified part is a forest.
pub fn contraction_closure_qc(q: &Ucq) -> Result<Ucq> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in &q.disjuncts {
        guard_vars(d)?;
        for c in contractions(d) {
            if c.is_tree_on(&c.quantified_vars()) && seen.insert(canonical_cq(&c)) {
                out.push(c);
            }
        }
    }
    Ok(Ucq { disjuncts: out })
}

/// Subsets of `vars` (as sorted vectors) that are exactly the variables
/// of their induced atoms, paired with those atoms.
fn induced_pieces(c: &Cq) -> Vec<(Vec<Sym>, BTreeSet<Atom>)> {
    let vars: Vec<Sym> = c.vars().into_iter().collect();
    let n = vars.len();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let set: BTreeSet<Sym> = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| vars[i].clone())
            .collect();
        let atoms = c.induced(&set);
        let used: BTreeSet<&Sym> = atoms.iter().flat_map(|a| a.terms()).collect();
        if used.len() == set.len() {
            out.push((set.into_iter().collect(), atoms));
        }
    }
    out
}

/// The tree-shaped (or treewidth-(1,k')) fragments of `q` with at most one
/// answer variable: quantify all variables, contract, take an induced
/// connected subquery, and optionally free one variable. With `kp = None`
/// the fragments are bELIQs; the atomic queries `A(x)` for every concept
/// name in `concepts` are always included.
pub fn trees_closure(
    q: &Cq,
    kp: Option<usize>,
    concepts: &BTreeSet<Sym>,
    max_td: usize,
) -> Result<Vec<Cq>> {
    guard_vars(q)?;
    let boolean = Cq::from_parts(Vec::new(), q.atoms.clone());
    let mut seen: BTreeMap<Cq, Cq> = BTreeMap::new();
    let mut contracted = BTreeSet::new();
    for c in contractions(&boolean) {
        if !contracted.insert(canonical_cq(&c)) {
            continue;
        }
        for (vars, atoms) in induced_pieces(&c) {
            let base = Cq::from_parts(Vec::new(), atoms);
            if !base.is_connected() {
                continue;
            }
            let shape_ok = match kp {
                None => base.is_tree_on(&base.vars()),
                Some(k) => has_treewidth(&base.atoms, 1, k, max_td)?,
            };
            if !shape_ok {
                continue;
            }
            let mut candidates = vec![base.clone()];
            for x in &vars {
                candidates.push(Cq::from_parts(vec![x.clone()], base.atoms.clone()));
            }
            for cand in candidates {
                let key = canonical_cq(&cand);
                seen.entry(key.clone()).or_insert(key);
            }
        }
    }
    let x = Sym::new("!0");
    for a in concepts {
        let aq = Cq::from_parts(vec![x.clone()], BTreeSet::from([Atom::Concept(a.clone(), x.clone())]));
        seen.entry(aq.clone()).or_insert(aq);
    }
    Ok(seen.into_values().collect())
}

/// A member of the closure used by the query-instantiation elimination:
/// an induced subquery of a contraction with a chosen set of answer
/// variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClPiece {
    pub cq: Cq,
    /// Disjuncts of which this piece is a full contraction (all atoms).
    pub full_of: BTreeSet<usize>,
}

/// The closure cl(q): for every contraction of a disjunct (all variables
/// quantified) of treewidth (l,k), every induced subquery, with every
/// subset of its variables as answer variables.
pub fn cl_contractions(q: &Ucq, l: usize, k: usize, max_td: usize) -> Result<Vec<ClPiece>> {
    let mut pieces: BTreeMap<Cq, BTreeSet<usize>> = BTreeMap::new();
    for (i, d) in q.disjuncts.iter().enumerate() {
        guard_vars(d)?;
        let boolean = Cq::from_parts(Vec::new(), d.atoms.clone());
        let mut contracted = BTreeSet::new();
        for c in contractions(&boolean) {
            if !contracted.insert(canonical_cq(&c)) {
                continue;
            }
            if !has_treewidth(&c.atoms, l, k, max_td)? {
                continue;
            }
            let all = c.vars().len();
            for (vars, atoms) in induced_pieces(&c) {
                let full = vars.len() == all;
                let n = vars.len();
                for mask in 0u32..(1u32 << n) {
                    let answer: Vec<Sym> = (0..n)
                        .filter(|&j| mask >> j & 1 == 1)
                        .map(|j| vars[j].clone())
                        .collect();
                    let key = canonical_cq(&Cq::from_parts(answer, atoms.clone()));
                    let entry = pieces.entry(key).or_default();
                    if full {
                        entry.insert(i);
                    }
                }
            }
        }
    }
    Ok(pieces
        .into_iter()
        .map(|(cq, full_of)| ClPiece { cq, full_of })
        .collect())
}
