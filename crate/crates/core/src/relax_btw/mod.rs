//! Database relaxing to bounded treewidth: the query is answered over the
//! (ℓ,k)-unraveling of the database that keeps a set S of constants fixed.
//! Both the bELIQ and the UCQ version are decided by assignment
//! elimination; see [`engine`].

pub mod engine;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::kernel::{Atom, Concept, Cq, Database, Omq, Ontology, Sym, Ucq};
use crate::querytools::{all_tuples, canonical_cq, contractions, has_treewidth};
use crate::relax_eliu::check_tuple;
use crate::relax_tree::{decorate_with, distribute, Verdict};

pub use engine::{entailed, Probe, Problem};

fn check_widths(l: usize, k: usize) -> Result<()> {
    if l == 0 || l >= k {
        return Err(Error::Invalid(format!("widths need 1 <= l < k, got l={l}, k={k}")));
    }
    Ok(())
}

/// Whether `ā` is a certain answer of the bELIQ OMQ over the
/// (ℓ,k)-unraveling of `d` at `s`. Disjunctions of bELIQs are accepted.
pub fn eliminate_beliq(
    ctx: &Ctx,
    omq: &Omq,
    d: &Database,
    s: &BTreeSet<Sym>,
    a: &[Sym],
    l: usize,
    k: usize,
) -> Result<bool> {
    check_tuple(omq, a)?;
    check_widths(l, k)?;
    let adom = d.adom();
    if let Some(c) = s.iter().find(|c| !adom.contains(*c)) {
        return Err(Error::Invalid(format!("anchored constant {c} is not in the database")));
    }
    if let Some(q) = omq.query.disjuncts.iter().find(|q| !q.is_beliq()) {
        return Err(Error::Unsupported(format!("query {q} is not a bELIQ")));
    }
    let mut problem = Problem::default();
    let mut unary = Vec::new();
    for q in &omq.query.disjuncts {
        let c = q.to_concept().expect("bELIQ has a concept form");
        if q.is_boolean() {
            problem.globals.push(c);
        } else {
            unary.push(c);
        }
    }
    if let Some(a0) = a.first() {
        if s.contains(a0) {
            problem.targets = unary.into_iter().map(|c| (a0.clone(), c)).collect();
        } else if !unary.is_empty() {
            problem.probe = Some(Probe::Concept(a0.clone(), Concept::or_all(unary)));
        }
    }
    entailed(ctx, &omq.ontology, d, s, l, k, &problem)
}

/// Contractions of `q` whose quantified part has treewidth (ℓ,k).
pub fn bounded_contractions(q: &Ucq, l: usize, k: usize, max_td: usize) -> Result<Ucq> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in &q.disjuncts {
        for c in contractions(p) {
            if !seen.insert(canonical_cq(&c)) {
                continue;
            }
            let answer: BTreeSet<&Sym> = c.answer.iter().collect();
            let inner: BTreeSet<Atom> = c
                .atoms
                .iter()
                .filter(|at| at.terms().iter().all(|t| !answer.contains(t)))
                .cloned()
                .collect();
            if has_treewidth(&inner, l, k, max_td)? {
                out.push(c);
            }
        }
    }
    Ok(Ucq { disjuncts: out })
}

/// Concepts of the contractions of `q` that are Boolean ELIQs. Their
/// negations hold everywhere in a countermodel, including anonymous parts.
pub fn boolean_tree_contractions(q: &Cq) -> Vec<Concept> {
    let boolean = Cq::from_parts(Vec::new(), q.atoms.clone());
    let mut seen = BTreeSet::new();
    contractions(&boolean)
        .into_iter()
        .filter(|c| c.is_boolean_eliq() && seen.insert(canonical_cq(c)))
        .map(|c| c.to_concept().expect("Boolean ELIQ has a concept form"))
        .collect()
}

/// Most variables of a contraction whose separated pieces are enumerated.
const MAX_PIECE_VARS: usize = 12;

/// The pieces of `q` an assignment decides: for every contraction of a
/// disjunct with treewidth (ℓ,k) and every connected set V of its
/// variables, the atoms touching V with the neighbours of V as answer
/// variables. These are the parts of a match that can lie beyond an
/// overlap of at most `max_arity` constants.
pub fn decided_pieces(q: &[Cq], l: usize, k: usize, max_arity: usize, max_td: usize) -> Result<Vec<Cq>> {
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    for p in q {
        let boolean = Cq::from_parts(Vec::new(), p.atoms.clone());
        for c in contractions(&boolean) {
            if !seen.insert(canonical_cq(&c)) || !has_treewidth(&c.atoms, l, k, max_td)? {
                continue;
            }
            let vars: Vec<Sym> = c.vars().into_iter().collect();
            if vars.len() > MAX_PIECE_VARS {
                return Err(Error::guard(format!(
                    "contraction with {} variables, piece limit is {MAX_PIECE_VARS}",
                    vars.len()
                )));
            }
            let n = vars.len();
            let at = |x: &Sym| vars.iter().position(|v| v == x).expect("variable of c");
            let mut adj = vec![0u32; n];
            for a in &c.atoms {
                if let Atom::Role(_, x, y) = a {
                    let (i, j) = (at(x), at(y));
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
            for mask in 1u32..(1u32 << n) {
                let first = mask.trailing_zeros() as usize;
                let mut reach = 1u32 << first;
                loop {
                    let grown = (0..n)
                        .filter(|&i| reach >> i & 1 == 1)
                        .fold(reach, |m, i| m | (adj[i] & mask));
                    if grown == reach {
                        break;
                    }
                    reach = grown;
                }
                if reach != mask {
                    continue;
                }
                let border = (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .fold(0u32, |m, i| m | adj[i])
                    & !mask;
                let arity = border.count_ones() as usize;
                if arity == 0 || arity > max_arity {
                    continue;
                }
                let inside: BTreeSet<&Sym> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| &vars[i]).collect();
                let atoms: BTreeSet<Atom> = c
                    .atoms
                    .iter()
                    .filter(|a| a.terms().iter().any(|t| inside.contains(t)))
                    .cloned()
                    .collect();
                let answer: Vec<Sym> = (0..n).filter(|&i| border >> i & 1 == 1).map(|i| vars[i].clone()).collect();
                out.insert(canonical_cq(&Cq::from_parts(answer, atoms)));
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Problem refuting a disjunction of connected Boolean CQs.
pub fn boolean_problem(clause: &[Cq], l: usize, k: usize, max_arity: usize, max_td: usize) -> Result<Problem> {
    let mut problem = Problem::default();
    if clause.iter().all(Cq::is_boolean_eliq) {
        problem.globals = clause
            .iter()
            .map(|q| q.to_concept().expect("Boolean ELIQ has a concept form"))
            .collect();
        return Ok(problem);
    }
    problem.globals = clause.iter().flat_map(boolean_tree_contractions).collect();
    problem.forbidden = clause.to_vec();
    problem.pieces = decided_pieces(clause, l, k, max_arity, max_td)?;
    Ok(problem)
}

/// Whether `ā` is a certain answer of the OMQ over the (ℓ,k)-unraveling of
/// `d` that keeps the answer constants fixed.
pub fn eliminate_ucq(ctx: &Ctx, omq: &Omq, d: &Database, a: &[Sym], l: usize, k: usize) -> Result<bool> {
    check_tuple(omq, a)?;
    check_widths(l, k)?;
    let o: &Ontology = &omq.ontology;
    let s: BTreeSet<Sym> = a.iter().cloned().collect();
    let mut d = d.clone();
    for c in &s {
        d.insert(Atom::Concept(Sym::new(crate::kernel::TOP_NAME), c.clone()));
    }
    if omq.query.disjuncts.iter().all(Cq::is_beliq) {
        return eliminate_beliq(ctx, omq, &d, &s, a, l, k);
    }
    if entailed(ctx, o, &d, &s, l, k, &Problem::default())? {
        return Ok(true);
    }
    let max_td = ctx.limits.max_td_elements;
    let qc = bounded_contractions(&omq.query, l, k, max_td)?;
    let known: BTreeSet<Sym> = o.signature().into_iter().chain(d.signature()).collect();
    let cache: Mutex<BTreeMap<(Sym, Sym), bool>> = Mutex::default();
    let check = |c: &Sym, at: &Sym| -> Result<bool> {
        if let Some(&v) = cache.lock().expect("cache lock").get(&(c.clone(), at.clone())) {
            return Ok(v);
        }
        let problem = Problem {
            targets: vec![(at.clone(), Concept::Name(c.clone()))],
            ..Problem::default()
        };
        let v = known.contains(c) && entailed(ctx, o, &d, &s, l, k, &problem)?;
        cache.lock().expect("cache lock").insert((c.clone(), at.clone()), v);
        Ok(v)
    };
    let dec = decorate_with(&qc, &d, a, &check)?;
    if let Verdict::Decided(v) = dec.verdict {
        return Ok(v);
    }
    let clauses = distribute(&dec.query, ctx.limits.max_distributivity)?;
    let (lw, kw) = (l + s.len(), k + s.len());
    let results: Vec<Result<bool>> = clauses
        .par_iter()
        .map(|clause| {
            let problem = boolean_problem(clause, lw, kw, lw, max_td)?;
            entailed(ctx, o, &dec.db, &s, l, k, &problem)
        })
        .collect();
    for r in results {
        if !r? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All answers of the (ℓ,k)-relaxed OMQ over `adom(d)`.
pub fn eliminate_ucq_answers(ctx: &Ctx, omq: &Omq, d: &Database, l: usize, k: usize) -> Result<BTreeSet<Vec<Sym>>> {
    let mut out = BTreeSet::new();
    for t in all_tuples(&d.adom(), omq.arity()) {
        if eliminate_ucq(ctx, omq, d, &t, l, k)? {
            out.insert(t);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
