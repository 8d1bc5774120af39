//! Database relaxing to tree-shaped databases: the query is answered over
//! the tree unraveling of the database at the answer constants.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::hornsat::{entails_disjunction, unravel_entails_ctx, unravel_unsat, Target};
use crate::kernel::{components_of, Atom, Concept, Cq, Database, Omq, Ontology, Sym, Ucq, TOP_NAME};
use crate::querytools::{all_tuples, canonical_cq, contraction_closure_qc};
use crate::relax_eliu::check_tuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Decided(bool),
    Open,
}

/// The decorated database and the Boolean remainder of the query, each
/// disjunct split into its connected components.
#[derive(Debug, Clone)]
pub struct DecoratedInstance {
    pub db: Database,
    pub query: Vec<Vec<Cq>>,
    pub verdict: Verdict,
}

/// Name of the concept marking elements with an `r`-edge to `a`
/// (`inverse`: an edge from `a`).
pub fn edge_marker(r: &Sym, inverse: bool, a: &Sym) -> Sym {
    let caret = if inverse { "^" } else { "" };
    Sym::from(format!("{r}{caret}@{a}"))
}

/// Memo for unary checks at answer constants, keyed by concept name and constant.
type AtomCache = Mutex<BTreeMap<(Sym, Sym), bool>>;

/// Replaces atoms over answer variables: edges to them become marker
/// concepts, atoms among them are checked against the database, and
/// concept atoms on them are checked with `check`.
pub(crate) fn decorate_with(
    qc: &Ucq,
    d: &Database,
    a: &[Sym],
    check: &dyn Fn(&Sym, &Sym) -> Result<bool>,
) -> Result<DecoratedInstance> {
    let mut db = d.clone();
    let anchors: BTreeSet<&Sym> = a.iter().collect();
    let roles: BTreeSet<Sym> = qc
        .disjuncts
        .iter()
        .flat_map(|p| p.atoms.iter())
        .filter_map(|at| match at {
            Atom::Role(r, _, _) => Some(r.clone()),
            _ => None,
        })
        .collect();
    let markers: Vec<Atom> = d
        .role_facts()
        .filter(|(r, _, _)| roles.contains(*r))
        .flat_map(|(r, b, c)| {
            let mut out = Vec::new();
            if anchors.contains(c) {
                out.push(Atom::Concept(edge_marker(r, false, c), b.clone()));
            }
            if anchors.contains(b) {
                out.push(Atom::Concept(edge_marker(r, true, b), c.clone()));
            }
            out
        })
        .collect();
    db.extend(markers);

    let mut query = Vec::new();
    'disjuncts: for p in &qc.disjuncts {
        let pos: BTreeMap<&Sym, usize> = p.answer.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut atoms = BTreeSet::new();
        for at in &p.atoms {
            match at {
                Atom::Concept(c, x) => match pos.get(x) {
                    Some(_) if c.as_str() == TOP_NAME => {}
                    Some(&i) => {
                        if !check(c, &a[i])? {
                            continue 'disjuncts;
                        }
                    }
                    None => {
                        atoms.insert(at.clone());
                    }
                },
                Atom::Role(r, x, y) => match (pos.get(x), pos.get(y)) {
                    (Some(&i), Some(&j)) => {
                        if !d.contains(&Atom::Role(r.clone(), a[i].clone(), a[j].clone())) {
                            continue 'disjuncts;
                        }
                    }
                    (None, Some(&j)) => {
                        atoms.insert(Atom::Concept(edge_marker(r, false, &a[j]), x.clone()));
                    }
                    (Some(&i), None) => {
                        atoms.insert(Atom::Concept(edge_marker(r, true, &a[i]), y.clone()));
                    }
                    (None, None) => {
                        atoms.insert(at.clone());
                    }
                },
            }
        }
        if atoms.is_empty() {
            return Ok(DecoratedInstance {
                db,
                query: Vec::new(),
                verdict: Verdict::Decided(true),
            });
        }
        let vars = crate::kernel::atom_terms(&atoms);
        let comps = components_of(&vars, &atoms)
            .into_iter()
            .map(|vs| {
                let part: BTreeSet<Atom> = atoms
                    .iter()
                    .filter(|at| at.terms().iter().all(|t| vs.contains(*t)))
                    .cloned()
                    .collect();
                Cq::from_parts(Vec::new(), part)
            })
            .collect();
        query.push(comps);
    }
    let verdict = if query.is_empty() {
        Verdict::Decided(false)
    } else {
        Verdict::Open
    };
    Ok(DecoratedInstance { db, query, verdict })
}

/// Decorates `d` and the contraction closure `qc` for the answer `ā`;
/// concept atoms on answer variables are decided on the tree unraveling
/// at `ā`.
pub fn decorate(ctx: &Ctx, qc: &Ucq, d: &Database, a: &[Sym], o: &Ontology) -> Result<DecoratedInstance> {
    let cache = AtomCache::default();
    let known: BTreeSet<Sym> = o.signature().into_iter().chain(d.signature()).collect();
    let s: BTreeSet<Sym> = a.iter().cloned().collect();
    let check = |c: &Sym, at: &Sym| -> Result<bool> {
        if let Some(&v) = cache.lock().expect("cache lock").get(&(c.clone(), at.clone())) {
            return Ok(v);
        }
        let v = known.contains(c)
            && entails_disjunction(
                ctx,
                o,
                d,
                &s,
                &[],
                &[Target {
                    constant: at.clone(),
                    concept: Concept::Name(c.clone()),
                }],
            )?;
        cache.lock().expect("cache lock").insert((c.clone(), at.clone()), v);
        Ok(v)
    };
    decorate_with(qc, d, a, &check)
}

/// Converts a disjunction of conjunctions into a conjunction of
/// disjunctions, dropping duplicates and subsumed clauses as it goes.
pub fn distribute(dnf: &[Vec<Cq>], limit: u64) -> Result<Vec<Vec<Cq>>> {
    let mut ids: BTreeMap<Cq, usize> = BTreeMap::new();
    let mut items: Vec<Cq> = Vec::new();
    let dnf_ids: Vec<BTreeSet<usize>> = dnf
        .iter()
        .map(|conj| {
            conj.iter()
                .map(|c| {
                    let key = canonical_cq(c);
                    *ids.entry(key.clone()).or_insert_with(|| {
                        items.push(key);
                        items.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    let mut clauses: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
    for conj in &dnf_ids {
        let mut next: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for c in &clauses {
            // A clause already holding a member of this conjunction is kept as is.
            if conj.iter().any(|i| c.contains(i)) {
                next.insert(c.clone());
                continue;
            }
            for &i in conj {
                let mut c2 = c.clone();
                c2.insert(i);
                next.insert(c2);
            }
            if next.len() as u64 > limit {
                return Err(Error::guard(format!(
                    "distributivity produces more than {limit} clauses"
                )));
            }
        }
        clauses = minimal(next);
    }
    Ok(clauses
        .into_iter()
        .map(|c| c.into_iter().map(|i| items[i].clone()).collect())
        .collect())
}

fn minimal(sets: BTreeSet<BTreeSet<usize>>) -> Vec<BTreeSet<usize>> {
    let mut by_size: Vec<BTreeSet<usize>> = sets.into_iter().collect();
    by_size.sort_by_key(|s| s.len());
    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    for s in by_size {
        if !out.iter().any(|m| m.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}

/// Whether `ā` is an answer to `Q` on the tree unraveling of `d` at `ā`.
pub fn approx_tree(ctx: &Ctx, omq: &Omq, d: &Database, a: &[Sym]) -> Result<bool> {
    check_tuple(omq, a)?;
    let o = &omq.ontology;
    let s: BTreeSet<Sym> = a.iter().cloned().collect();
    if unravel_unsat(ctx, o, d, &s)? {
        return Ok(true);
    }
    if omq.query.disjuncts.iter().all(Cq::is_beliq) {
        return unravel_entails_ctx(ctx, &omq.query.disjuncts, o, d, a, &s);
    }
    let qc = contraction_closure_qc(&omq.query)?;
    let dec = decorate(ctx, &qc, d, a, o)?;
    if let Verdict::Decided(v) = dec.verdict {
        return Ok(v);
    }
    let clauses = distribute(&dec.query, ctx.limits.max_distributivity)?;
    let results: Vec<Result<bool>> = clauses
        .par_iter()
        .map(|clause| {
            let concepts: Vec<Concept> = clause
                .iter()
                .map(|c| c.to_concept().expect("decorated components are BELIQs"))
                .collect();
            entails_disjunction(ctx, o, &dec.db, &s, &concepts, &[])
        })
        .collect();
    for r in results {
        if !r? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All answers of the tree-relaxed OMQ over `adom(d)`.
pub fn approx_tree_answers(ctx: &Ctx, omq: &Omq, d: &Database) -> Result<BTreeSet<Vec<Sym>>> {
    let tuples: Vec<Vec<Sym>> = all_tuples(&d.adom(), omq.arity()).into_iter().collect();
    let mut out = BTreeSet::new();
    for t in tuples {
        if approx_tree(ctx, omq, d, &t)? {
            out.insert(t);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;

    #[test]
    fn loop_is_kept_at_the_answer() {
        let q = omq(FIRST_ONTOLOGY, "q(x) :- A(x).");
        assert!(approx_tree(&Ctx::default(), &q, &db("r(a,a)"), &tuple(&["a"])).unwrap());
    }

    #[test]
    fn distant_cycle_is_lost() {
        let q = omq("", "q(x) :- r(x,y1), r(y1,y2), r(y2,y3), r(y3,y1).");
        let d = db("r(a,b1)\nr(b1,b2)\nr(b2,b3)\nr(b3,b1)");
        // The cycle survives only when the answer sits on it.
        let got = approx_tree_answers(&Ctx::default(), &q, &d).unwrap();
        assert_eq!(got, BTreeSet::from([tuple(&["b1"]), tuple(&["b2"]), tuple(&["b3"])]));
        assert_eq!(crate::querytools::eval_cq(&d, &q.query.disjuncts[0]).len(), 4);
    }

    #[test]
    fn decorate_answer_atoms() {
        let ctx = Ctx::default();
        let o = crate::syntax::parse_ontology("").unwrap();
        let q = crate::syntax::parse_query("q(x) :- A(x).").unwrap();
        let dec = decorate(&ctx, &q, &db("A(a)"), &tuple(&["a"]), &o).unwrap();
        assert_eq!(dec.verdict, Verdict::Decided(true));
        let q = crate::syntax::parse_query("q(x,y) :- r(x,y).").unwrap();
        let dec = decorate(&ctx, &q, &db("r(b,a)"), &tuple(&["a", "b"]), &o).unwrap();
        assert_eq!(dec.verdict, Verdict::Decided(false));
        let q = crate::syntax::parse_query("q(x) :- r(y,x), B(y).").unwrap();
        let dec = decorate(&ctx, &q, &db("r(b,a)\nB(b)"), &tuple(&["a"]), &o).unwrap();
        assert_eq!(dec.verdict, Verdict::Open);
        assert!(dec.db.contains(&Atom::Concept(edge_marker(&Sym::new("r"), false, &Sym::new("a")), Sym::new("b"))));
    }

    #[test]
    fn distributivity_subsumption() {
        let q = crate::syntax::parse_query("q() :- A(x), B(y).\nq() :- A(x).").unwrap();
        let dnf: Vec<Vec<Cq>> = q
            .disjuncts
            .iter()
            .map(|p| {
                p.components()
                    .into_iter()
                    .map(|vs| Cq::from_parts(Vec::new(), p.induced(&vs)))
                    .collect()
            })
            .collect();
        let cnf = distribute(&dnf, 1 << 20).unwrap();
        // (A and B) or A is just A.
        assert_eq!(cnf.len(), 1);
        assert_eq!(cnf[0].len(), 1);
    }

    #[test]
    fn boolean_cycle_without_loop_fails() {
        let q = omq("A sub B or forall r.B", "q() :- A(x), A(y), B(y), r(x,y), r(y,x).");
        let d = db("A(a)\nr(a,b)\nr(b,a)\nA(b)");
        assert!(!approx_tree(&Ctx::default(), &q, &d, &[]).unwrap());
    }

    #[test]
    fn cycle_through_the_answer_is_kept() {
        let q = omq("", "q(x) :- r(x,y), r(y,z), r(z,x).");
        let d = db("r(a,b)\nr(b,c)\nr(c,a)");
        assert_eq!(approx_tree_answers(&Ctx::default(), &q, &d).unwrap().len(), 3);
    }

    #[test]
    fn edge_to_answer_through_marker() {
        let q = omq("exists r.A sub B", "q(x) :- r(y,x), B(y).");
        let d = db("r(b,a)\nr(b,c)\nA(c)");
        assert!(approx_tree(&Ctx::default(), &q, &d, &tuple(&["a"])).unwrap());
        assert!(!approx_tree(&Ctx::default(), &q, &d, &tuple(&["b"])).unwrap());
    }
}
