//! Ontology relaxing to frontier-one TGDs of bounded treewidth: a careful
//! chase that attaches every fragment of the query of treewidth (1,k')
//! entailed on the (ℓ,k)-unraveling of the database, followed by plain
//! evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::kernel::{Cq, Database, Omq, Ontology, Sym};
use crate::querytools::{add_copy, all_tuples, canonical_cq, contractions, eval_cq, has_treewidth, trees_closure, Fresh};
use crate::relax_btw::{boolean_problem, decided_pieces, entailed, Probe, Problem};
use crate::relax_eliu::check_tuple;

/// Widths of the implied TGD class: bags of the unraveling (ℓ,k) and the
/// treewidth k' of rule bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TgdParams {
    pub l: usize,
    pub k: usize,
    pub kp: usize,
}

impl TgdParams {
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l >= self.k || self.kp == 0 {
            return Err(Error::Invalid(format!(
                "TGD widths need 1 <= l < k and k' >= 1, got l={}, k={}, k'={}",
                self.l, self.k, self.kp
            )));
        }
        Ok(())
    }

    /// k' capped by the number of variables of `q`; larger values add nothing.
    pub fn kp_for(&self, q: &Cq) -> usize {
        self.kp.min(q.vars().len()).max(1)
    }
}

/// Whether `ā` answers `p` (arity at most one) under `o` on the
/// (ℓ,k)-unraveling of `d`. Unary answers are read at a copy of the
/// constant; all copies agree.
pub fn unravel_cq_entails(
    ctx: &Ctx,
    o: &Ontology,
    d: &Database,
    p: &Cq,
    a: &[Sym],
    l: usize,
    k: usize,
) -> Result<bool> {
    if p.arity() > 1 {
        return Err(Error::Unsupported(format!("query {p} has arity above one")));
    }
    if a.len() != p.arity() {
        return Err(Error::Invalid(format!(
            "answer tuple has {} constants, query arity is {}",
            a.len(),
            p.arity()
        )));
    }
    let max_td = ctx.limits.max_td_elements;
    let none = BTreeSet::new();
    let mut comps: Vec<Cq> = p
        .components()
        .into_iter()
        .map(|vs| {
            let answer = p.answer.iter().filter(|x| vs.contains(*x)).cloned().collect();
            Cq::from_parts(answer, p.induced(&vs))
        })
        .collect();
    if comps.is_empty() {
        // The empty query holds everywhere.
        return Ok(true);
    }
    // Cheap components first: a single refutation decides.
    comps.sort_by_key(|c| (!c.is_beliq(), c.atoms.len()));
    for comp in comps {
        let problem = if comp.is_boolean() {
            boolean_problem(std::slice::from_ref(&comp), l, k, l, max_td)?
        } else if comp.is_eliq() {
            Problem {
                probe: Some(Probe::Concept(a[0].clone(), comp.to_concept().expect("ELIQ has a concept form"))),
                ..Problem::default()
            }
        } else {
            let mut targets = BTreeSet::new();
            for c in contractions(&comp) {
                if has_treewidth(&c.atoms, l, k, max_td)? {
                    targets.insert(canonical_cq(&c));
                }
            }
            Problem {
                pieces: decided_pieces(std::slice::from_ref(&comp), l, k, l, max_td)?,
                probe: Some(Probe::Pieces(a[0].clone(), targets.into_iter().collect())),
                ..Problem::default()
            }
        };
        if !entailed(ctx, o, d, &none, l, k, &problem)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Oracle results keyed by canonical fragment and attachment constant.
type FragmentCache = Mutex<BTreeMap<(Cq, Option<Sym>), bool>>;

/// The database extended by copies of every entailed fragment of `q`.
fn extend(
    ctx: &Ctx,
    o: &Ontology,
    d: &Database,
    q: &Cq,
    params: &TgdParams,
    cache: &FragmentCache,
) -> Result<Database> {
    let kp = params.kp_for(q);
    let fragments = trees_closure(q, Some(kp), &o.concept_names(), ctx.limits.max_td_elements)?;
    let adom: Vec<Sym> = d.adom().into_iter().collect();
    let jobs: Vec<(Cq, Option<Sym>)> = fragments
        .iter()
        .flat_map(|p| {
            if p.is_boolean() {
                vec![(p.clone(), None)]
            } else {
                adom.iter().map(|c| (p.clone(), Some(c.clone()))).collect()
            }
        })
        .collect();
    let results: Vec<Result<bool>> = jobs
        .par_iter()
        .map(|key| {
            if let Some(&v) = cache.lock().expect("cache lock").get(key) {
                return Ok(v);
            }
            let (p, at) = key;
            let a: Vec<Sym> = at.iter().cloned().collect();
            let v = unravel_cq_entails(ctx, o, d, p, &a, params.l, params.k)?;
            cache.lock().expect("cache lock").insert(key.clone(), v);
            Ok(v)
        })
        .collect();
    let mut out = d.clone();
    let mut fresh = Fresh::avoiding(d.adom());
    for ((p, at), hit) in jobs.iter().zip(results) {
        if !hit? {
            continue;
        }
        let mut fixed = BTreeMap::new();
        if let (Some(c), Some(x)) = (at, p.answer.first()) {
            fixed.insert(x.clone(), c.clone());
        }
        add_copy(&mut out, &p.atoms, &fixed, &mut fresh);
        if out.len() > ctx.limits.max_facts {
            return Err(Error::guard(format!(
                "careful chase exceeds {} facts",
                ctx.limits.max_facts
            )));
        }
    }
    Ok(out)
}

/// All answers of the TGD-relaxed OMQ over `adom(d)`.
pub fn approx_tgd_answers(ctx: &Ctx, omq: &Omq, d: &Database, params: TgdParams) -> Result<BTreeSet<Vec<Sym>>> {
    params.validate()?;
    let o = &omq.ontology;
    let adom = d.adom();
    if entailed(ctx, o, d, &BTreeSet::new(), params.l, params.k, &Problem::default())? {
        return Ok(all_tuples(&adom, omq.arity()));
    }
    let cache = FragmentCache::default();
    let mut out = BTreeSet::new();
    for q in &omq.query.disjuncts {
        let extended = extend(ctx, o, d, q, &params, &cache)?;
        out.extend(
            eval_cq(&extended, q)
                .into_iter()
                .filter(|t| t.iter().all(|c| adom.contains(c))),
        );
    }
    Ok(out)
}

/// Whether `ā` is an answer of the TGD-relaxed OMQ on `d`.
pub fn approx_tgd(ctx: &Ctx, omq: &Omq, d: &Database, a: &[Sym], params: TgdParams) -> Result<bool> {
    check_tuple(omq, a)?;
    Ok(approx_tgd_answers(ctx, omq, d, params)?.contains(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_query;
    use crate::testutil::*;
    use crate::typesat::certain_beliq;

    const K4_CLIQUE: &str = "q() :- e(x,y), e(x,z), e(x,w), e(y,z), e(y,w), e(z,w).";

    fn params(l: usize, k: usize, kp: usize) -> TgdParams {
        TgdParams { l, k, kp }
    }

    #[test]
    fn clique_needs_a_bag_of_four() {
        let ctx = Ctx::default();
        let p = parse_query(K4_CLIQUE).unwrap().disjuncts[0].clone();
        let d = db(K4);
        let o = Ontology::default();
        assert!(unravel_cq_entails(&ctx, &o, &d, &p, &[], 1, 4).unwrap());
        assert!(!unravel_cq_entails(&ctx, &o, &d, &p, &[], 1, 3).unwrap());
    }

    #[test]
    fn conflict_is_global_not_local() {
        let ctx = Ctx::default();
        let o = crate::syntax::parse_ontology(COLORING).unwrap();
        let d = db(K4);
        let boolean = parse_query("q() :- D(x).").unwrap().disjuncts[0].clone();
        assert!(unravel_cq_entails(&ctx, &o, &d, &boolean, &[], 1, 4).unwrap());
        let unary = parse_query("q(x) :- D(x).").unwrap().disjuncts[0].clone();
        assert!(!unravel_cq_entails(&ctx, &o, &d, &unary, &tuple(&["a"]), 1, 4).unwrap());
    }

    #[test]
    fn coloring_rule_fires_on_the_clique() {
        let ctx = Ctx::default();
        let q = omq(COLORING, "q() :- D(x).");
        assert!(approx_tgd(&ctx, &q, &db(K4), &[], params(1, 4, 2)).unwrap());
        let triangle = db("e(a,b)\ne(b,c)\ne(a,c)");
        assert!(!approx_tgd(&ctx, &q, &triangle, &[], params(1, 3, 2)).unwrap());
        assert!(!certain_beliq(&triangle, &q.ontology, &q.query.disjuncts[0], &[]).unwrap());
    }

    #[test]
    fn data_answers_are_kept() {
        let ctx = Ctx::default();
        let q = omq("", "q() :- r(x,y), r(y,x), r(x,z), r(z,x), r(y,z), r(z,y).");
        let d = db("r(a1,a2)\nr(a2,a1)\nr(a1,a3)\nr(a3,a1)\nr(a2,a3)\nr(a3,a2)");
        assert!(approx_tgd(&ctx, &q, &d, &[], params(1, 2, 2)).unwrap());
    }

    #[test]
    fn loop_rule_is_found() {
        let ctx = Ctx::default();
        let q = omq(FIRST_ONTOLOGY, "q(x) :- A(x).");
        let d = db("r(a,a)");
        // The loop stays a loop in every bag, so both CIs reach A.
        assert!(approx_tgd(&ctx, &q, &d, &tuple(&["a"]), params(1, 2, 2)).unwrap());
    }

    #[test]
    fn disjunctive_successor_is_found() {
        let ctx = Ctx::default();
        let q = omq(
            "top sub (forall r.(B1 imp A)) or (forall r.(B2 imp A))",
            "q(x) :- r(x,y), A(y).",
        );
        let d = db("r(a,b1)\nr(a,b2)\nB1(b1)\nB2(b2)");
        let got = approx_tgd_answers(&ctx, &q, &d, params(1, 2, 2)).unwrap();
        assert_eq!(got, BTreeSet::from([tuple(&["a"])]));
    }

    #[test]
    fn kp_is_capped_by_the_query() {
        let q = parse_query("q(x) :- r(x,y).").unwrap().disjuncts[0].clone();
        assert_eq!(params(1, 2, 9).kp_for(&q), 2);
        assert!(params(2, 2, 1).validate().is_err());
    }
}
