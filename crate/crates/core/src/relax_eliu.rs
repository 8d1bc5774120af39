//! Ontology relaxing to ELIU⊥: the careful chase. The database is extended
//! by copies of every tree-shaped fragment of the query that is entailed
//! on the tree unraveling, and the query is then evaluated directly.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::hornsat::{entailed_constants, entails_disjunction, unravel_unsat};
use crate::kernel::{Cq, Database, Omq, Sym};
use crate::querytools::{add_copy, all_tuples, eval_cq, trees_closure, Fresh};

/// What the careful chase added for one fragment.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub fragment: Cq,
    /// The constant the root was glued to, for unary fragments.
    pub attach: Option<Sym>,
}

#[derive(Debug, Clone)]
pub struct CarefulChaseResult {
    pub extended_db: Database,
    pub provenance: Vec<Provenance>,
    /// The database has no model under the relaxed ontology.
    pub unsatisfiable: bool,
}

/// Builds D' for every disjunct of the query at once.
pub fn careful_chase(ctx: &Ctx, omq: &Omq, d: &Database) -> Result<CarefulChaseResult> {
    let o = &omq.ontology;
    let empty = BTreeSet::new();
    if unravel_unsat(ctx, o, d, &empty)? {
        return Ok(CarefulChaseResult {
            extended_db: d.clone(),
            provenance: Vec::new(),
            unsatisfiable: true,
        });
    }
    let names = o.concept_names();
    let mut fragments: BTreeSet<Cq> = BTreeSet::new();
    for q in &omq.query.disjuncts {
        fragments.extend(trees_closure(q, None, &names, ctx.limits.max_td_elements)?);
    }
    let fragments: Vec<Cq> = fragments.into_iter().collect();
    let results: Vec<Result<Vec<Option<Sym>>>> = fragments
        .par_iter()
        .map(|p| {
            let c = p.to_concept().expect("fragments are bELIQs");
            if p.is_boolean() {
                let hit = entails_disjunction(ctx, o, d, &empty, &[c], &[])?;
                Ok(if hit { vec![None] } else { Vec::new() })
            } else {
                Ok(entailed_constants(ctx, o, d, &c)?.into_iter().map(Some).collect())
            }
        })
        .collect();
    let mut db = d.clone();
    let mut fresh = Fresh::avoiding(d.adom());
    let mut provenance = Vec::new();
    for (p, hits) in fragments.iter().zip(results) {
        for attach in hits? {
            let mut fixed = BTreeMap::new();
            if let (Some(a), Some(x)) = (&attach, p.answer.first()) {
                fixed.insert(x.clone(), a.clone());
            }
            add_copy(&mut db, &p.atoms, &fixed, &mut fresh);
            provenance.push(Provenance {
                fragment: p.clone(),
                attach,
            });
        }
        if db.len() > ctx.limits.max_facts {
            return Err(Error::guard(format!(
                "careful chase exceeds {} facts",
                ctx.limits.max_facts
            )));
        }
    }
    Ok(CarefulChaseResult {
        extended_db: db,
        provenance,
        unsatisfiable: false,
    })
}

/// All answers of the ELIU⊥-relaxed OMQ over `adom(d)`.
pub fn approx_eliu_answers(ctx: &Ctx, omq: &Omq, d: &Database) -> Result<BTreeSet<Vec<Sym>>> {
    let chase = careful_chase(ctx, omq, d)?;
    let adom = d.adom();
    if chase.unsatisfiable {
        return Ok(all_tuples(&adom, omq.arity()));
    }
    let mut out = BTreeSet::new();
    for q in &omq.query.disjuncts {
        out.extend(
            eval_cq(&chase.extended_db, q)
                .into_iter()
                .filter(|t| t.iter().all(|c| adom.contains(c))),
        );
    }
    Ok(out)
}

/// Whether `ā` is an answer of the ELIU⊥-relaxed OMQ on `d`.
pub fn approx_eliu(ctx: &Ctx, omq: &Omq, d: &Database, a: &[Sym]) -> Result<bool> {
    check_tuple(omq, a)?;
    Ok(approx_eliu_answers(ctx, omq, d)?.contains(a))
}

pub(crate) fn check_tuple(omq: &Omq, a: &[Sym]) -> Result<()> {
    if a.len() != omq.arity() {
        return Err(Error::Invalid(format!(
            "answer tuple has {} constants, query arity is {}",
            a.len(),
            omq.arity()
        )));
    }
    Ok(())
}
