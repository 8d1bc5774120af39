//! Approximation from above. Ontology strengthening replaces an ELIU⊥
//! ontology by the ELI⊥ ontologies of its exhaustive approximation set and
//! intersects their answers; database strengthening intersects the answers
//! over all quotients of the database that are trees outside the answer
//! constants.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::kernel::{Atom, Ci, Concept, Database, Dialect, Omq, Ontology, Role, Sym, Ucq, TOP_NAME};
use crate::querytools::{all_tuples, entails, for_each_partition, has_treewidth, Fresh};
use crate::relax_eliu::check_tuple;
use crate::typesat::{certain_beliq_limited, entailed_names, sat_with, Core, TypeSystem};

/// The disjunction-free concepts whose union is equivalent to `c`.
pub fn disjunct_expansion(c: &Concept) -> Result<BTreeSet<Concept>> {
    Ok(match c {
        Concept::Top | Concept::Bot | Concept::Name(_) => BTreeSet::from([c.clone()]),
        Concept::Exists(r, d) => {
            if r.is_universal() {
                return Err(Error::Unsupported(format!("universal role in {c}")));
            }
            disjunct_expansion(d)?
                .into_iter()
                .map(|d| Concept::exists(r.clone(), d))
                .collect()
        }
        Concept::And(a, b) => {
            let right = disjunct_expansion(b)?;
            let mut out = BTreeSet::new();
            for x in disjunct_expansion(a)? {
                for y in &right {
                    out.insert(Concept::and(x.clone(), y.clone()));
                }
            }
            out
        }
        Concept::Or(a, b) => {
            let mut out = disjunct_expansion(a)?;
            out.extend(disjunct_expansion(b)?);
            out
        }
        Concept::Not(_) | Concept::Forall(..) => {
            return Err(Error::Unsupported(format!("{c} is not an ELIU⊥ concept")));
        }
    })
}

/// A disjunction-free concept mentioning ⊥ is equivalent to ⊥.
fn collapse_bot(c: Concept) -> Concept {
    if c.mentions_bot() {
        Concept::Bot
    } else {
        c
    }
}

/// ELI⊥ ontologies each implying the original one, such that every ELI⊥
/// ontology implying it implies one of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustiveSet {
    pub ontologies: Vec<Ontology>,
}

/// The exhaustive approximation set: left-hand disjunctions are split into
/// separate CIs, then one right-hand disjunct is chosen per CI.
pub fn exhaustive_set(ctx: &Ctx, o: &Ontology) -> Result<ExhaustiveSet> {
    let mut expanded: Vec<(Concept, Vec<Concept>)> = Vec::new();
    for ci in &o.cis {
        let rights: Vec<Concept> = disjunct_expansion(&ci.rhs)?
            .into_iter()
            .map(collapse_bot)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for lhs in disjunct_expansion(&ci.lhs)? {
            if !lhs.mentions_bot() {
                expanded.push((lhs, rights.clone()));
            }
        }
    }
    let size = expanded
        .iter()
        .try_fold(1u128, |n, (_, rights)| n.checked_mul(rights.len() as u128));
    match size {
        Some(n) if n <= ctx.limits.max_exhaustive as u128 => {}
        Some(n) => {
            return Err(Error::guard(format!(
                "exhaustive set has {n} ontologies, limit is {}",
                ctx.limits.max_exhaustive
            )))
        }
        None => return Err(Error::guard("exhaustive set size exceeds 2^128 ontologies")),
    }
    let mut ontologies = vec![Vec::new()];
    for (lhs, rights) in &expanded {
        ontologies = ontologies
            .into_iter()
            .flat_map(|cis: Vec<Ci>| {
                rights.iter().map(move |rhs| {
                    let mut cis = cis.clone();
                    cis.push(Ci::new(lhs.clone(), rhs.clone()));
                    cis
                })
            })
            .collect();
    }
    Ok(ExhaustiveSet {
        ontologies: ontologies.into_iter().map(Ontology::new).collect(),
    })
}

fn is_eli_bot(o: &Ontology) -> bool {
    matches!(o.dialect(), Dialect::Eli | Dialect::EliBot)
}

/// Whether `c` holds at `e` in `d` read as a finite interpretation.
fn holds(d: &Database, e: &Sym, c: &Concept) -> bool {
    match c {
        Concept::Top => true,
        Concept::Bot => false,
        Concept::Name(n) => n.as_str() == TOP_NAME || d.contains(&Atom::Concept(n.clone(), e.clone())),
        Concept::And(a, b) => holds(d, e, a) && holds(d, e, b),
        Concept::Exists(r, body) => successors(d, e, r).any(|s| holds(d, s, body)),
        Concept::Or(a, b) => holds(d, e, a) || holds(d, e, b),
        Concept::Not(_) | Concept::Forall(..) => unreachable!("ELI concepts only"),
    }
}

fn successors<'a>(d: &'a Database, e: &'a Sym, r: &'a Role) -> impl Iterator<Item = &'a Sym> + 'a {
    d.role_facts().filter_map(move |(name, s, t)| {
        if Some(name) != r.name() {
            None
        } else if r.is_inverse() {
            (t == e).then_some(s)
        } else {
            (s == e).then_some(t)
        }
    })
}

/// State of the depth-bounded chase in [`eli_certain`].
struct Chase {
    db: Database,
    depth: BTreeMap<Sym, usize>,
    fresh: Fresh,
    bound: usize,
}

impl Chase {
    /// Attaches a witness tree for `∃r.body` below `e`, cut at the bound.
    fn witness(&mut self, e: &Sym, r: &Role, body: &Concept) {
        let child = self.fresh.next_sym();
        let level = self.depth[e] + 1;
        self.depth.insert(child.clone(), level);
        let name = r.name().expect("named role").clone();
        self.db.insert(if r.is_inverse() {
            Atom::Role(name, child.clone(), e.clone())
        } else {
            Atom::Role(name, e.clone(), child.clone())
        });
        for part in body.conjuncts() {
            match part {
                Concept::Name(n) => {
                    self.db.insert(Atom::Concept(n.clone(), child.clone()));
                }
                Concept::Exists(s, inner) if level < self.bound => self.witness(&child, s, inner),
                _ => {}
            }
        }
    }
}

/// Certain answer test for an ELI⊥ ontology and a UCQ: `q` is evaluated on
/// a chase of `d` whose anonymous elements reach depth |var(q)| plus the
/// quantifier depth of `o`. Concept names and rule triggers at every
/// element are read off exact entailment, so only the depth is bounded.
pub fn eli_certain(ctx: &Ctx, o: &Ontology, d: &Database, q: &Ucq, a: &[Sym]) -> Result<bool> {
    if !is_eli_bot(o) {
        return Err(Error::Unsupported(format!(
            "ontology is {}, ELI⊥ is required",
            o.dialect()
        )));
    }
    let triggers: Vec<Concept> = o.cis.iter().map(|ci| ci.lhs.clone()).collect();
    let (sys, handles) = TypeSystem::for_ontology(o, &triggers, &[], ctx.limits.max_closure)?;
    let bound = q.disjuncts.iter().map(|p| p.vars().len()).max().unwrap_or(0) + o.role_depth();
    let mut chase = Chase {
        db: d.clone(),
        depth: d.adom().into_iter().map(|c| (c, 0)).collect(),
        fresh: Fresh::avoiding(d.adom()),
        bound,
    };
    loop {
        let Some(names) = entailed_names(&sys, &chase.db) else {
            return Ok(true);
        };
        let before = chase.db.len();
        for (e, ns) in &names {
            chase
                .db
                .extend(ns.iter().map(|n| Atom::Concept(n.clone(), e.clone())));
        }
        let open: Vec<Sym> = chase
            .depth
            .iter()
            .filter(|(_, &l)| l < bound)
            .map(|(e, _)| e.clone())
            .collect();
        for e in open {
            for (ci, h) in o.cis.iter().zip(&handles) {
                if !entailed_at(&sys, &chase.db, &e, h) {
                    continue;
                }
                for part in ci.rhs.conjuncts() {
                    if let Concept::Exists(r, body) = part {
                        if !holds(&chase.db, &e, part) {
                            chase.witness(&e, r, body);
                        }
                    }
                }
            }
        }
        if chase.db.len() > ctx.limits.max_facts {
            return Err(Error::guard(format!(
                "chase exceeds {} facts",
                ctx.limits.max_facts
            )));
        }
        if chase.db.len() == before {
            break;
        }
    }
    Ok(q.disjuncts.iter().any(|p| entails(&chase.db, p, a)))
}

/// Whether every model of the system over `d` puts `e` into `c`.
fn entailed_at(sys: &TypeSystem, d: &Database, e: &Sym, c: &Core) -> bool {
    !sat_with(sys, d, &|x, t| x != e || !c.eval(t))
}

/// Whether `ā` is in the ELI⊥-ontology strengthening answers: a certain
/// answer under every member of the exhaustive approximation set.
pub fn approx_up_ont(ctx: &Ctx, omq: &Omq, d: &Database, a: &[Sym]) -> Result<bool> {
    check_tuple(omq, a)?;
    let set = exhaustive_set(ctx, &omq.ontology)?;
    let miss = set
        .ontologies
        .par_iter()
        .map(|o| eli_certain(ctx, o, d, &omq.query, a))
        .find_first(|r| !matches!(r, Ok(true)));
    miss.unwrap_or(Ok(true))
}

pub fn approx_up_ont_answers(ctx: &Ctx, omq: &Omq, d: &Database) -> Result<BTreeSet<Vec<Sym>>> {
    let mut out = BTreeSet::new();
    for t in all_tuples(&d.adom(), omq.arity()) {
        if approx_up_ont(ctx, omq, d, &t)? {
            out.insert(t);
        }
    }
    Ok(out)
}

/// Exact evaluation on the classes where an exact evaluator exists.
fn exact(ctx: &Ctx, omq: &Omq, d: &Database, a: &[Sym]) -> Result<bool> {
    if is_eli_bot(&omq.ontology) {
        return eli_certain(ctx, &omq.ontology, d, &omq.query, a);
    }
    match omq.query.as_beliq() {
        Some(q) => certain_beliq_limited(d, &omq.ontology, q, a, &ctx.limits),
        None => Err(Error::Unsupported(format!(
            "database strengthening needs an ELI⊥ ontology or a bELIQ, got {} and a UCQ",
            omq.ontology.dialect()
        ))),
    }
}

/// Quotients of `d` that keep the constants of `a` apart and are trees
/// with multi-edges and self-loops once `a` is removed.
pub fn tree_quotients(ctx: &Ctx, d: &Database, a: &[Sym]) -> Result<Vec<Database>> {
    let consts: Vec<Sym> = d.adom().into_iter().collect();
    if consts.len() > ctx.limits.max_adom {
        return Err(Error::guard(format!(
            "database has {} constants, quotient limit is {}",
            consts.len(),
            ctx.limits.max_adom
        )));
    }
    let answer: BTreeSet<&Sym> = a.iter().collect();
    let max_td = ctx.limits.max_td_elements;
    let mut out = Vec::new();
    let mut err = None;
    for_each_partition(consts.len(), &mut |blocks| {
        if err.is_some() {
            return;
        }
        let mut reps: BTreeMap<usize, &Sym> = BTreeMap::new();
        for (c, &b) in consts.iter().zip(blocks) {
            match reps.get(&b) {
                Some(r) if answer.contains(r) && answer.contains(c) => return,
                Some(r) if answer.contains(r) || !answer.contains(c) => {}
                _ => {
                    reps.insert(b, c);
                }
            }
        }
        let map: BTreeMap<Sym, Sym> = consts
            .iter()
            .zip(blocks)
            .map(|(c, b)| (c.clone(), reps[b].clone()))
            .collect();
        let quotient = d.rename(&map);
        let rest: BTreeSet<Atom> = quotient
            .facts()
            .iter()
            .filter(|f| f.terms().iter().all(|t| !answer.contains(t)))
            .cloned()
            .collect();
        match has_treewidth(&rest, 1, 2, max_td) {
            Ok(true) => out.push(quotient),
            Ok(false) => {}
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Whether `ā` is in the database strengthening answers: a certain answer
/// over every quotient of `d` in the tree class.
pub fn approx_up_db(ctx: &Ctx, omq: &Omq, d: &Database, a: &[Sym]) -> Result<bool> {
    check_tuple(omq, a)?;
    if !is_eli_bot(&omq.ontology) && omq.query.as_beliq().is_none() {
        return exact(ctx, omq, d, a);
    }
    let quotients = tree_quotients(ctx, d, a)?;
    let miss = quotients
        .par_iter()
        .map(|q| exact(ctx, omq, q, a))
        .find_first(|r| !matches!(r, Ok(true)));
    miss.unwrap_or(Ok(true))
}

pub fn approx_up_db_answers(ctx: &Ctx, omq: &Omq, d: &Database) -> Result<BTreeSet<Vec<Sym>>> {
    let mut out = BTreeSet::new();
    for t in all_tuples(&d.adom(), omq.arity()) {
        if approx_up_db(ctx, omq, d, &t)? {
            out.insert(t);
        }
    }
    Ok(out)
}
