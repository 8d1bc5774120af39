use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::closure::Edge;
use super::types::{TypeSystem, TypeTable};
use crate::error::{Error, Result};
use crate::kernel::{Atom, Concept, Cq, Database, Ontology, Sym};
use crate::Limits;

/// A constraint network assigning types of one table to constants.
pub struct Network<'a> {
    pub table: &'a TypeTable,
    pub consts: Vec<Sym>,
    pub doms: Vec<Vec<u32>>,
    /// Per variable: neighbours with the edge masks oriented away from it.
    pub adj: Vec<Vec<(usize, Edge)>>,
}

impl<'a> Network<'a> {
    /// Candidate types per constant satisfy the concept facts (c3) and
    /// `filter`; role facts become binary constraints.
    pub fn new(
        sys: &TypeSystem,
        table: &'a TypeTable,
        d: &Database,
        filter: &dyn Fn(&Sym, u64) -> bool,
    ) -> Self {
        let consts: Vec<Sym> = d.adom().into_iter().collect();
        let pos: BTreeMap<&Sym, usize> = consts.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let mut need = vec![0u64; consts.len()];
        for (a, c) in d.concept_facts() {
            if let Some(bit) = sys.closure.name_atom(a) {
                need[pos[c]] |= 1 << bit;
            }
        }
        let mut loops: Vec<Vec<Edge>> = vec![Vec::new(); consts.len()];
        let mut pairs: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
        let mut edge_of: BTreeMap<&Sym, Edge> = BTreeMap::new();
        for (r, a, b) in d.role_facts() {
            let e = *edge_of.entry(r).or_insert_with(|| sys.closure.edge(r));
            if e.is_trivial() {
                continue;
            }
            let (i, j) = (pos[a], pos[b]);
            if i == j {
                loops[i].push(e);
                continue;
            }
            // Parallel facts combine into one constraint with joined masks.
            let (key, e) = if i < j { ((i, j), e) } else { ((j, i), e.inv()) };
            let slot = pairs.entry(key).or_default();
            slot.fwd |= e.fwd;
            slot.bwd |= e.bwd;
        }
        let doms = (0..consts.len())
            .map(|v| {
                (0..table.len() as u32)
                    .filter(|&t| {
                        let ty = table.types[t as usize];
                        ty & need[v] == need[v]
                            && loops[v].iter().all(|&e| table.compat(e, t as usize, t as usize))
                            && filter(&consts[v], ty)
                    })
                    .collect()
            })
            .collect();
        let mut adj = vec![Vec::new(); consts.len()];
        for (&(i, j), &e) in &pairs {
            adj[i].push((j, e));
            adj[j].push((i, e.inv()));
        }
        Network {
            table,
            consts,
            doms,
            adj,
        }
    }

    /// Arc consistency from the given worklist; false on a wipe-out.
    fn propagate(&self, doms: &mut [Vec<u32>], mut queue: VecDeque<usize>) -> bool {
        let mut queued = vec![false; doms.len()];
        for &v in &queue {
            queued[v] = true;
        }
        while let Some(y) = queue.pop_front() {
            queued[y] = false;
            for &(x, e_yx) in &self.adj[y] {
                let e = e_yx.inv();
                // Revise x against y: keep values with some supporting partner.
                let mut keys: Vec<(u64, u64)> =
                    doms[y].iter().map(|&b| self.table.target_key(e, b as usize)).collect();
                keys.sort_unstable();
                keys.dedup();
                let before = doms[x].len();
                doms[x].retain(|&a| {
                    let src = self.table.source_key(e, a as usize);
                    keys.iter().any(|&dst| super::types::keys_compat(src, dst))
                });
                if doms[x].is_empty() {
                    return false;
                }
                if doms[x].len() != before && !queued[x] {
                    queued[x] = true;
                    queue.push_back(x);
                }
            }
        }
        true
    }

    /// A full assignment satisfying all constraints, if one exists.
    pub fn solve(&self) -> Option<Vec<u32>> {
        let mut doms = self.doms.clone();
        if doms.iter().any(|d| d.is_empty()) {
            return None;
        }
        let all = (0..doms.len()).collect();
        if !self.propagate(&mut doms, all) {
            return None;
        }
        self.search(doms)
    }

    fn search(&self, doms: Vec<Vec<u32>>) -> Option<Vec<u32>> {
        let pick = (0..doms.len())
            .filter(|&v| doms[v].len() > 1)
            .min_by_key(|&v| doms[v].len());
        let Some(v) = pick else {
            return Some(doms.iter().map(|d| d[0]).collect());
        };
        for &t in &doms[v] {
            let mut next = doms.clone();
            next[v] = vec![t];
            if self.propagate(&mut next, VecDeque::from([v])) {
                if let Some(found) = self.search(next) {
                    return Some(found);
                }
            }
        }
        None
    }
}

/// Whether `d` has a model of the system's constraints in which every
/// constant's type passes `filter`; an empty database asks whether any
/// element can exist.
pub fn sat_with(sys: &TypeSystem, d: &Database, filter: &dyn Fn(&Sym, u64) -> bool) -> bool {
    sys.tables
        .iter()
        .any(|table| Network::new(sys, table, d, filter).solve().is_some())
}

/// Whether `d` is satisfiable with `o` while every element satisfies the
/// `global` concepts.
pub fn kb_sat(d: &Database, o: &Ontology, global: &[Concept]) -> Result<bool> {
    kb_sat_limited(d, o, global, &Limits::default())
}

pub fn kb_sat_limited(d: &Database, o: &Ontology, global: &[Concept], limits: &Limits) -> Result<bool> {
    let (sys, _) = TypeSystem::for_ontology(o, &[], global, limits.max_closure)?;
    Ok(sat_with(&sys, d, &|_, _| true))
}

/// Exact certain-answer test for an ELIQ `C(x)` at `ā = (a)` or a Boolean
/// ELIQ at `ā = ()`.
pub fn certain_beliq(d: &Database, o: &Ontology, q: &Cq, a: &[Sym]) -> Result<bool> {
    certain_beliq_limited(d, o, q, a, &Limits::default())
}

pub fn certain_beliq_limited(
    d: &Database,
    o: &Ontology,
    q: &Cq,
    a: &[Sym],
    limits: &Limits,
) -> Result<bool> {
    if !q.is_beliq() {
        return Err(Error::Unsupported(format!("query {q} is not a bELIQ")));
    }
    if a.len() != q.arity() {
        return Err(Error::Invalid(format!(
            "answer tuple has {} constants, query arity is {}",
            a.len(),
            q.arity()
        )));
    }
    let c = q.to_concept().expect("bELIQ has a concept form");
    if q.is_boolean() {
        let (sys, _) = TypeSystem::for_ontology(o, &[], &[Concept::not(c)], limits.max_closure)?;
        return Ok(!sat_with(&sys, d, &|_, _| true));
    }
    let (sys, handles) = TypeSystem::for_ontology(o, &[c], &[], limits.max_closure)?;
    let target = &handles[0];
    let mut d = d.clone();
    d.insert(Atom::Concept(Sym::new(crate::kernel::TOP_NAME), a[0].clone()));
    let at = a[0].clone();
    Ok(!sat_with(&sys, &d, &|x, t| *x != at || !target.eval(t)))
}

/// Concept names entailed at each constant of a satisfiable `d`: those
/// present in every type the constant takes in some model. `None` when
/// `d` is unsatisfiable.
pub fn entailed_names(sys: &TypeSystem, d: &Database) -> Option<BTreeMap<Sym, BTreeSet<Sym>>> {
    let adom: Vec<Sym> = d.adom().into_iter().collect();
    if !sat_with(sys, d, &|_, _| true) {
        return None;
    }
    let mut out = BTreeMap::new();
    for c in &adom {
        let mut names = BTreeSet::new();
        for (n, &bit) in sys.closure.names() {
            let refuted = sat_with(sys, d, &|x, t| x != c || t >> bit & 1 == 0);
            if !refuted {
                names.insert(n.clone());
            }
        }
        out.insert(c.clone(), names);
    }
    Some(out)
}
