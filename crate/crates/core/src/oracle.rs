//! Brute-force oracles and seeded instance generation for cross-checks:
//! a fair bounded chase, certain answers over materialized unraveling
//! prefixes, and random OMQs with databases.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::kernel::{Atom, Ci, Concept, Cq, Database, Dialect, Omq, Ontology, Role, Sym, Tgd, Ucq, TOP_NAME};
use crate::querytools::{eval_cq, Fresh};
use crate::typesat::certain_beliq_limited;
use crate::unraveling::{lk_unravel_prefix_with, tree_unravel_prefix, LkShape};

/// Rules for [`chase_bounded`].
#[derive(Debug, Clone, Copy)]
pub enum ChaseRules<'a> {
    Tgds(&'a [Tgd]),
    Ontology(&'a Ontology),
}

/// One rule application.
#[derive(Debug, Clone)]
pub struct ChaseStep {
    pub rule: usize,
    /// Image of the body variables.
    pub hom: BTreeMap<Sym, Sym>,
    pub added: Vec<Atom>,
}

#[derive(Debug, Clone)]
pub struct ChaseTrace {
    pub db: Database,
    pub steps: Vec<ChaseStep>,
    /// A denial constraint fired.
    pub inconsistent: bool,
    /// Completed round-robin passes over the rules.
    pub rounds: usize,
}

/// Atoms of the tree query of an ELI concept rooted at `x`, or `None` if
/// the concept mentions ⊥.
fn tree_atoms(c: &Concept, x: &Sym, next: &mut usize, out: &mut BTreeSet<Atom>) -> Result<bool> {
    match c {
        Concept::Top => {
            out.insert(Atom::Concept(Sym::new(TOP_NAME), x.clone()));
        }
        Concept::Bot => return Ok(false),
        Concept::Name(n) => {
            out.insert(Atom::Concept(n.clone(), x.clone()));
        }
        Concept::And(a, b) => {
            return Ok(tree_atoms(a, x, next, out)? && tree_atoms(b, x, next, out)?);
        }
        Concept::Exists(Role::Named { name, inverse }, d) => {
            let y = Sym::from(format!("v{next}"));
            *next += 1;
            out.insert(if *inverse {
                Atom::Role(name.clone(), y.clone(), x.clone())
            } else {
                Atom::Role(name.clone(), x.clone(), y.clone())
            });
            return tree_atoms(d, &y, next, out);
        }
        _ => return Err(Error::Unsupported(format!("{c} is not an ELI⊥ concept"))),
    }
    Ok(true)
}

/// The TGDs (and denial constraints) of an ELI⊥ ontology.
pub fn eli_rules(o: &Ontology) -> Result<Vec<Tgd>> {
    let x = Sym::new("v");
    let mut out = Vec::new();
    for ci in &o.cis {
        let mut next = 0;
        let mut body = BTreeSet::new();
        if !tree_atoms(&ci.lhs, &x, &mut next, &mut body)? {
            continue;
        }
        let mut head = BTreeSet::new();
        let head = tree_atoms(&ci.rhs, &x, &mut next, &mut head)?.then_some(head);
        out.push(Tgd::new(body, head));
    }
    Ok(out)
}

/// Oblivious chase in round-robin passes. Each (rule, body image) fires
/// once; applications that would create elements deeper than `depth` are
/// skipped, while rules without existential variables always fire.
pub fn chase_bounded(ctx: &Ctx, rules: ChaseRules<'_>, d: &Database, depth: usize) -> Result<ChaseTrace> {
    let owned;
    let tgds: &[Tgd] = match rules {
        ChaseRules::Tgds(t) => t,
        ChaseRules::Ontology(o) => {
            owned = eli_rules(o)?;
            &owned
        }
    };
    let mut db = d.clone();
    let mut level: BTreeMap<Sym, usize> = d.adom().into_iter().map(|c| (c, 0)).collect();
    let mut fresh = Fresh::avoiding(d.adom());
    let mut fired: BTreeSet<(usize, Vec<Sym>)> = BTreeSet::new();
    let mut steps = Vec::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let snapshot = db.clone();
        let mut progress = false;
        for (i, tgd) in tgds.iter().enumerate() {
            let vars: Vec<Sym> = tgd.body_vars().into_iter().collect();
            let body = Cq::from_parts(vars.clone(), tgd.body.clone());
            for image in eval_cq(&snapshot, &body) {
                if !fired.insert((i, image.clone())) {
                    continue;
                }
                let hom: BTreeMap<Sym, Sym> = vars.iter().cloned().zip(image).collect();
                let Some(head) = &tgd.head else {
                    steps.push(ChaseStep { rule: i, hom, added: Vec::new() });
                    return Ok(ChaseTrace { db, steps, inconsistent: true, rounds });
                };
                let mut map = hom.clone();
                let existential: BTreeSet<Sym> = crate::kernel::atom_terms(head)
                    .into_iter()
                    .filter(|v| !hom.contains_key(v))
                    .collect();
                if !existential.is_empty() {
                    let at = tgd.frontier().iter().map(|v| level[&hom[v]]).max().unwrap_or(0) + 1;
                    if at > depth {
                        continue;
                    }
                    for v in existential {
                        let c = fresh.next_sym();
                        level.insert(c.clone(), at);
                        map.insert(v, c);
                    }
                }
                let added: Vec<Atom> = head
                    .iter()
                    .map(|a| a.rename(&map))
                    .filter(|a| !db.contains(a))
                    .collect();
                db.extend(added.iter().cloned());
                progress = true;
                steps.push(ChaseStep { rule: i, hom, added });
                if db.len() > ctx.limits.max_facts {
                    return Err(Error::guard(format!("chase exceeds {} facts", ctx.limits.max_facts)));
                }
            }
        }
        if !progress {
            return Ok(ChaseTrace { db, steps, inconsistent: false, rounds });
        }
    }
}

/// Which unraveling [`prefix_certain`] materializes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixMode {
    Tree,
    Lk { l: usize, k: usize },
}

/// Certain answer of a bELIQ over a finite prefix of the unraveling of `d`
/// at `s`. The prefix maps homomorphically into the unraveling, so `true`
/// carries over to the full unraveling; `false` is inconclusive.
#[allow(clippy::too_many_arguments)]
pub fn prefix_certain(
    ctx: &Ctx,
    o: &Ontology,
    d: &Database,
    s: &BTreeSet<Sym>,
    mode: PrefixMode,
    depth: usize,
    q: &Cq,
    a: &[Sym],
) -> Result<bool> {
    let prefix = match mode {
        PrefixMode::Tree => tree_unravel_prefix(d, s, depth)?,
        PrefixMode::Lk { l, k } => lk_unravel_prefix_with(d, s, l, k, depth, LkShape::Maximal)?,
    };
    let at: Vec<Sym> = a
        .iter()
        .map(|c| {
            prefix
                .anchor(c)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("constant {c} is not in the database")))
        })
        .collect::<Result<_>>()?;
    certain_beliq_limited(&prefix.db, o, q, &at, &ctx.limits)
}

/// Shape of generated queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryShape {
    Beliq,
    Cq,
    Ucq,
}

/// Shape of generated databases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbShape {
    Any,
    /// A directed tree over all constants: no cycles, loops or parallel edges.
    Tree,
}

/// Bounds for [`gen_instance`]; everything is drawn from a ChaCha stream
/// seeded with `seed`.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub seed: u64,
    /// Most specific fragment the ontology is drawn from.
    pub dialect: Dialect,
    pub max_cis: usize,
    pub max_constants: usize,
    pub max_facts: usize,
    pub db_shape: DbShape,
    pub shape: QueryShape,
    pub max_query_vars: usize,
    /// Fixed answer arity, or drawn (at most one for bELIQs, two otherwise).
    pub arity: Option<usize>,
    pub concept_names: usize,
    pub role_names: usize,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            seed: 0,
            dialect: Dialect::Alci,
            max_cis: 4,
            max_constants: 6,
            max_facts: 8,
            db_shape: DbShape::Any,
            shape: QueryShape::Beliq,
            max_query_vars: 3,
            arity: None,
            concept_names: 3,
            role_names: 2,
        }
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    spec: &'a InstanceSpec,
    names: Vec<Sym>,
    roles: Vec<Sym>,
}

impl Gen<'_> {
    fn name(&mut self) -> Sym {
        self.names.choose(&mut self.rng).expect("concept names").clone()
    }

    fn role_name(&mut self) -> Sym {
        self.roles.choose(&mut self.rng).expect("role names").clone()
    }

    fn role(&mut self) -> Role {
        let inverse = self.spec.dialect != Dialect::Alc && self.rng.gen_bool(0.3);
        Role::of(self.role_name(), inverse)
    }

    fn concept(&mut self, depth: usize) -> Concept {
        let dialect = self.spec.dialect;
        let boolean = dialect >= Dialect::Alc;
        let union = dialect >= Dialect::EliuUnionBot;
        let roll = self.rng.gen_range(0..10);
        match roll {
            0..=3 => Concept::Name(self.name()),
            4 if boolean => Concept::not(Concept::Name(self.name())),
            5 | 6 if depth > 0 => {
                let r = self.role();
                if boolean && self.rng.gen_bool(0.4) {
                    Concept::forall(r, self.concept(depth - 1))
                } else {
                    Concept::exists(r, self.concept(depth - 1))
                }
            }
            7 | 8 if union && self.rng.gen_bool(0.5) => Concept::or(self.concept(0), self.concept(depth)),
            7 | 8 => Concept::and(self.concept(0), self.concept(depth)),
            _ => Concept::Name(self.name()),
        }
    }

    fn ontology(&mut self) -> Ontology {
        let n = self.rng.gen_range(0..=self.spec.max_cis);
        let bot = self.spec.dialect != Dialect::Eli;
        let cis = (0..n)
            .map(|_| {
                let lhs = if self.spec.dialect >= Dialect::Alc && self.rng.gen_bool(0.2) {
                    Concept::Top
                } else {
                    self.concept(1)
                };
                let rhs = if bot && self.rng.gen_bool(0.1) {
                    Concept::Bot
                } else {
                    self.concept(1)
                };
                Ci::new(lhs, rhs)
            })
            .collect();
        Ontology::new(cis)
    }

    fn database(&mut self) -> Database {
        let n = self.rng.gen_range(1..=self.spec.max_constants.max(1));
        let consts: Vec<Sym> = (0..n).map(|i| Sym::from(format!("c{i}"))).collect();
        let mut d = Database::new();
        match self.spec.db_shape {
            DbShape::Tree => {
                for i in 1..n {
                    let parent = consts[self.rng.gen_range(0..i)].clone();
                    let r = self.role_name();
                    d.insert(if self.rng.gen_bool(0.5) {
                        Atom::Role(r, parent, consts[i].clone())
                    } else {
                        Atom::Role(r, consts[i].clone(), parent)
                    });
                }
                let unary = self.rng.gen_range(1..=self.spec.max_facts.max(1));
                for _ in 0..unary {
                    let c = consts.choose(&mut self.rng).expect("constants").clone();
                    d.insert(Atom::Concept(self.name(), c));
                }
            }
            DbShape::Any => {
                let facts = self.rng.gen_range(1..=self.spec.max_facts.max(1));
                for _ in 0..facts {
                    let a = consts.choose(&mut self.rng).expect("constants").clone();
                    if self.rng.gen_bool(0.6) {
                        let b = consts.choose(&mut self.rng).expect("constants").clone();
                        d.insert(Atom::Role(self.role_name(), a, b));
                    } else {
                        d.insert(Atom::Concept(self.name(), a));
                    }
                }
            }
        }
        d
    }

    fn var(i: usize) -> Sym {
        Sym::from(format!("x{i}"))
    }

    fn edge(&mut self, i: usize, j: usize) -> Atom {
        let r = self.role_name();
        if self.rng.gen_bool(0.5) {
            Atom::Role(r, Self::var(i), Self::var(j))
        } else {
            Atom::Role(r, Self::var(j), Self::var(i))
        }
    }

    /// A connected CQ over `n` variables; `extra` edges beyond a spanning
    /// tree may close cycles.
    fn cq(&mut self, n: usize, extra: usize, arity: usize) -> Cq {
        let mut atoms = BTreeSet::new();
        for i in 1..n {
            let parent = self.rng.gen_range(0..i);
            atoms.insert(self.edge(parent, i));
        }
        for _ in 0..extra {
            let (i, j) = (self.rng.gen_range(0..n), self.rng.gen_range(0..n));
            atoms.insert(self.edge(i, j));
        }
        for i in 0..n {
            if self.rng.gen_bool(0.4) || (n == 1 && atoms.is_empty()) {
                atoms.insert(Atom::Concept(self.name(), Self::var(i)));
            }
        }
        Cq::from_parts((0..arity).map(Self::var).collect(), atoms)
    }

    fn query(&mut self) -> Ucq {
        let max_vars = self.spec.max_query_vars.max(1);
        match self.spec.shape {
            QueryShape::Beliq => {
                let arity = self.spec.arity.unwrap_or_else(|| self.rng.gen_range(0..=1)).min(1);
                let n = self.rng.gen_range(1..=max_vars);
                Ucq { disjuncts: vec![self.cq(n, 0, arity)] }
            }
            QueryShape::Cq | QueryShape::Ucq => {
                let arity = self.spec.arity.unwrap_or_else(|| self.rng.gen_range(0..=2)).min(max_vars);
                let count = if self.spec.shape == QueryShape::Ucq { self.rng.gen_range(1..=2) } else { 1 };
                let disjuncts = (0..count)
                    .map(|_| {
                        let n = self.rng.gen_range(arity.max(1)..=max_vars);
                        let extra = self.rng.gen_range(0..=2);
                        self.cq(n, extra, arity)
                    })
                    .collect();
                Ucq { disjuncts }
            }
        }
    }
}

/// A random OMQ, database and answer tuple, determined by the spec.
pub fn gen_instance(spec: &InstanceSpec) -> (Omq, Database, Vec<Sym>) {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        spec,
        names: (0..spec.concept_names.max(1)).map(|i| Sym::from(format!("A{i}"))).collect(),
        roles: (0..spec.role_names.max(1)).map(|i| Sym::from(format!("r{i}"))).collect(),
    };
    let ontology = g.ontology();
    let query = g.query();
    let d = g.database();
    let adom: Vec<Sym> = d.adom().into_iter().collect();
    let a = (0..query.arity())
        .map(|_| adom.choose(&mut g.rng).expect("nonempty database").clone())
        .collect();
    let sigma = g.names.iter().chain(&g.roles).cloned().collect();
    (Omq::with_sigma(ontology, sigma, query), d, a)
}

#[cfg(test)]
mod tests;
