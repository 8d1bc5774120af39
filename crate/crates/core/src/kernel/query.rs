use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::concept::{Concept, Ontology, Role};
use super::data::{Atom, Database};
use super::sym::{Sym, TOP_NAME};
use crate::error::{Error, Result};

/// A conjunctive query. Every term of an atom is a variable; answer
/// variables are listed in `answer`, all others are existentially quantified.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cq {
    pub answer: Vec<Sym>,
    pub atoms: BTreeSet<Atom>,
}

impl Cq {
    /// Checks that answer variables are distinct and used in some atom.
    pub fn new(answer: Vec<Sym>, atoms: BTreeSet<Atom>) -> Result<Self> {
        let q = Cq { answer, atoms };
        let vars = q.vars();
        let mut seen = BTreeSet::new();
        for x in &q.answer {
            if !seen.insert(x) {
                return Err(Error::Invalid(format!("answer variable {x} repeated")));
            }
            if !vars.contains(x) {
                return Err(Error::Invalid(format!(
                    "answer variable {x} does not occur in the body"
                )));
            }
        }
        Ok(q)
    }

    /// Constructor for internally generated queries known to be well formed.
    pub fn from_parts(answer: Vec<Sym>, atoms: BTreeSet<Atom>) -> Self {
        Cq { answer, atoms }
    }

    pub fn arity(&self) -> usize {
        self.answer.len()
    }

    pub fn is_boolean(&self) -> bool {
        self.answer.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            for t in a.terms() {
                out.insert(t.clone());
            }
        }
        out
    }

    pub fn quantified_vars(&self) -> BTreeSet<Sym> {
        let mut v = self.vars();
        for x in &self.answer {
            v.remove(x);
        }
        v
    }

    pub fn signature(&self) -> BTreeSet<Sym> {
        self.atoms
            .iter()
            .filter(|a| !a.is_top())
            .map(|a| a.pred().clone())
            .collect()
    }

    /// The canonical database: variables read as constants.
    pub fn canonical_db(&self) -> Database {
        Database::from_facts(self.atoms.iter().cloned())
    }

    pub fn rename(&self, map: &BTreeMap<Sym, Sym>) -> Cq {
        Cq {
            answer: self
                .answer
                .iter()
                .map(|x| map.get(x).cloned().unwrap_or_else(|| x.clone()))
                .collect(),
            atoms: self.atoms.iter().map(|a| a.rename(map)).collect(),
        }
    }

    /// Atoms whose terms all lie in `vars`.
    pub fn induced(&self, vars: &BTreeSet<Sym>) -> BTreeSet<Atom> {
        self.atoms
            .iter()
            .filter(|a| a.terms().iter().all(|t| vars.contains(*t)))
            .cloned()
            .collect()
    }

    /// Connected components of the variables (over all atoms).
    pub fn components(&self) -> Vec<BTreeSet<Sym>> {
        components_of(&self.vars(), &self.atoms)
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Whether the binary atoms over `vars` form a forest without
    /// self-loops and without two atoms on the same pair of variables.
    pub fn is_tree_on(&self, vars: &BTreeSet<Sym>) -> bool {
        is_tree(vars, &self.induced(vars))
    }

    /// An ELIQ: unary, connected, tree-shaped.
    pub fn is_eliq(&self) -> bool {
        self.arity() == 1 && self.is_connected() && self.is_tree_on(&self.vars())
    }

    /// A Boolean ELIQ: Boolean, connected, tree-shaped.
    pub fn is_boolean_eliq(&self) -> bool {
        self.is_boolean()
            && !self.atoms.is_empty()
            && self.is_connected()
            && self.is_tree_on(&self.vars())
    }

    pub fn is_beliq(&self) -> bool {
        self.is_eliq() || self.is_boolean_eliq()
    }

    /// The concept expressing this bELIQ at its root: the answer variable
    /// for an ELIQ, the least variable for a BELIQ. `None` if not a bELIQ.
    pub fn to_concept(&self) -> Option<Concept> {
        if !self.is_beliq() {
            return None;
        }
        let root = match self.answer.first() {
            Some(x) => x.clone(),
            None => self.vars().into_iter().next()?,
        };
        Some(self.concept_at(&root, None))
    }

    fn concept_at(&self, v: &Sym, parent: Option<&Sym>) -> Concept {
        let mut parts = Vec::new();
        for a in &self.atoms {
            match a {
                Atom::Concept(p, t) if t == v => {
                    if p.as_str() != TOP_NAME {
                        parts.push(Concept::Name(p.clone()));
                    }
                }
                Atom::Role(r, s, t) if s == v && Some(t) != parent => {
                    parts.push(Concept::exists(
                        Role::of(r.clone(), false),
                        self.concept_at(t, Some(v)),
                    ));
                }
                Atom::Role(r, s, t) if t == v && Some(s) != parent => {
                    parts.push(Concept::exists(
                        Role::of(r.clone(), true),
                        self.concept_at(s, Some(v)),
                    ));
                }
                _ => {}
            }
        }
        Concept::and_all(parts)
    }
}

impl fmt::Debug for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<_> = self.answer.iter().map(Sym::as_str).collect();
        let body: Vec<_> = self.atoms.iter().map(|a| a.to_string()).collect();
        write!(f, "q({}) :- {}.", head.join(","), body.join(", "))
    }
}

/// Connected components of `vars` under the binary atoms in `atoms`.
pub fn components_of(vars: &BTreeSet<Sym>, atoms: &BTreeSet<Atom>) -> Vec<BTreeSet<Sym>> {
    let idx: BTreeMap<&Sym, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let n = p[c];
            p[c] = r;
            c = n;
        }
        r
    }
    for a in atoms {
        if let Atom::Role(_, s, t) = a {
            if let (Some(&i), Some(&j)) = (idx.get(s), idx.get(t)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<Sym>> = BTreeMap::new();
    for (v, &i) in &idx {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert((*v).clone());
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort();
    out
}

/// Forest test for the binary atoms over `vars`: no self-loops, at most one
/// atom per unordered pair, and no cycles.
pub fn is_tree(vars: &BTreeSet<Sym>, atoms: &BTreeSet<Atom>) -> bool {
    let mut pairs = BTreeSet::new();
    for a in atoms {
        if let Atom::Role(_, s, t) = a {
            if !vars.contains(s) || !vars.contains(t) {
                continue;
            }
            if s == t {
                return false;
            }
            let key = if s < t { (s, t) } else { (t, s) };
            if !pairs.insert(key) {
                return false;
            }
        }
    }
    let comps = components_of(vars, atoms).len();
    pairs.len() + comps == vars.len()
}

/// A union of CQs sharing the same answer variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ucq {
    pub disjuncts: Vec<Cq>,
}

impl Ucq {
    pub fn new(disjuncts: Vec<Cq>) -> Result<Self> {
        if let Some(first) = disjuncts.first() {
            if disjuncts.iter().any(|q| q.answer != first.answer) {
                return Err(Error::Invalid(
                    "disjuncts have different answer variables".into(),
                ));
            }
        }
        Ok(Ucq { disjuncts })
    }

    pub fn single(q: Cq) -> Self {
        Ucq { disjuncts: vec![q] }
    }

    pub fn arity(&self) -> usize {
        self.disjuncts.first().map_or(0, Cq::arity)
    }

    pub fn signature(&self) -> BTreeSet<Sym> {
        self.disjuncts.iter().flat_map(Cq::signature).collect()
    }

    /// The single disjunct when the UCQ is a bELIQ.
    pub fn as_beliq(&self) -> Option<&Cq> {
        match self.disjuncts.as_slice() {
            [q] if q.is_beliq() => Some(q),
            _ => None,
        }
    }
}

impl fmt::Debug for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

/// A tuple-generating dependency `body → head`, or a denial constraint
/// when `head` is `None`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tgd {
    pub body: BTreeSet<Atom>,
    pub head: Option<BTreeSet<Atom>>,
}

impl Tgd {
    pub fn new(body: BTreeSet<Atom>, head: Option<BTreeSet<Atom>>) -> Self {
        Tgd { body, head }
    }

    pub fn body_vars(&self) -> BTreeSet<Sym> {
        atom_terms(&self.body)
    }

    /// Variables shared by body and head.
    pub fn frontier(&self) -> BTreeSet<Sym> {
        match &self.head {
            None => BTreeSet::new(),
            Some(h) => {
                let hv = atom_terms(h);
                self.body_vars().intersection(&hv).cloned().collect()
            }
        }
    }

    pub fn is_frontier_one(&self) -> bool {
        self.frontier().len() <= 1
    }
}

impl fmt::Debug for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<_> = self.body.iter().map(|a| a.to_string()).collect();
        match &self.head {
            None => write!(f, "{} -> false", body.join(", ")),
            Some(h) => {
                let head: Vec<_> = h.iter().map(|a| a.to_string()).collect();
                write!(f, "{} -> {}", body.join(", "), head.join(", "))
            }
        }
    }
}

pub fn atom_terms(atoms: &BTreeSet<Atom>) -> BTreeSet<Sym> {
    atoms
        .iter()
        .flat_map(|a| a.terms().into_iter().cloned())
        .collect()
}

/// An ontology-mediated query over an ALCI ontology.
#[derive(Clone, Debug)]
pub struct Omq {
    pub ontology: Ontology,
    pub sigma: BTreeSet<Sym>,
    pub query: Ucq,
}

impl Omq {
    /// The data signature defaults to all symbols of the ontology and query.
    pub fn new(ontology: Ontology, query: Ucq) -> Self {
        let mut sigma = ontology.signature();
        sigma.extend(query.signature());
        Omq {
            ontology,
            sigma,
            query,
        }
    }

    pub fn with_sigma(ontology: Ontology, sigma: BTreeSet<Sym>, query: Ucq) -> Self {
        Omq {
            ontology,
            sigma,
            query,
        }
    }

    pub fn arity(&self) -> usize {
        self.query.arity()
    }
}

/// Signature of any kernel object.
pub trait Signature {
    fn sig(&self) -> BTreeSet<Sym>;
}

impl Signature for Concept {
    fn sig(&self) -> BTreeSet<Sym> {
        self.signature()
    }
}

impl Signature for Ontology {
    fn sig(&self) -> BTreeSet<Sym> {
        self.signature()
    }
}

impl Signature for Database {
    fn sig(&self) -> BTreeSet<Sym> {
        self.signature()
    }
}

impl Signature for Cq {
    fn sig(&self) -> BTreeSet<Sym> {
        self.signature()
    }
}

pub fn sig_of<T: Signature + ?Sized>(x: &T) -> BTreeSet<Sym> {
    x.sig()
}
