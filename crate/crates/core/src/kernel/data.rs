use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::sym::{Sym, TOP_NAME};

/// A unary or binary atom. Used both for database facts (terms are
/// constants) and for query atoms (terms are variables or constants).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Concept(Sym, Sym),
    Role(Sym, Sym, Sym),
}

pub type Fact = Atom;

impl Atom {
    pub fn concept(name: &str, t: &str) -> Self {
        Atom::Concept(Sym::new(name), Sym::new(t))
    }

    pub fn role(name: &str, s: &str, t: &str) -> Self {
        Atom::Role(Sym::new(name), Sym::new(s), Sym::new(t))
    }

    pub fn pred(&self) -> &Sym {
        match self {
            Atom::Concept(p, _) | Atom::Role(p, _, _) => p,
        }
    }

    pub fn terms(&self) -> Vec<&Sym> {
        match self {
            Atom::Concept(_, t) => vec![t],
            Atom::Role(_, s, t) => vec![s, t],
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Atom::Concept(p, _) if p.as_str() == TOP_NAME)
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Sym) -> Sym) -> Atom {
        match self {
            Atom::Concept(p, t) => Atom::Concept(p.clone(), f(t)),
            Atom::Role(p, s, t) => Atom::Role(p.clone(), f(s), f(t)),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Sym, Sym>) -> Atom {
        self.map_terms(&mut |t| map.get(t).cloned().unwrap_or_else(|| t.clone()))
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Concept(p, t) => write!(f, "{p}({t})"),
            Atom::Role(p, s, t) => write!(f, "{p}({s},{t})"),
        }
    }
}

/// A finite set of facts `A(a)`, `top(a)` and `r(a,b)`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Database {
    facts: BTreeSet<Fact>,
}

impl Database {
    pub fn new() -> Self {
        Database::default()
    }

    pub fn from_facts<I: IntoIterator<Item = Fact>>(facts: I) -> Self {
        Database {
            facts: facts.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn extend<I: IntoIterator<Item = Fact>>(&mut self, facts: I) {
        self.facts.extend(facts);
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Constants occurring in some fact.
    pub fn adom(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for f in &self.facts {
            for t in f.terms() {
                out.insert(t.clone());
            }
        }
        out
    }

    /// Concept and role names, excluding the reserved `top`.
    pub fn signature(&self) -> BTreeSet<Sym> {
        self.facts
            .iter()
            .filter(|f| !f.is_top())
            .map(|f| f.pred().clone())
            .collect()
    }

    pub fn role_facts(&self) -> impl Iterator<Item = (&Sym, &Sym, &Sym)> {
        self.facts.iter().filter_map(|f| match f {
            Atom::Role(r, a, b) => Some((r, a, b)),
            Atom::Concept(..) => None,
        })
    }

    pub fn concept_facts(&self) -> impl Iterator<Item = (&Sym, &Sym)> {
        self.facts.iter().filter_map(|f| match f {
            Atom::Concept(p, a) if p.as_str() != TOP_NAME => Some((p, a)),
            _ => None,
        })
    }

    /// Facts whose constants all lie in `keep`; constants of `keep` that
    /// would disappear are retained through `top` facts.
    pub fn restrict(&self, keep: &BTreeSet<Sym>) -> Database {
        let mut out = Database::from_facts(
            self.facts
                .iter()
                .filter(|f| f.terms().iter().all(|t| keep.contains(*t)))
                .cloned(),
        );
        let adom = self.adom();
        for c in keep {
            if adom.contains(c) {
                out.insert(Atom::Concept(Sym::new(TOP_NAME), c.clone()));
            }
        }
        out.drop_redundant_tops();
        out
    }

    /// Applies `map` to constants; constants outside its domain are kept.
    pub fn rename(&self, map: &BTreeMap<Sym, Sym>) -> Database {
        let mut out = Database::from_facts(self.facts.iter().map(|f| f.rename(map)));
        out.drop_redundant_tops();
        out
    }

    pub fn union(&self, other: &Database) -> Database {
        let mut out = self.clone();
        out.facts.extend(other.facts.iter().cloned());
        out.drop_redundant_tops();
        out
    }

    /// Removes `top(a)` when `a` occurs in another fact.
    pub fn drop_redundant_tops(&mut self) {
        let mut covered = BTreeSet::new();
        for f in &self.facts {
            if !f.is_top() {
                for t in f.terms() {
                    covered.insert(t.clone());
                }
            }
        }
        self.facts
            .retain(|f| !(f.is_top() && covered.contains(f.terms()[0])));
    }

    /// Neighbours of every constant in the undirected Gaifman graph,
    /// ignoring self-loops.
    pub fn gaifman(&self) -> BTreeMap<Sym, BTreeSet<Sym>> {
        let mut g: BTreeMap<Sym, BTreeSet<Sym>> = BTreeMap::new();
        for c in self.adom() {
            g.entry(c).or_default();
        }
        for (_, a, b) in self.role_facts() {
            if a != b {
                g.entry(a.clone()).or_default().insert(b.clone());
                g.entry(b.clone()).or_default().insert(a.clone());
            }
        }
        g
    }
}

impl fmt::Debug for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.facts).finish()
    }
}

impl FromIterator<Fact> for Database {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        Database::from_facts(iter)
    }
}
