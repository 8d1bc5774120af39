use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{Atom, Database, Sym};

/// Generator of constants `$f0`, `$f1`, ... that avoid a given set.
#[derive(Debug, Clone)]
pub struct Fresh {
    next: usize,
    avoid: BTreeSet<Sym>,
}

impl Fresh {
    pub fn avoiding(avoid: BTreeSet<Sym>) -> Self {
        Fresh { next: 0, avoid }
    }

    pub fn next_sym(&mut self) -> Sym {
        loop {
            let s = Sym::from(format!("$f{}", self.next));
            self.next += 1;
            if !self.avoid.contains(&s) {
                return s;
            }
        }
    }
}

/// Adds a copy of `atoms` to `d`: terms in `fixed` are mapped as given,
/// all others to fresh constants.
pub fn add_copy(d: &mut Database, atoms: &BTreeSet<Atom>, fixed: &BTreeMap<Sym, Sym>, fresh: &mut Fresh) {
    let mut map = fixed.clone();
    for a in atoms {
        for t in a.terms() {
            if !map.contains_key(t) {
                map.insert(t.clone(), fresh.next_sym());
            }
        }
    }
    d.extend(atoms.iter().map(|a| a.rename(&map)));
}

/// All tuples of the given arity over `adom`.
pub fn all_tuples(adom: &BTreeSet<Sym>, arity: usize) -> BTreeSet<Vec<Sym>> {
    let mut out = BTreeSet::from([Vec::new()]);
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                adom.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.clone());
                    t
                })
            })
            .collect();
    }
    out
}
