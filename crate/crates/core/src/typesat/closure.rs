use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::kernel::{Concept, Role, Sym, TOP_NAME};

/// Hard ceiling from the bitmask width, independent of configured limits.
pub const MAX_ATOMS: usize = 64;

/// A concept compiled over closure atoms. Atoms are concept names and
/// existential restrictions; every other constructor is boolean.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Core {
    Const(bool),
    Atom(u32),
    Not(Box<Core>),
    And(Vec<Core>),
    Or(Vec<Core>),
}

impl Core {
    pub fn negate(self) -> Core {
        match self {
            Core::Const(b) => Core::Const(!b),
            Core::Not(inner) => *inner,
            other => Core::Not(Box::new(other)),
        }
    }

    pub fn eval(&self, t: u64) -> bool {
        match self {
            Core::Const(b) => *b,
            Core::Atom(i) => t >> i & 1 == 1,
            Core::Not(c) => !c.eval(t),
            Core::And(cs) => cs.iter().all(|c| c.eval(t)),
            Core::Or(cs) => cs.iter().any(|c| c.eval(t)),
        }
    }

    /// Three-valued evaluation: only atoms in `known` are decided.
    pub fn eval3(&self, t: u64, known: u64) -> Option<bool> {
        match self {
            Core::Const(b) => Some(*b),
            Core::Atom(i) => (known >> i & 1 == 1).then_some(t >> i & 1 == 1),
            Core::Not(c) => c.eval3(t, known).map(|b| !b),
            Core::And(cs) => {
                let mut all = Some(true);
                for c in cs {
                    match c.eval3(t, known) {
                        Some(false) => return Some(false),
                        None => all = None,
                        Some(true) => {}
                    }
                }
                all
            }
            Core::Or(cs) => {
                let mut any = Some(false);
                for c in cs {
                    match c.eval3(t, known) {
                        Some(true) => return Some(true),
                        None => any = None,
                        Some(false) => {}
                    }
                }
                any
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ClAtom {
    Name(Sym),
    Exists(Role, Core),
}

/// Masks describing how a role relates two types: `fwd` holds the atoms
/// `∃r.E` and `bwd` the atoms `∃r⁻.E`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Edge {
    pub fwd: u64,
    pub bwd: u64,
}

impl Edge {
    pub fn is_trivial(&self) -> bool {
        self.fwd == 0 && self.bwd == 0
    }

    pub fn inv(self) -> Edge {
        Edge {
            fwd: self.bwd,
            bwd: self.fwd,
        }
    }
}

/// The closure atoms of a set of concepts, interned in first-use order.
#[derive(Clone, Debug, Default)]
pub struct Closure {
    atoms: Vec<ClAtom>,
    index: HashMap<ClAtom, u32>,
    names: BTreeMap<Sym, u32>,
}

impl Closure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[ClAtom] {
        &self.atoms
    }

    pub fn name_atom(&self, name: &Sym) -> Option<u32> {
        self.names.get(name).copied()
    }

    pub fn names(&self) -> &BTreeMap<Sym, u32> {
        &self.names
    }

    fn intern(&mut self, a: ClAtom) -> Result<u32> {
        if let Some(&i) = self.index.get(&a) {
            return Ok(i);
        }
        if self.atoms.len() >= MAX_ATOMS {
            return Err(Error::guard(format!(
                "type closure exceeds {MAX_ATOMS} atoms"
            )));
        }
        let i = self.atoms.len() as u32;
        if let ClAtom::Name(n) = &a {
            self.names.insert(n.clone(), i);
        }
        self.atoms.push(a.clone());
        self.index.insert(a, i);
        Ok(i)
    }

    /// Compiles `c`, adding its atoms to the closure.
    pub fn add(&mut self, c: &Concept) -> Result<Core> {
        Ok(match c {
            Concept::Top => Core::Const(true),
            Concept::Bot => Core::Const(false),
            Concept::Name(n) if n.as_str() == TOP_NAME => Core::Const(true),
            Concept::Name(n) => Core::Atom(self.intern(ClAtom::Name(n.clone()))?),
            Concept::Not(inner) => self.add(inner)?.negate(),
            Concept::And(_, _) => {
                let mut parts = Vec::new();
                for p in flatten(c, true) {
                    match self.add(p)? {
                        Core::Const(true) => {}
                        Core::Const(false) => return Ok(Core::Const(false)),
                        Core::And(more) => parts.extend(more),
                        other => parts.push(other),
                    }
                }
                match parts.len() {
                    0 => Core::Const(true),
                    1 => parts.pop().expect("one part"),
                    _ => Core::And(parts),
                }
            }
            Concept::Or(_, _) => {
                let mut parts = Vec::new();
                for p in flatten(c, false) {
                    match self.add(p)? {
                        Core::Const(false) => {}
                        Core::Const(true) => return Ok(Core::Const(true)),
                        Core::Or(more) => parts.extend(more),
                        other => parts.push(other),
                    }
                }
                match parts.len() {
                    0 => Core::Const(false),
                    1 => parts.pop().expect("one part"),
                    _ => Core::Or(parts),
                }
            }
            Concept::Exists(r, inner) => {
                let body = self.add(inner)?;
                if body == Core::Const(false) {
                    return Ok(Core::Const(false));
                }
                Core::Atom(self.intern(ClAtom::Exists(r.clone(), body))?)
            }
            Concept::Forall(r, inner) => {
                let body = self.add(inner)?.negate();
                if body == Core::Const(false) {
                    return Ok(Core::Const(true));
                }
                Core::Atom(self.intern(ClAtom::Exists(r.clone(), body))?).negate()
            }
        })
    }

    /// The edge masks for facts `r(a,b)` with role name `r`.
    pub fn edge(&self, r: &Sym) -> Edge {
        let mut e = Edge::default();
        for (i, a) in self.atoms.iter().enumerate() {
            if let ClAtom::Exists(Role::Named { name, inverse }, _) = a {
                if name == r {
                    if *inverse {
                        e.bwd |= 1 << i;
                    } else {
                        e.fwd |= 1 << i;
                    }
                }
            }
        }
        e
    }

    /// The edge masks for a role, as seen from the source element.
    pub fn role_edge(&self, r: &Role) -> Edge {
        match r {
            Role::Named { name, inverse } => {
                let e = self.edge(name);
                if *inverse {
                    e.inv()
                } else {
                    e
                }
            }
            Role::Universal => Edge::default(),
        }
    }

    /// Mask of the atoms `∃u.E`.
    pub fn universal_mask(&self) -> u64 {
        self.mask_where(|a| matches!(a, ClAtom::Exists(Role::Universal, _)))
    }

    /// Mask of all existential atoms over named roles.
    pub fn exists_mask(&self) -> u64 {
        self.mask_where(|a| matches!(a, ClAtom::Exists(Role::Named { .. }, _)))
    }

    fn mask_where(&self, pred: impl Fn(&ClAtom) -> bool) -> u64 {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| pred(a))
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Bits of the existential atoms whose body holds in `t`.
    pub fn body_bits(&self, t: u64) -> u64 {
        let mut out = 0;
        for (i, a) in self.atoms.iter().enumerate() {
            if let ClAtom::Exists(_, body) = a {
                if body.eval(t) {
                    out |= 1 << i;
                }
            }
        }
        out
    }

    /// Readable form of a type, for diagnostics.
    pub fn describe(&self, t: u64) -> String {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = match a {
                    ClAtom::Name(n) => n.to_string(),
                    ClAtom::Exists(r, _) => format!("ex{r}#{i}"),
                };
                if t >> i & 1 == 1 {
                    s
                } else {
                    format!("~{s}")
                }
            })
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

fn flatten(c: &Concept, conj: bool) -> Vec<&Concept> {
    let mut out = Vec::new();
    let mut stack = vec![c];
    while let Some(x) = stack.pop() {
        match (x, conj) {
            (Concept::And(a, b), true) | (Concept::Or(a, b), false) => {
                stack.push(b);
                stack.push(a);
            }
            _ => out.push(x),
        }
    }
    out
}
