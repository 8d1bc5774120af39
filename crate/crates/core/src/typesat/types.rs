use std::collections::HashMap;

use super::closure::{ClAtom, Closure, Core, Edge};
use crate::error::{Error, Result};
use crate::kernel::{Concept, Ontology, Role};

/// The surviving types under one guess of which `∃u.E` atoms hold.
#[derive(Clone, Debug)]
pub struct TypeTable {
    /// The universal atoms true in every type of this table.
    pub guess: u64,
    pub types: Vec<u64>,
    /// Existential atoms whose body holds in each type.
    body: Vec<u64>,
}

impl TypeTable {
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Whether the types `i` and `j` may be joined by a role with masks `e`
    /// pointing from `i` to `j`.
    #[inline]
    pub fn compat(&self, e: Edge, i: usize, j: usize) -> bool {
        let (ti, tj) = (self.types[i], self.types[j]);
        self.body[j] & e.fwd & !ti == 0 && self.body[i] & e.bwd & !tj == 0
    }

    pub fn body(&self, i: usize) -> u64 {
        self.body[i]
    }

    /// Key of type `i` as a source of `e`: what it offers to any successor.
    #[inline]
    pub fn source_key(&self, e: Edge, i: usize) -> (u64, u64) {
        (self.types[i] & e.fwd, self.body[i] & e.bwd)
    }

    /// Key of type `j` as a target of `e`.
    #[inline]
    pub fn target_key(&self, e: Edge, j: usize) -> (u64, u64) {
        (self.body[j] & e.fwd, self.types[j] & e.bwd)
    }
}

/// Compatibility of a source key with a target key, see [`TypeTable::compat`].
#[inline]
pub fn keys_compat(src: (u64, u64), dst: (u64, u64)) -> bool {
    dst.0 & !src.0 == 0 && src.1 & !dst.1 == 0
}

/// All types for a set of constraints, one table per consistent guess.
#[derive(Clone, Debug)]
pub struct TypeSystem {
    pub closure: Closure,
    /// Concepts that hold at every element: internalized CIs and globals.
    pub constraints: Vec<Core>,
    pub tables: Vec<TypeTable>,
}

impl TypeSystem {
    /// Builds the types for `o` together with the extra concepts (compiled
    /// into the closure; their handles are returned in order) and the
    /// global concepts, which are required at every element.
    pub fn for_ontology(
        o: &Ontology,
        extra: &[Concept],
        globals: &[Concept],
        max_closure: usize,
    ) -> Result<(TypeSystem, Vec<Core>)> {
        let mut closure = Closure::new();
        let mut constraints = Vec::new();
        for c in o.internalized() {
            constraints.push(closure.add(&c)?);
        }
        for g in globals {
            constraints.push(closure.add(g)?);
        }
        let mut handles = Vec::new();
        for c in extra {
            handles.push(closure.add(c)?);
        }
        Ok((Self::build(closure, constraints, max_closure)?, handles))
    }

    pub fn build(closure: Closure, constraints: Vec<Core>, max_closure: usize) -> Result<TypeSystem> {
        if closure.len() > max_closure {
            return Err(Error::guard(format!(
                "type closure has {} atoms, limit is {max_closure}",
                closure.len()
            )));
        }
        let umask = closure.universal_mask();
        let ubits: Vec<u32> = (0..closure.len() as u32).filter(|&i| umask >> i & 1 == 1).collect();
        let mut tables = Vec::new();
        for g in 0u64..(1u64 << ubits.len()) {
            let guess = ubits
                .iter()
                .enumerate()
                .filter(|(j, _)| g >> j & 1 == 1)
                .fold(0u64, |m, (_, &i)| m | 1 << i);
            let mut local = constraints.clone();
            for &i in &ubits {
                if guess >> i & 1 == 0 {
                    if let ClAtom::Exists(_, body) = &closure.atoms()[i as usize] {
                        local.push(body.clone().negate());
                    }
                }
            }
            let types = enumerate(closure.len(), umask, guess, &local);
            if let Some(t) = eliminate(&closure, types, guess) {
                tables.push(t);
            }
        }
        Ok(TypeSystem {
            closure,
            constraints,
            tables,
        })
    }

    /// Whether some element can exist at all.
    pub fn satisfiable(&self) -> bool {
        !self.tables.is_empty()
    }

    pub fn edge(&self, r: &Role) -> Edge {
        self.closure.role_edge(r)
    }
}

/// Hintikka enumeration: all assignments to the atoms, with the universal
/// atoms fixed to `guess`, under which every constraint holds.
fn enumerate(n: usize, umask: u64, guess: u64, constraints: &[Core]) -> Vec<u64> {
    let free: Vec<u32> = (0..n as u32).filter(|&i| umask >> i & 1 == 0).collect();
    let mut out = Vec::new();
    let mut stack = vec![(0usize, guess, umask)];
    while let Some((depth, t, known)) = stack.pop() {
        if constraints.iter().any(|c| c.eval3(t, known) == Some(false)) {
            continue;
        }
        if depth == free.len() {
            out.push(t);
            continue;
        }
        let bit = 1u64 << free[depth];
        stack.push((depth + 1, t | bit, known | bit));
        stack.push((depth + 1, t, known | bit));
    }
    out.sort_unstable();
    out
}

/// Removes types with an unwitnessed existential atom until stable; `None`
/// when nothing survives or a guessed universal atom lacks a witness.
fn eliminate(closure: &Closure, mut types: Vec<u64>, guess: u64) -> Option<TypeTable> {
    let exists: Vec<(u32, Edge)> = closure
        .atoms()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| match a {
            ClAtom::Exists(r @ Role::Named { .. }, _) => Some((i as u32, closure.role_edge(r))),
            _ => None,
        })
        .collect();
    let mut edges: Vec<Edge> = exists.iter().map(|&(_, e)| e).collect();
    edges.sort_by_key(|e| (e.fwd, e.bwd));
    edges.dedup();
    loop {
        let body: Vec<u64> = types.iter().map(|&t| closure.body_bits(t)).collect();
        let table = TypeTable {
            guess,
            types: types.clone(),
            body,
        };
        // Distinct target keys per edge kind among the current types.
        let groups: HashMap<Edge, Vec<(u64, u64)>> = edges
            .iter()
            .map(|&e| {
                let mut keys: Vec<(u64, u64)> = (0..table.len()).map(|j| table.target_key(e, j)).collect();
                keys.sort_unstable();
                keys.dedup();
                (e, keys)
            })
            .collect();
        let keep: Vec<bool> = (0..table.len())
            .map(|i| {
                let t = table.types[i];
                exists.iter().all(|&(bit, e)| {
                    if t >> bit & 1 == 0 {
                        return true;
                    }
                    let src = table.source_key(e, i);
                    groups[&e]
                        .iter()
                        .any(|&dst| dst.0 >> bit & 1 == 1 && keys_compat(src, dst))
                })
            })
            .collect();
        if keep.iter().all(|&k| k) {
            if table.is_empty() {
                return None;
            }
            let witnessed = (0..64)
                .filter(|i| guess >> i & 1 == 1)
                .all(|i| table.body.iter().any(|b| b >> i & 1 == 1));
            return witnessed.then_some(table);
        }
        types = types
            .into_iter()
            .zip(keep)
            .filter_map(|(t, k)| k.then_some(t))
            .collect();
    }
}
