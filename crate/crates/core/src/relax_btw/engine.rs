//! The assignment-elimination procedure deciding certain answers over the
//! (ℓ,k)-unraveling of a database up to a set S of anchored constants.
//!
//! An L-assignment (S ⊆ L, |L∖S| ≤ ℓ) gives every constant of L a type
//! and decides the instantiations of query pieces over L. Assignments are
//! removed until every survivor extends, inside every maximal K ⊇ L, to a
//! consistent choice of assignments for all L' ⊆ K. The query is entailed
//! iff some L is left without assignments (or, for a probe, iff every
//! survivor at the probed constant satisfies it).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::kernel::{Atom, Concept, Cq, Database, Ontology, Sym};
use crate::querytools::{add_copy, entails, eval_cq, Fresh};
use crate::typesat::{Core, Edge, TypeSystem, TypeTable};

/// Most free instantiations one assignment may decide.
const MAX_FREE_BITS: usize = 64;

/// Most implication-closed instantiation vectors per set L.
const MAX_VECTORS: usize = 1 << 14;

/// What the elimination is asked to refute.
#[derive(Debug, Clone, Default)]
pub struct Problem {
    /// Boolean ELIQs refuted at every element.
    pub globals: Vec<Concept>,
    /// ELIQs refuted at a constant of S.
    pub targets: Vec<(Sym, Concept)>,
    /// Connected Boolean CQs that must not hold.
    pub forbidden: Vec<Cq>,
    /// Query pieces decided by the assignments, connected and non-Boolean.
    pub pieces: Vec<Cq>,
    /// Unary question at one constant outside S, decided on the survivors.
    pub probe: Option<Probe>,
}

#[derive(Debug, Clone)]
pub enum Probe {
    Concept(Sym, Concept),
    /// Holds iff one of the given unary pieces holds at the constant.
    Pieces(Sym, Vec<Cq>),
}

#[derive(Debug, Clone)]
enum Kind {
    /// Unary tree-shaped piece, decided by the type of its constant.
    Linked(Core),
    /// No quantified variables: decided by the facts among its constants.
    Ground,
    /// Decided per assignment.
    Free,
}

#[derive(Debug, Clone)]
struct Piece {
    cq: Cq,
    kind: Kind,
}

#[derive(Debug, Clone)]
struct Assign {
    types: Vec<u32>,
    bits: u64,
}

enum ProbeCheck {
    Concept(Core),
    Pieces(Vec<usize>),
}

/// Element indices for the constants; every L and K is a sorted index list.
struct Layout {
    consts: Vec<Sym>,
    s: Vec<usize>,
    ls: Vec<Vec<usize>>,
    l_id: HashMap<Vec<usize>, usize>,
    ks: Vec<Vec<usize>>,
    /// Per K: the ids of all L ⊆ K.
    ls_in_k: Vec<Vec<usize>>,
    /// Per L: the ids of all K ⊇ L.
    ks_of_l: Vec<Vec<usize>>,
}

fn subsets_upto(items: &[usize], hi: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &x in items {
        let mut more = Vec::new();
        for s in &out {
            if s.len() < hi {
                let mut t = s.clone();
                t.push(x);
                more.push(t);
            }
        }
        out.extend(more);
    }
    out
}

fn contains_all(big: &[usize], small: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

impl Layout {
    /// Only maximal K are listed: a choice for K restricts to every subset.
    fn new(d: &Database, s: &BTreeSet<Sym>, extra: Option<&Sym>, l: usize, k: usize) -> Self {
        let mut all = d.adom();
        all.extend(s.iter().cloned());
        all.extend(extra.cloned());
        let consts: Vec<Sym> = all.into_iter().collect();
        let s_idx: Vec<usize> = (0..consts.len()).filter(|&i| s.contains(&consts[i])).collect();
        let rest: Vec<usize> = (0..consts.len()).filter(|&i| !s.contains(&consts[i])).collect();
        let with_s = |x: &Vec<usize>| {
            let mut v: Vec<usize> = s_idx.iter().chain(x.iter()).copied().collect();
            v.sort_unstable();
            v
        };
        let ls: Vec<Vec<usize>> = subsets_upto(&rest, l).iter().map(with_s).collect();
        let width = k.min(rest.len());
        let ks: Vec<Vec<usize>> = subsets_upto(&rest, width)
            .iter()
            .filter(|x| x.len() == width)
            .map(with_s)
            .collect();
        let l_id = ls.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let ls_in_k = ks
            .iter()
            .map(|kk| (0..ls.len()).filter(|&i| contains_all(kk, &ls[i])).collect())
            .collect();
        let ks_of_l = ls
            .iter()
            .map(|ll| (0..ks.len()).filter(|&j| contains_all(&ks[j], ll)).collect())
            .collect();
        Layout {
            consts,
            s: s_idx,
            ls,
            l_id,
            ks,
            ls_in_k,
            ks_of_l,
        }
    }

    fn singleton(&self, c: usize) -> usize {
        let mut v = self.s.clone();
        if !v.contains(&c) {
            v.push(c);
            v.sort_unstable();
        }
        self.l_id[&v]
    }

    fn s_key(&self, l: usize, types: &[u32]) -> Vec<u32> {
        self.ls[l]
            .iter()
            .zip(types)
            .filter(|(i, _)| self.s.binary_search(i).is_ok())
            .map(|(_, &t)| t)
            .collect()
    }
}

/// The facts of the database, indexed for the local type checks.
struct Facts {
    /// Closure bits required by concept facts, per element.
    need: Vec<u64>,
    /// Combined edges per pair i < j, oriented from i to j.
    pairs: HashMap<(usize, usize), Edge>,
    loops: Vec<Vec<Edge>>,
}

impl Facts {
    fn new(sys: &TypeSystem, d: &Database, layout: &Layout) -> Self {
        let n = layout.consts.len();
        let pos: HashMap<&Sym, usize> = layout.consts.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let mut need = vec![0u64; n];
        for (a, c) in d.concept_facts() {
            if let Some(bit) = sys.closure.name_atom(a) {
                need[pos[c]] |= 1 << bit;
            }
        }
        let mut pairs: HashMap<(usize, usize), Edge> = HashMap::new();
        let mut loops = vec![Vec::new(); n];
        for (r, a, b) in d.role_facts() {
            let e = sys.closure.edge(r);
            let (i, j) = (pos[a], pos[b]);
            if i == j {
                loops[i].push(e);
                continue;
            }
            let (key, e) = if i < j { ((i, j), e) } else { ((j, i), e.inv()) };
            let slot = pairs.entry(key).or_default();
            slot.fwd |= e.fwd;
            slot.bwd |= e.bwd;
        }
        Facts { need, pairs, loops }
    }

    fn type_ok(&self, table: &TypeTable, i: usize, t: u32) -> bool {
        let ty = table.types[t as usize];
        ty & self.need[i] == self.need[i]
            && self.loops[i].iter().all(|&e| table.compat(e, t as usize, t as usize))
    }

    fn pair_ok(&self, table: &TypeTable, i: usize, ti: u32, j: usize, tj: u32) -> bool {
        let (key, a, b) = if i < j { ((i, j), ti, tj) } else { ((j, i), tj, ti) };
        match self.pairs.get(&key) {
            Some(&e) => table.compat(e, a as usize, b as usize),
            None => true,
        }
    }
}

/// All injective tuples of length `m` over `items`.
fn injective_tuples(items: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for t in &out {
            for &x in items.iter().filter(|x| !t.contains(x)) {
                let mut t = t.clone();
                t.push(x);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Survivors of the elimination for one type table.
struct Gamma {
    assigns: Vec<Vec<Assign>>,
    alive: Vec<Vec<bool>>,
    /// Per L: alive assignments grouped by their full type tuple.
    by_types: Vec<HashMap<Vec<u32>, Vec<usize>>>,
    /// Per L: alive assignments grouped by the types on S.
    by_s: Vec<HashMap<Vec<u32>, Vec<usize>>>,
}

impl Gamma {
    fn reindex(&mut self, layout: &Layout) {
        let n = self.assigns.len();
        self.by_types = Vec::with_capacity(n);
        self.by_s = Vec::with_capacity(n);
        for l in 0..n {
            let mut full: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
            let mut part: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
            for (i, a) in self.assigns[l].iter().enumerate() {
                if self.alive[l][i] {
                    full.entry(a.types.clone()).or_default().push(i);
                    part.entry(layout.s_key(l, &a.types)).or_default().push(i);
                }
            }
            self.by_types.push(full);
            self.by_s.push(part);
        }
    }

    fn some_empty(&self) -> bool {
        self.alive.iter().any(|v| !v.contains(&true))
    }
}

struct Engine<'a> {
    ctx: &'a Ctx,
    sys: &'a TypeSystem,
    d: &'a Database,
    layout: Layout,
    facts: Facts,
    pieces: Vec<Piece>,
    forbidden: &'a [Cq],
    targets: Vec<(usize, Core)>,
    probe: Option<(usize, ProbeCheck)>,
    /// Per L: the free instantiations (piece, tuple) it decides.
    insts: Vec<Vec<(usize, Vec<usize>)>>,
}

impl Engine<'_> {
    fn pieces_mode(&self) -> bool {
        !self.pieces.is_empty() || !self.forbidden.is_empty()
    }

    /// D restricted to `elems`, with the concept names of the chosen types.
    fn labelled(&self, table: &TypeTable, elems: &[usize], types: &HashMap<usize, u32>) -> Database {
        let keep: BTreeSet<Sym> = elems.iter().map(|&i| self.layout.consts[i].clone()).collect();
        let mut db = self.d.restrict(&keep);
        for &i in elems {
            let t = table.types[types[&i] as usize];
            for (n, &bit) in self.sys.closure.names() {
                if t >> bit & 1 == 1 {
                    db.insert(Atom::Concept(n.clone(), self.layout.consts[i].clone()));
                }
            }
        }
        db
    }

    /// Consistency of a choice beyond the types: builds the canonical
    /// database from the labelled restriction and copies of every positive
    /// instantiation, then checks that no forbidden query holds and that
    /// every free piece holding over a chosen set is marked positive there.
    fn closed(
        &self,
        table: &TypeTable,
        elems: &[usize],
        types: &HashMap<usize, u32>,
        chosen: &[(usize, &Assign)],
    ) -> bool {
        let base = self.labelled(table, elems, types);
        let mut db = base.clone();
        let mut fresh = Fresh::avoiding(self.layout.consts.iter().cloned().collect());
        let mut glue = |db: &mut Database, piece: &Cq, tuple: &[usize]| -> bool {
            let fixed: BTreeMap<Sym, Sym> = piece
                .answer
                .iter()
                .zip(tuple)
                .map(|(x, &c)| (x.clone(), self.layout.consts[c].clone()))
                .collect();
            // Atoms among the answer variables live inside the bag.
            for at in &piece.atoms {
                if at.terms().iter().all(|t| fixed.contains_key(*t)) && !base.contains(&at.rename(&fixed)) {
                    return false;
                }
            }
            add_copy(db, &piece.atoms, &fixed, &mut fresh);
            true
        };
        for piece in &self.pieces {
            if let Kind::Linked(core) = &piece.kind {
                for &i in elems {
                    if core.eval(table.types[types[&i] as usize]) {
                        glue(&mut db, &piece.cq, &[i]);
                    }
                }
            }
        }
        for &(l, a) in chosen {
            for (b, (p, tuple)) in self.insts[l].iter().enumerate() {
                if a.bits >> b & 1 == 1 && !glue(&mut db, &self.pieces[*p].cq, tuple) {
                    return false;
                }
            }
        }
        if self.forbidden.iter().any(|q| entails(&db, q, &[])) {
            return false;
        }
        let pos: HashMap<&Sym, usize> = elems.iter().map(|&i| (&self.layout.consts[i], i)).collect();
        for (pi, piece) in self.pieces.iter().enumerate() {
            if !matches!(piece.kind, Kind::Free) {
                continue;
            }
            for ans in eval_cq(&db, &piece.cq) {
                let Some(tuple) = ans.iter().map(|c| pos.get(c).copied()).collect::<Option<Vec<usize>>>() else {
                    continue;
                };
                for &(l, a) in chosen {
                    if !contains_all(&self.layout.ls[l], &tuple) {
                        continue;
                    }
                    let Some(bit) = self.insts[l].iter().position(|(p, t)| *p == pi && *t == tuple) else {
                        // Non-injective answers are covered by contracted pieces.
                        continue;
                    };
                    if a.bits >> bit & 1 == 0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn assignment_guard(&self, n: usize) -> Result<()> {
        if n > self.ctx.limits.max_assignments {
            return Err(Error::guard(format!(
                "more than {} assignments for one set L",
                self.ctx.limits.max_assignments
            )));
        }
        Ok(())
    }

    /// All locally consistent assignments for L.
    fn initial(&self, table: &TypeTable, l: usize) -> Result<Vec<Assign>> {
        let elems = &self.layout.ls[l];
        let mut tuples: Vec<Vec<u32>> = vec![Vec::new()];
        for (pos, &i) in elems.iter().enumerate() {
            let mut next = Vec::new();
            for t in &tuples {
                for ty in 0..table.len() as u32 {
                    let bits = table.types[ty as usize];
                    if !self.facts.type_ok(table, i, ty)
                        || self.targets.iter().any(|(c, core)| *c == i && core.eval(bits))
                        || !(0..pos).all(|p| self.facts.pair_ok(table, elems[p], t[p], i, ty))
                    {
                        continue;
                    }
                    let mut t2 = t.clone();
                    t2.push(ty);
                    next.push(t2);
                }
            }
            tuples = next;
            self.assignment_guard(tuples.len())?;
        }
        let vectors = if self.pieces_mode() { self.closed_vectors(l)? } else { Vec::new() };
        let mut out = Vec::new();
        for t in tuples {
            let types: HashMap<usize, u32> = elems.iter().copied().zip(t.iter().copied()).collect();
            if !self.pieces_mode() {
                out.push(Assign { types: t, bits: 0 });
                continue;
            }
            for &bits in &vectors {
                let a = Assign { types: t.clone(), bits };
                if self.closed(table, elems, &types, &[(l, &a)]) {
                    out.push(a);
                }
            }
            self.assignment_guard(out.len())?;
        }
        Ok(out)
    }

    /// Instantiation vectors over L that are closed under implication: a
    /// positive instantiation whose copy entails another forces it.
    fn closed_vectors(&self, l: usize) -> Result<Vec<u64>> {
        let insts = &self.insts[l];
        let n = insts.len();
        if n > MAX_FREE_BITS {
            return Err(Error::guard(format!(
                "{n} free query instantiations over one set L, limit is {MAX_FREE_BITS}"
            )));
        }
        let name = |c: usize| self.layout.consts[c].clone();
        let mut implies = vec![0u64; n];
        for (i, (p, t)) in insts.iter().enumerate() {
            let piece = &self.pieces[*p].cq;
            let fixed: BTreeMap<Sym, Sym> = piece.answer.iter().cloned().zip(t.iter().map(|&c| name(c))).collect();
            let mut db = Database::new();
            let mut fresh = Fresh::avoiding(self.layout.consts.iter().cloned().collect());
            add_copy(&mut db, &piece.atoms, &fixed, &mut fresh);
            for (j, (p2, t2)) in insts.iter().enumerate() {
                if i == j || (t2.iter().all(|c| t.contains(c)) && {
                    let tuple: Vec<Sym> = t2.iter().map(|&c| name(c)).collect();
                    entails(&db, &self.pieces[*p2].cq, &tuple)
                }) {
                    implies[i] |= 1 << j;
                }
            }
        }
        let implied_by: Vec<u64> = (0..n)
            .map(|j| (0..n).filter(|&i| implies[i] >> j & 1 == 1).fold(0u64, |m, i| m | 1 << i))
            .collect();
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0u64, 0u64)];
        while let Some((i, ones, zeros)) = stack.pop() {
            if i == n {
                out.push(ones);
                if out.len() > MAX_VECTORS {
                    return Err(Error::guard(format!(
                        "more than {MAX_VECTORS} instantiation vectors over one set L"
                    )));
                }
                continue;
            }
            if (ones | zeros) >> i & 1 == 1 {
                stack.push((i + 1, ones, zeros));
                continue;
            }
            let z = zeros | implied_by[i];
            if z & ones == 0 {
                stack.push((i + 1, ones, z));
            }
            let o = ones | implies[i];
            if o & zeros == 0 {
                stack.push((i + 1, o, zeros));
            }
        }
        Ok(out)
    }

    /// Whether assignment `m` of L `l` extends to a consistent choice for K.
    fn extends(&self, table: &TypeTable, g: &Gamma, l: usize, m: usize, kk: usize) -> bool {
        let layout = &self.layout;
        let mu = &g.assigns[l][m];
        let mut types: HashMap<usize, u32> = layout.ls[l].iter().copied().zip(mu.types.iter().copied()).collect();
        let s_key = layout.s_key(l, &mu.types);
        let mut doms: Vec<(usize, Vec<u32>)> = Vec::new();
        for &c in &layout.ks[kk] {
            if types.contains_key(&c) {
                continue;
            }
            let lid = layout.singleton(c);
            let pos = layout.ls[lid].iter().position(|&x| x == c).expect("c lies in its own L");
            let mut dom: Vec<u32> = g.by_s[lid]
                .get(&s_key)
                .map(|v| v.iter().map(|&i| g.assigns[lid][i].types[pos]).collect())
                .unwrap_or_default();
            dom.sort_unstable();
            dom.dedup();
            dom.retain(|&t| types.iter().all(|(&x, &tx)| self.facts.pair_ok(table, x, tx, c, t)));
            if dom.is_empty() {
                return false;
            }
            doms.push((c, dom));
        }
        doms.sort_by_key(|(c, d)| (d.len(), *c));
        // Sets other than μ's and the singletons get checked once fully typed.
        let others: Vec<usize> = layout.ls_in_k[kk]
            .iter()
            .copied()
            .filter(|&x| x != l && layout.ls[x].len() != layout.s.len() + 1)
            .collect();
        self.search_types(table, g, l, m, kk, &mut types, &doms, &others)
    }

    #[allow(clippy::too_many_arguments)]
    fn search_types(
        &self,
        table: &TypeTable,
        g: &Gamma,
        l: usize,
        m: usize,
        kk: usize,
        types: &mut HashMap<usize, u32>,
        doms: &[(usize, Vec<u32>)],
        others: &[usize],
    ) -> bool {
        for &x in others {
            let lset = &self.layout.ls[x];
            if lset.iter().all(|e| types.contains_key(e)) {
                let want: Vec<u32> = lset.iter().map(|e| types[e]).collect();
                if !g.by_types[x].contains_key(&want) {
                    return false;
                }
            }
        }
        let Some(((c, dom), rest)) = doms.split_first() else {
            return self.choose_bits(table, g, l, m, kk, types);
        };
        for &t in dom {
            if !types.iter().all(|(&x, &tx)| self.facts.pair_ok(table, x, tx, *c, t)) {
                continue;
            }
            types.insert(*c, t);
            if self.search_types(table, g, l, m, kk, types, rest, others) {
                return true;
            }
            types.remove(c);
        }
        false
    }

    /// With all types fixed, picks one alive assignment per L' ⊆ K and
    /// checks the canonical database of the choice.
    fn choose_bits(
        &self,
        table: &TypeTable,
        g: &Gamma,
        l: usize,
        m: usize,
        kk: usize,
        types: &HashMap<usize, u32>,
    ) -> bool {
        let layout = &self.layout;
        let others: Vec<usize> = layout.ls_in_k[kk].iter().copied().filter(|&x| x != l).collect();
        let mut options: Vec<Vec<usize>> = Vec::with_capacity(others.len());
        for &x in &others {
            let want: Vec<u32> = layout.ls[x].iter().map(|e| types[e]).collect();
            let Some(v) = g.by_types[x].get(&want) else {
                return false;
            };
            let mut v = v.clone();
            v.sort_by_key(|&i| g.assigns[x][i].bits.count_ones());
            options.push(v);
        }
        if !self.pieces_mode() {
            return true;
        }
        let k_elems = &layout.ks[kk];
        let mut pick = vec![0usize; others.len()];
        loop {
            let mut chosen: Vec<(usize, &Assign)> = vec![(l, &g.assigns[l][m])];
            for (j, &x) in others.iter().enumerate() {
                chosen.push((x, &g.assigns[x][options[j][pick[j]]]));
            }
            if self.closed(table, k_elems, types, &chosen) {
                return true;
            }
            let mut j = 0;
            loop {
                if j == pick.len() {
                    return false;
                }
                pick[j] += 1;
                if pick[j] < options[j].len() {
                    break;
                }
                pick[j] = 0;
                j += 1;
            }
        }
    }

    /// Runs the elimination to its greatest fixpoint.
    fn fixpoint(&self, table: &TypeTable) -> Result<Gamma> {
        let layout = &self.layout;
        let mut assigns = Vec::with_capacity(layout.ls.len());
        for l in 0..layout.ls.len() {
            assigns.push(self.initial(table, l)?);
        }
        self.ctx.stats.add_assignments(assigns.iter().map(Vec::len).sum());
        let alive = assigns.iter().map(|v| vec![true; v.len()]).collect();
        let mut g = Gamma {
            assigns,
            alive,
            by_types: Vec::new(),
            by_s: Vec::new(),
        };
        g.reindex(layout);
        while !g.some_empty() {
            let work: Vec<(usize, usize)> = (0..layout.ls.len())
                .flat_map(|l| {
                    let alive = &g.alive[l];
                    (0..alive.len()).filter(move |&m| alive[m]).map(move |m| (l, m))
                })
                .collect();
            let dead: Vec<(usize, usize)> = work
                .par_iter()
                .filter(|&&(l, m)| !layout.ks_of_l[l].iter().all(|&kk| self.extends(table, &g, l, m, kk)))
                .copied()
                .collect();
            if dead.is_empty() {
                break;
            }
            for (l, m) in dead {
                g.alive[l][m] = false;
            }
            g.reindex(layout);
        }
        Ok(g)
    }

    fn probe_holds(&self, table: &TypeTable, check: &ProbeCheck, lid: usize, c: usize, a: &Assign) -> bool {
        let pos = self.layout.ls[lid].iter().position(|&x| x == c).expect("probe constant in L");
        let ty = a.types[pos];
        match check {
            ProbeCheck::Concept(core) => core.eval(table.types[ty as usize]),
            ProbeCheck::Pieces(ps) => ps.iter().any(|&p| match &self.pieces[p].kind {
                Kind::Linked(core) => core.eval(table.types[ty as usize]),
                Kind::Ground => {
                    let types = HashMap::from([(c, ty)]);
                    let db = self.labelled(table, &[c], &types);
                    entails(&db, &self.pieces[p].cq, &[self.layout.consts[c].clone()])
                }
                Kind::Free => self.insts[lid]
                    .iter()
                    .position(|(q, t)| *q == p && t[..] == [c])
                    .is_some_and(|b| a.bits >> b & 1 == 1),
            }),
        }
    }

    /// Whether the survivors for this table describe a countermodel.
    fn refuted(&self, table: &TypeTable, g: &Gamma) -> bool {
        if g.some_empty() {
            return false;
        }
        let Some((c, check)) = &self.probe else {
            return true;
        };
        let lid = self.layout.singleton(*c);
        (0..g.assigns[lid].len())
            .filter(|&m| g.alive[lid][m])
            .any(|m| !self.probe_holds(table, check, lid, *c, &g.assigns[lid][m]))
    }
}

/// Decides whether the problem is entailed on the (ℓ,k)-unraveling of `d`
/// at `s` under `o`: true iff no countermodel survives the elimination.
pub fn entailed(
    ctx: &Ctx,
    o: &Ontology,
    d: &Database,
    s: &BTreeSet<Sym>,
    l: usize,
    k: usize,
    problem: &Problem,
) -> Result<bool> {
    if l == 0 || l >= k {
        return Err(Error::Invalid(format!("widths need 1 <= l < k, got l={l}, k={k}")));
    }
    let probe_const = problem.probe.as_ref().map(|p| match p {
        Probe::Concept(a, _) | Probe::Pieces(a, _) => a,
    });
    if let Some(a) = probe_const {
        if s.contains(a) {
            return Err(Error::Invalid(format!("probe constant {a} lies in S")));
        }
    }
    let layout = Layout::new(d, s, probe_const, l, k);
    if layout.consts.len() > ctx.limits.max_adom {
        return Err(Error::guard(format!(
            "{} constants, limit is {}",
            layout.consts.len(),
            ctx.limits.max_adom
        )));
    }

    // Linked pieces go into the type closure, but only when an ontology
    // can make them true through anonymous elements.
    let mut cqs: Vec<Cq> = Vec::new();
    let mut index: BTreeMap<Cq, usize> = BTreeMap::new();
    let mut add = |q: &Cq, cqs: &mut Vec<Cq>| -> usize {
        *index.entry(q.clone()).or_insert_with(|| {
            cqs.push(q.clone());
            cqs.len() - 1
        })
    };
    for q in &problem.pieces {
        add(q, &mut cqs);
    }
    let probe_ids: Vec<usize> = match &problem.probe {
        Some(Probe::Pieces(_, ps)) => ps.iter().map(|q| add(q, &mut cqs)).collect(),
        _ => Vec::new(),
    };
    let mut extra: Vec<Concept> = Vec::new();
    let mut linked_at: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, q) in cqs.iter().enumerate() {
        if !o.is_empty() && !q.quantified_vars().is_empty() && q.is_eliq() {
            linked_at.insert(i, extra.len());
            extra.push(q.to_concept().expect("ELIQ has a concept form"));
        }
    }
    let first_target = extra.len();
    extra.extend(problem.targets.iter().map(|(_, c)| c.clone()));
    if let Some(Probe::Concept(_, c)) = &problem.probe {
        extra.push(c.clone());
    }
    let globals: Vec<Concept> = problem.globals.iter().map(|c| Concept::not(c.clone())).collect();
    let (sys, handles) = TypeSystem::for_ontology(o, &extra, &globals, ctx.limits.max_closure)?;
    if sys.tables.is_empty() {
        return Ok(true);
    }

    let pieces: Vec<Piece> = cqs
        .into_iter()
        .enumerate()
        .map(|(i, cq)| {
            let kind = if let Some(&h) = linked_at.get(&i) {
                Kind::Linked(handles[h].clone())
            } else if cq.quantified_vars().is_empty() {
                Kind::Ground
            } else {
                Kind::Free
            };
            Piece { cq, kind }
        })
        .collect();
    let pos: HashMap<&Sym, usize> = layout.consts.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let targets: Vec<(usize, Core)> = problem
        .targets
        .iter()
        .enumerate()
        .map(|(j, (a, _))| (pos[a], handles[first_target + j].clone()))
        .collect();
    let probe = problem.probe.as_ref().map(|p| match p {
        Probe::Concept(a, _) => (pos[a], ProbeCheck::Concept(handles.last().expect("probe handle").clone())),
        Probe::Pieces(a, _) => (pos[a], ProbeCheck::Pieces(probe_ids.clone())),
    });
    // Without an ontology the unraveling maps onto D with K fixed, so an
    // instantiation that D does not entail is never positive.
    let possible = |p: &Piece, t: &[usize]| {
        let tuple: Vec<Sym> = t.iter().map(|&c| layout.consts[c].clone()).collect();
        !o.is_empty() || entails(d, &p.cq, &tuple)
    };
    let insts: Vec<Vec<(usize, Vec<usize>)>> = layout
        .ls
        .iter()
        .map(|lset| {
            let mut out = Vec::new();
            for (i, p) in pieces.iter().enumerate() {
                if matches!(p.kind, Kind::Free) {
                    for t in injective_tuples(lset, p.cq.arity()) {
                        if possible(p, &t) {
                            out.push((i, t));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let facts = Facts::new(&sys, d, &layout);
    let engine = Engine {
        ctx,
        sys: &sys,
        d,
        layout,
        facts,
        pieces,
        forbidden: &problem.forbidden,
        targets,
        probe,
        insts,
    };
    for table in &sys.tables {
        let g = engine.fixpoint(table)?;
        if engine.refuted(table, &g) {
            return Ok(false);
        }
    }
    Ok(true)
}
