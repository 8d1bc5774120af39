use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::kernel::{Atom, Cq, Database, Sym, TOP_NAME};

/// A database indexed for homomorphism search.
pub struct DbIndex {
    consts: Vec<Sym>,
    ids: HashMap<Sym, u32>,
    preds: HashMap<Sym, u32>,
    unary: HashSet<(u32, u32)>,
    unary_lists: HashMap<u32, Vec<u32>>,
    binary: HashSet<(u32, u32, u32)>,
    out: HashMap<(u32, u32), Vec<u32>>,
    inc: HashMap<(u32, u32), Vec<u32>>,
}

impl DbIndex {
    pub fn new(d: &Database) -> Self {
        let consts: Vec<Sym> = d.adom().into_iter().collect();
        let ids: HashMap<Sym, u32> = consts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u32))
            .collect();
        let mut idx = DbIndex {
            consts,
            ids,
            preds: HashMap::new(),
            unary: HashSet::new(),
            unary_lists: HashMap::new(),
            binary: HashSet::new(),
            out: HashMap::new(),
            inc: HashMap::new(),
        };
        for f in d.facts() {
            match f {
                Atom::Concept(p, a) => {
                    if p.as_str() == TOP_NAME {
                        continue;
                    }
                    let p = idx.pred_id(p);
                    let a = idx.ids[a];
                    if idx.unary.insert((p, a)) {
                        idx.unary_lists.entry(p).or_default().push(a);
                    }
                }
                Atom::Role(r, a, b) => {
                    let r = idx.pred_id(r);
                    let (a, b) = (idx.ids[a], idx.ids[b]);
                    if idx.binary.insert((r, a, b)) {
                        idx.out.entry((r, a)).or_default().push(b);
                        idx.inc.entry((r, b)).or_default().push(a);
                    }
                }
            }
        }
        idx
    }

    fn pred_id(&mut self, p: &Sym) -> u32 {
        let n = self.preds.len() as u32;
        *self.preds.entry(p.clone()).or_insert(n)
    }

    pub fn const_id(&self, c: &Sym) -> Option<u32> {
        self.ids.get(c).copied()
    }

    pub fn constant(&self, id: u32) -> &Sym {
        &self.consts[id as usize]
    }

    pub fn num_consts(&self) -> usize {
        self.consts.len()
    }
}

#[derive(Clone, Copy)]
enum QAtom {
    /// Unary atom over a predicate absent from the database.
    Never,
    Any(usize),
    Unary(u32, usize),
    Binary(u32, usize, usize),
}

#[derive(Clone, Copy)]
enum Gen {
    All,
    Unary(u32),
    Out(u32, usize),
    In(u32, usize),
}

/// A compiled search plan for matching the atoms of a query into an index.
pub struct Matcher<'a> {
    idx: &'a DbIndex,
    vars: Vec<Sym>,
    order: Vec<usize>,
    gens: Vec<Gen>,
    /// Atoms checked right after binding the variable at each step.
    checks: Vec<Vec<QAtom>>,
    impossible: bool,
}

impl<'a> Matcher<'a> {
    /// `first` lists variables to bind before all others, in that order.
    pub fn new(idx: &'a DbIndex, atoms: &BTreeSet<Atom>, first: &[Sym]) -> Self {
        let mut vars: Vec<Sym> = first.to_vec();
        let mut var_id: HashMap<Sym, usize> = first
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        for a in atoms {
            for t in a.terms() {
                if !var_id.contains_key(t) {
                    var_id.insert(t.clone(), vars.len());
                    vars.push(t.clone());
                }
            }
        }
        let mut impossible = false;
        let qatoms: Vec<QAtom> = atoms
            .iter()
            .map(|a| match a {
                Atom::Concept(p, t) if p.as_str() == TOP_NAME => QAtom::Any(var_id[t]),
                Atom::Concept(p, t) => match idx.preds.get(p) {
                    Some(&p) => QAtom::Unary(p, var_id[t]),
                    None => QAtom::Never,
                },
                Atom::Role(r, s, t) => match idx.preds.get(r) {
                    Some(&r) => QAtom::Binary(r, var_id[s], var_id[t]),
                    None => QAtom::Never,
                },
            })
            .collect();
        if qatoms.iter().any(|a| matches!(a, QAtom::Never)) {
            impossible = true;
        }
        let n = vars.len();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut gens = Vec::with_capacity(n);
        let mut checks = Vec::with_capacity(n);
        for step in 0..n {
            let v = if step < first.len() {
                step
            } else {
                // Prefer variables tied to many bound ones, then constrained ones.
                (0..n)
                    .filter(|&v| !placed[v])
                    .max_by_key(|&v| {
                        let mut linked = 0;
                        let mut unary = 0;
                        for a in &qatoms {
                            match *a {
                                QAtom::Binary(_, s, t) if s == v && placed[t] => linked += 1,
                                QAtom::Binary(_, s, t) if t == v && placed[s] => linked += 1,
                                QAtom::Unary(_, t) if t == v => unary += 1,
                                _ => {}
                            }
                        }
                        (linked, unary, std::cmp::Reverse(v))
                    })
                    .expect("an unplaced variable")
            };
            placed[v] = true;
            let mut gen = Gen::All;
            for a in &qatoms {
                match *a {
                    QAtom::Binary(r, s, t) if t == v && s != v && placed[s] => {
                        gen = Gen::Out(r, s);
                        break;
                    }
                    QAtom::Binary(r, s, t) if s == v && t != v && placed[t] => {
                        gen = Gen::In(r, t);
                        break;
                    }
                    _ => {}
                }
            }
            if matches!(gen, Gen::All) {
                for a in &qatoms {
                    if let QAtom::Unary(p, t) = *a {
                        if t == v {
                            gen = Gen::Unary(p);
                            break;
                        }
                    }
                }
            }
            let ready: Vec<QAtom> = qatoms
                .iter()
                .copied()
                .filter(|a| match *a {
                    QAtom::Unary(_, t) | QAtom::Any(t) => t == v,
                    QAtom::Binary(_, s, t) => {
                        (s == v || t == v) && placed[s] && placed[t]
                    }
                    QAtom::Never => false,
                })
                .collect();
            order.push(v);
            gens.push(gen);
            checks.push(ready);
        }
        Matcher {
            idx,
            vars,
            order,
            gens,
            checks,
            impossible,
        }
    }

    fn holds(&self, a: QAtom, asg: &[u32]) -> bool {
        match a {
            QAtom::Never => false,
            QAtom::Any(_) => true,
            QAtom::Unary(p, t) => self.idx.unary.contains(&(p, asg[t])),
            QAtom::Binary(r, s, t) => self.idx.binary.contains(&(r, asg[s], asg[t])),
        }
    }

    fn candidates(&self, step: usize, asg: &[u32]) -> Vec<u32> {
        match self.gens[step] {
            Gen::All => (0..self.idx.num_consts() as u32).collect(),
            Gen::Unary(p) => self.idx.unary_lists.get(&p).cloned().unwrap_or_default(),
            Gen::Out(r, s) => self.idx.out.get(&(r, asg[s])).cloned().unwrap_or_default(),
            Gen::In(r, t) => self.idx.inc.get(&(r, asg[t])).cloned().unwrap_or_default(),
        }
    }

    /// Depth-first search from `step`; `visit` is called on complete
    /// matches and returns true to stop the search.
    fn search(&self, step: usize, asg: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        if step == self.order.len() {
            return visit(asg);
        }
        let v = self.order[step];
        let fixed = asg[v];
        let cands = if fixed != u32::MAX {
            vec![fixed]
        } else {
            self.candidates(step, asg)
        };
        for c in cands {
            asg[v] = c;
            if self.checks[step].iter().all(|&a| self.holds(a, asg))
                && self.search(step + 1, asg, visit)
            {
                asg[v] = fixed;
                return true;
            }
        }
        asg[v] = fixed;
        false
    }

    /// Whether a match exists extending `pre`, which binds the first
    /// variables passed to [`Matcher::new`].
    pub fn exists_with(&self, pre: &[Sym]) -> bool {
        if self.impossible {
            return false;
        }
        let mut asg = vec![u32::MAX; self.vars.len()];
        for (i, c) in pre.iter().enumerate() {
            match self.idx.const_id(c) {
                Some(id) => asg[i] = id,
                None => return false,
            }
        }
        self.search(0, &mut asg, &mut |_| true)
    }

    /// All bindings of the first `k` variables that extend to a match.
    pub fn projections(&self, k: usize) -> BTreeSet<Vec<Sym>> {
        let mut out = BTreeSet::new();
        if self.impossible {
            return out;
        }
        let mut asg = vec![u32::MAX; self.vars.len()];
        self.project(0, k, &mut asg, &mut out);
        out
    }

    fn project(&self, step: usize, k: usize, asg: &mut Vec<u32>, out: &mut BTreeSet<Vec<Sym>>) {
        if step == k {
            if self.search(step, asg, &mut |_| true) {
                out.insert((0..k).map(|i| self.idx.constant(asg[i]).clone()).collect());
            }
            return;
        }
        let v = self.order[step];
        for c in self.candidates(step, asg) {
            asg[v] = c;
            if self.checks[step].iter().all(|&a| self.holds(a, asg)) {
                self.project(step + 1, k, asg, out);
            }
        }
        asg[v] = u32::MAX;
    }

    /// Some match, as a map from variables to constants.
    pub fn find(&self, pre: &[Sym]) -> Option<BTreeMap<Sym, Sym>> {
        if self.impossible {
            return None;
        }
        let mut asg = vec![u32::MAX; self.vars.len()];
        for (i, c) in pre.iter().enumerate() {
            asg[i] = self.idx.const_id(c)?;
        }
        let mut found = None;
        self.search(0, &mut asg, &mut |m| {
            found = Some(m.to_vec());
            true
        });
        found.map(|m| {
            self.vars
                .iter()
                .zip(m)
                .map(|(v, c)| (v.clone(), self.idx.constant(c).clone()))
                .collect()
        })
    }
}

/// All answers of `q` on `d`: images of the answer tuple under homomorphisms.
pub fn eval_cq(d: &Database, q: &Cq) -> BTreeSet<Vec<Sym>> {
    let idx = DbIndex::new(d);
    eval_cq_indexed(&idx, q)
}

pub fn eval_cq_indexed(idx: &DbIndex, q: &Cq) -> BTreeSet<Vec<Sym>> {
    if q.atoms.is_empty() {
        return BTreeSet::from([Vec::new()]);
    }
    Matcher::new(idx, &q.atoms, &q.answer).projections(q.answer.len())
}

/// Whether `tuple` is an answer of `q` on `d`.
pub fn entails(d: &Database, q: &Cq, tuple: &[Sym]) -> bool {
    entails_indexed(&DbIndex::new(d), q, tuple)
}

pub fn entails_indexed(idx: &DbIndex, q: &Cq, tuple: &[Sym]) -> bool {
    if q.atoms.is_empty() {
        return true;
    }
    Matcher::new(idx, &q.atoms, &q.answer).exists_with(tuple)
}

/// A homomorphism from `from` to `to` that extends `fixed`, if any.
pub fn db_hom(
    from: &Database,
    to: &Database,
    fixed: &BTreeMap<Sym, Sym>,
) -> Option<BTreeMap<Sym, Sym>> {
    let idx = DbIndex::new(to);
    let atoms: BTreeSet<Atom> = from.facts().iter().cloned().collect();
    let first: Vec<Sym> = fixed.keys().cloned().collect();
    let pre: Vec<Sym> = fixed.values().cloned().collect();
    if atoms.is_empty() {
        return Some(fixed.clone());
    }
    Matcher::new(&idx, &atoms, &first).find(&pre)
}
