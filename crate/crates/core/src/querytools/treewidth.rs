use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::kernel::{Atom, Cq, Database, Sym};

/// A tree decomposition: bags on the nodes of an undirected forest whose
/// adjacent bags share at most `l` elements and hold at most `k` each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<Sym>>,
    pub edges: Vec<(usize, usize)>,
    pub l: usize,
    pub k: usize,
}

/// The Gaifman graph of a set of atoms: elements and undirected edges
/// between distinct terms of binary atoms.
pub fn gaifman_of(atoms: &BTreeSet<Atom>) -> (BTreeSet<Sym>, BTreeSet<(Sym, Sym)>) {
    let mut elems = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for a in atoms {
        for t in a.terms() {
            elems.insert(t.clone());
        }
        if let Atom::Role(_, s, t) = a {
            if s != t {
                let e = if s < t { (s.clone(), t.clone()) } else { (t.clone(), s.clone()) };
                edges.insert(e);
            }
        }
    }
    (elems, edges)
}

impl TreeDecomposition {
    /// Checks the three defining conditions against a graph.
    pub fn is_valid_for(&self, elems: &BTreeSet<Sym>, edges: &BTreeSet<(Sym, Sym)>) -> bool {
        let n = self.bags.len();
        if self.bags.iter().any(|b| b.len() > self.k) {
            return false;
        }
        // The node graph must be a forest.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            r
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            if u >= n || v >= n {
                return false;
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
            adj[u].push(v);
            adj[v].push(u);
        }
        // Overlap along every pair of bags; it suffices to check edges
        // once occurrence sets are connected, but pairs are cheap here.
        for i in 0..n {
            for j in (i + 1)..n {
                if self.bags[i].intersection(&self.bags[j]).count() > self.l {
                    return false;
                }
            }
        }
        for e in elems {
            let occ: Vec<usize> = (0..n).filter(|&i| self.bags[i].contains(e)).collect();
            if occ.is_empty() {
                return false;
            }
            let mut seen = vec![false; n];
            let mut stack = vec![occ[0]];
            seen[occ[0]] = true;
            let mut reached = 0;
            while let Some(u) = stack.pop() {
                reached += 1;
                for &v in &adj[u] {
                    if !seen[v] && self.bags[v].contains(e) {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            if reached != occ.len() {
                return false;
            }
        }
        edges
            .iter()
            .all(|(a, b)| self.bags.iter().any(|bag| bag.contains(a) && bag.contains(b)))
    }
}

struct Search {
    n: usize,
    adj: Vec<u32>,
    l: usize,
    k: usize,
    memo: HashMap<u32, Option<Plan>>,
}

#[derive(Clone)]
struct Plan {
    bag: u32,
    children: Vec<u32>,
}

impl Search {
    fn neighbours(&self, set: u32) -> u32 {
        let mut out = 0;
        for i in 0..self.n {
            if set >> i & 1 == 1 {
                out |= self.adj[i];
            }
        }
        out & !set
    }

    fn components(&self, set: u32) -> Vec<u32> {
        let mut rest = set;
        let mut out = Vec::new();
        while rest != 0 {
            let start = rest.trailing_zeros();
            let mut comp = 1u32 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let next = self.neighbours(frontier) & set & !comp;
                comp |= next;
                frontier = next;
            }
            rest &= !comp;
            out.push(comp);
        }
        out
    }

    /// Decomposes component `c` below a bag that contains its neighbourhood.
    fn solve(&mut self, c: u32) -> bool {
        if let Some(p) = self.memo.get(&c) {
            return p.is_some();
        }
        let attach = self.neighbours(c);
        let room = self.k.saturating_sub(attach.count_ones() as usize);
        let members: Vec<u32> = (0..self.n as u32).filter(|&i| c >> i & 1 == 1).collect();
        let mut found = None;
        'sizes: for size in 1..=room.min(members.len()) {
            let mut chosen = Vec::new();
            let mut result = None;
            self.subsets(&members, size, 0, &mut chosen, c, attach, &mut result);
            if let Some(plan) = result {
                found = Some(plan);
                break 'sizes;
            }
        }
        let ok = found.is_some();
        self.memo.insert(c, found);
        ok
    }

    #[allow(clippy::too_many_arguments)]
    fn subsets(
        &mut self,
        members: &[u32],
        size: usize,
        from: usize,
        chosen: &mut Vec<u32>,
        c: u32,
        attach: u32,
        result: &mut Option<Plan>,
    ) {
        if result.is_some() {
            return;
        }
        if chosen.len() == size {
            let inner: u32 = chosen.iter().fold(0, |m, &i| m | 1 << i);
            let rest = c & !inner;
            let comps = self.components(rest);
            for &comp in &comps {
                if self.neighbours(comp).count_ones() as usize > self.l {
                    return;
                }
            }
            for &comp in &comps {
                if !self.solve(comp) {
                    return;
                }
            }
            *result = Some(Plan {
                bag: attach | inner,
                children: comps,
            });
            return;
        }
        for i in from..members.len() {
            if members.len() - i < size - chosen.len() {
                break;
            }
            chosen.push(members[i]);
            self.subsets(members, size, i + 1, chosen, c, attach, result);
            chosen.pop();
            if result.is_some() {
                return;
            }
        }
    }

    fn emit(&self, c: u32, parent: Option<usize>, elems: &[Sym], td: &mut TreeDecomposition) {
        let plan = self.memo[&c].as_ref().expect("solved component").clone();
        let node = td.bags.len();
        td.bags.push(
            (0..self.n)
                .filter(|&i| plan.bag >> i & 1 == 1)
                .map(|i| elems[i].clone())
                .collect(),
        );
        if let Some(p) = parent {
            td.edges.push((p, node));
        }
        for child in plan.children {
            self.emit(child, Some(node), elems, td);
        }
    }
}

/// Exact search for an (l,k)-tree decomposition of a graph with at most
/// `max_elems` elements.
pub fn find_tree_decomposition_graph(
    elems: &BTreeSet<Sym>,
    edges: &BTreeSet<(Sym, Sym)>,
    l: usize,
    k: usize,
    max_elems: usize,
) -> Result<Option<TreeDecomposition>> {
    let n = elems.len();
    if n > max_elems || n > 31 {
        return Err(Error::guard(format!(
            "tree decomposition search over {n} elements exceeds the limit of {max_elems}"
        )));
    }
    let list: Vec<Sym> = elems.iter().cloned().collect();
    let pos: BTreeMap<&Sym, usize> = list.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut adj = vec![0u32; n];
    for (a, b) in edges {
        let (i, j) = (pos[a], pos[b]);
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }
    let mut search = Search {
        n,
        adj,
        l,
        k,
        memo: HashMap::new(),
    };
    let all: u32 = ((1u64 << n) - 1) as u32;
    let tops = search.components(all);
    for &c in &tops {
        if !search.solve(c) {
            return Ok(None);
        }
    }
    let mut td = TreeDecomposition {
        bags: Vec::new(),
        edges: Vec::new(),
        l,
        k,
    };
    for &c in &tops {
        search.emit(c, None, &list, &mut td);
    }
    Ok(Some(td))
}

/// Decomposition of a CQ's Gaifman graph over all its variables.
pub fn find_tree_decomposition(
    q: &Cq,
    l: usize,
    k: usize,
    max_elems: usize,
) -> Result<Option<TreeDecomposition>> {
    let (elems, edges) = gaifman_of(&q.atoms);
    find_tree_decomposition_graph(&elems, &edges, l, k, max_elems)
}

pub fn find_tree_decomposition_db(
    d: &Database,
    l: usize,
    k: usize,
    max_elems: usize,
) -> Result<Option<TreeDecomposition>> {
    let atoms: BTreeSet<Atom> = d.facts().iter().cloned().collect();
    let (elems, edges) = gaifman_of(&atoms);
    find_tree_decomposition_graph(&elems, &edges, l, k, max_elems)
}

/// Treewidth test on the atoms restricted to `vars`.
pub fn has_treewidth(atoms: &BTreeSet<Atom>, l: usize, k: usize, max_elems: usize) -> Result<bool> {
    let (elems, edges) = gaifman_of(atoms);
    Ok(find_tree_decomposition_graph(&elems, &edges, l, k, max_elems)?.is_some())
}
