use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{Atom, Cq, Sym};

/// Upper bound on tie-breaking permutations tried per canonization.
const MAX_PERMUTATIONS: usize = 5040;

/// Renames every term not satisfying `fixed` to `?0`, `?1`, ... so that
/// isomorphic atom sets (relative to the fixed terms) get equal results.
///
/// Variables are ordered by color refinement; ties are broken by trying all
/// permutations inside each color class and keeping the least atom list.
/// Beyond [`MAX_PERMUTATIONS`] the tie order falls back to the input names,
/// which still yields a valid renaming but may miss some isomorphisms.
pub fn canonize(atoms: &BTreeSet<Atom>, fixed: &dyn Fn(&Sym) -> bool) -> BTreeSet<Atom> {
    let vars: Vec<Sym> = atoms
        .iter()
        .flat_map(|a| a.terms().into_iter().cloned())
        .filter(|t| !fixed(t))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if vars.is_empty() {
        return atoms.clone();
    }
    let pos: BTreeMap<&Sym, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let colors = refine(atoms, &vars, &pos);

    let mut order: Vec<usize> = (0..vars.len()).collect();
    order.sort_by_key(|&i| (colors[i], i));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if colors[g[0]] == colors[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut total: usize = 1;
    for g in &groups {
        for k in 1..=g.len() {
            total = total.saturating_mul(k);
        }
    }
    let rename = |seq: &[usize]| -> BTreeSet<Atom> {
        let map: BTreeMap<Sym, Sym> = seq
            .iter()
            .enumerate()
            .map(|(n, &i)| (vars[i].clone(), Sym::from(format!("?{n}"))))
            .collect();
        atoms.iter().map(|a| a.rename(&map)).collect()
    };
    if total == 1 || total > MAX_PERMUTATIONS {
        return rename(&order);
    }
    let mut best: Option<BTreeSet<Atom>> = None;
    let mut current: Vec<Vec<usize>> = groups.clone();
    permute_groups(&mut current, 0, &mut |seq| {
        let cand = rename(seq);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    });
    best.expect("at least one permutation")
}

fn permute_groups(groups: &mut Vec<Vec<usize>>, g: usize, visit: &mut dyn FnMut(&[usize])) {
    if g == groups.len() {
        let seq: Vec<usize> = groups.iter().flatten().copied().collect();
        visit(&seq);
        return;
    }
    let n = groups[g].len();
    heap_permute(groups, g, n, visit);
}

fn heap_permute(groups: &mut Vec<Vec<usize>>, g: usize, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k <= 1 {
        permute_groups(groups, g + 1, visit);
        return;
    }
    for i in 0..k {
        heap_permute(groups, g, k - 1, visit);
        if k.is_multiple_of(2) {
            groups[g].swap(i, k - 1);
        } else {
            groups[g].swap(0, k - 1);
        }
    }
}

type Sig = (usize, Vec<(Sym, u8, usize, Option<Sym>)>);

/// Iterated color refinement; colors are ranks of signatures, so they
/// depend only on structure and fixed-term names.
fn refine(atoms: &BTreeSet<Atom>, vars: &[Sym], pos: &BTreeMap<&Sym, usize>) -> Vec<usize> {
    let n = vars.len();
    let mut colors = vec![0usize; n];
    let mut classes = 0;
    loop {
        let mut sigs: Vec<Sig> = (0..n).map(|i| (colors[i], Vec::new())).collect();
        for a in atoms {
            match a {
                Atom::Concept(p, t) => {
                    if let Some(&i) = pos.get(t) {
                        sigs[i].1.push((p.clone(), 0, 0, None));
                    }
                }
                Atom::Role(r, s, t) => {
                    let (ps, pt) = (pos.get(s).copied(), pos.get(t).copied());
                    match (ps, pt) {
                        (Some(i), Some(j)) if i == j => {
                            sigs[i].1.push((r.clone(), 1, 0, None));
                        }
                        (Some(i), Some(j)) => {
                            sigs[i].1.push((r.clone(), 2, colors[j] + 1, None));
                            sigs[j].1.push((r.clone(), 3, colors[i] + 1, None));
                        }
                        (Some(i), None) => sigs[i].1.push((r.clone(), 2, 0, Some(t.clone()))),
                        (None, Some(j)) => sigs[j].1.push((r.clone(), 3, 0, Some(s.clone()))),
                        (None, None) => {}
                    }
                }
            }
        }
        for s in &mut sigs {
            s.1.sort();
        }
        let distinct: BTreeSet<&Sig> = sigs.iter().collect();
        let rank: BTreeMap<&Sig, usize> = distinct.iter().enumerate().map(|(r, s)| (*s, r)).collect();
        let next: Vec<usize> = sigs.iter().map(|s| rank[s]).collect();
        let count = distinct.len();
        colors = next;
        if count == classes {
            return colors;
        }
        classes = count;
    }
}

/// Canonical form of a CQ: answer variables become `!0`, `!1`, ... in
/// answer order, quantified variables are canonized.
pub fn canonical_cq(q: &Cq) -> Cq {
    let map: BTreeMap<Sym, Sym> = q
        .answer
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), Sym::from(format!("!{i}"))))
        .collect();
    let renamed = q.rename(&map);
    let atoms = canonize(&renamed.atoms, &|t: &Sym| t.as_str().starts_with('!'));
    Cq::from_parts(renamed.answer, atoms)
}
