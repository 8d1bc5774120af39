use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{Cq, Sym};

/// Calls `visit` with every set partition of `0..n` as a restricted-growth
/// string: element `i` lies in block `blocks[i]`.
pub fn for_each_partition(n: usize, visit: &mut dyn FnMut(&[usize])) {
    let mut blocks = vec![0usize; n];
    fn go(i: usize, max: usize, blocks: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if i == blocks.len() {
            visit(blocks);
            return;
        }
        for b in 0..=max {
            blocks[i] = b;
            go(i + 1, if b == max { max + 1 } else { max }, blocks, visit);
        }
    }
    if n == 0 {
        visit(&blocks);
        return;
    }
    go(0, 0, &mut blocks, visit);
}

/// All contractions of `q`, one per partition of its variables that never
/// puts two answer variables together. A block is named after its answer
/// variable if it has one, else after its least variable.
pub fn contractions(q: &Cq) -> Vec<Cq> {
    let vars: Vec<Sym> = q.vars().into_iter().collect();
    let answer: BTreeSet<&Sym> = q.answer.iter().collect();
    let mut out = Vec::new();
    for_each_partition(vars.len(), &mut |blocks| {
        let nblocks = blocks.iter().copied().max().map_or(0, |m| m + 1);
        let mut rep: Vec<Option<&Sym>> = vec![None; nblocks];
        let mut has_answer = vec![false; nblocks];
        for (i, v) in vars.iter().enumerate() {
            let b = blocks[i];
            if answer.contains(v) {
                if has_answer[b] {
                    return;
                }
                has_answer[b] = true;
                rep[b] = Some(v);
            } else if !has_answer[b] && rep[b].is_none() {
                rep[b] = Some(v);
            }
        }
        let map: BTreeMap<Sym, Sym> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), rep[blocks[i]].expect("block has a member").clone()))
            .collect();
        out.push(q.rename(&map));
    });
    out
}
