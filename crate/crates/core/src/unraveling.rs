//! Finite prefixes of database unravelings, materialized for oracles and
//! tests. The reasoning modules never build these.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::kernel::{Atom, Database, Sym};

/// Upper bound on the constants of a materialized prefix.
pub const PREFIX_LIMIT: usize = 200_000;

#[derive(Debug, Clone)]
pub struct UnravelingPrefix {
    pub db: Database,
    /// Every constant of `db` mapped to the constant it copies.
    pub copy_of: BTreeMap<Sym, Sym>,
    pub depth: usize,
    /// The distinguished copy of each original constant.
    pub anchors: BTreeMap<Sym, Sym>,
}

impl UnravelingPrefix {
    pub fn anchor(&self, a: &Sym) -> Option<&Sym> {
        self.anchors.get(a)
    }

    /// Whether uncopying maps every fact into `d`.
    pub fn uncopies_into(&self, d: &Database) -> bool {
        self.db
            .facts()
            .iter()
            .all(|f| f.is_top() || d.contains(&f.rename(&self.copy_of)))
    }
}

/// Neighbours of each constant: (role, traversed backwards, other end).
fn adjacency(d: &Database) -> BTreeMap<Sym, Vec<(Sym, bool, Sym)>> {
    let mut adj: BTreeMap<Sym, Vec<(Sym, bool, Sym)>> = BTreeMap::new();
    for (r, a, b) in d.role_facts() {
        adj.entry(a.clone()).or_default().push((r.clone(), false, b.clone()));
        adj.entry(b.clone()).or_default().push((r.clone(), true, a.clone()));
    }
    adj
}

fn guard(size: usize) -> Result<()> {
    if size > PREFIX_LIMIT {
        return Err(Error::guard(format!(
            "unraveling prefix exceeds {PREFIX_LIMIT} constants"
        )));
    }
    Ok(())
}

/// All paths of length at most `n` of the tree unraveling of `d` at `s`.
/// A path `a r b s^ c` is named `a~r~b~s^~c`; length-0 paths are the
/// constants themselves.
pub fn tree_unravel_prefix(d: &Database, s: &BTreeSet<Sym>, n: usize) -> Result<UnravelingPrefix> {
    let adj = adjacency(d);
    let empty = Vec::new();
    let mut db = d.restrict(s);
    let mut copy_of = BTreeMap::new();
    let mut layer: Vec<(Sym, Sym)> = d.adom().into_iter().map(|a| (a.clone(), a)).collect();
    for depth in 0..=n {
        let mut next = Vec::new();
        for (p, tail) in &layer {
            copy_of.insert(p.clone(), tail.clone());
            for (c, t) in d.concept_facts() {
                if t == tail {
                    db.insert(Atom::Concept(c.clone(), p.clone()));
                }
            }
            for (r, back, b) in adj.get(tail).unwrap_or(&empty) {
                // Edges from S elements reach every path ending in their neighbour.
                if s.contains(b) {
                    db.insert(edge(r, *back, p, b));
                }
                if depth < n {
                    let caret = if *back { "^" } else { "" };
                    let child = Sym::from(format!("{p}~{r}{caret}~{b}"));
                    db.insert(edge(r, *back, p, &child));
                    next.push((child, b.clone()));
                }
            }
        }
        guard(copy_of.len() + next.len())?;
        layer = next;
    }
    let anchors = d.adom().into_iter().map(|a| (a.clone(), a)).collect();
    Ok(UnravelingPrefix {
        db,
        copy_of,
        depth: n,
        anchors,
    })
}

/// The fact `r(from, to)`, or `r(to, from)` when traversed backwards.
fn edge(r: &Sym, back: bool, from: &Sym, to: &Sym) -> Atom {
    if back {
        Atom::Role(r.clone(), to.clone(), from.clone())
    } else {
        Atom::Role(r.clone(), from.clone(), to.clone())
    }
}

/// Which bags of the (ℓ,k)-unraveling a prefix keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LkShape {
    /// Every sequence.
    Full,
    /// Only bags and overlaps of the largest allowed size. Every other
    /// subtree maps homomorphically into one of these, so certain answers
    /// on this prefix are certain on the full unraveling.
    Maximal,
}

/// Subsets of `items` with size in `lo..=hi`, in a fixed order.
fn subsets(items: &[Sym], lo: usize, hi: usize) -> Vec<Vec<Sym>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(items: &[Sym], i: usize, lo: usize, hi: usize, cur: &mut Vec<Sym>, out: &mut Vec<Vec<Sym>>) {
        if cur.len() >= lo {
            out.push(cur.clone());
        }
        if cur.len() == hi {
            return;
        }
        for j in i..items.len() {
            cur.push(items[j].clone());
            go(items, j + 1, lo, hi, cur, out);
            cur.pop();
        }
    }
    go(items, 0, lo, hi, &mut cur, &mut out);
    out
}

struct Bag {
    /// Copy of each non-S member.
    copies: BTreeMap<Sym, Sym>,
}

/// The (ℓ,k)-unraveling of `d` up to `s`, over all sequences
/// `S_0, O_0, ..., S_n` with `n <= max_seq_len`.
pub fn lk_unravel_prefix(
    d: &Database,
    s: &BTreeSet<Sym>,
    l: usize,
    k: usize,
    max_seq_len: usize,
) -> Result<UnravelingPrefix> {
    lk_unravel_prefix_with(d, s, l, k, max_seq_len, LkShape::Full)
}

pub fn lk_unravel_prefix_with(
    d: &Database,
    s: &BTreeSet<Sym>,
    l: usize,
    k: usize,
    max_seq_len: usize,
    shape: LkShape,
) -> Result<UnravelingPrefix> {
    if l == 0 || l >= k {
        return Err(Error::Invalid(format!("need 1 <= l < k, got l={l}, k={k}")));
    }
    let rest: Vec<Sym> = d.adom().into_iter().filter(|a| !s.contains(a)).collect();
    let (bag_lo, overlap_lo) = match shape {
        LkShape::Full => (0, 0),
        LkShape::Maximal => (k.min(rest.len()), l.min(rest.len())),
    };
    let bags = subsets(&rest, bag_lo, k);
    let mut db = d.restrict(s);
    let mut copy_of: BTreeMap<Sym, Sym> = s.iter().map(|a| (a.clone(), a.clone())).collect();
    let mut anchors: BTreeMap<Sym, Sym> = copy_of.clone();
    let mut counter = 0usize;
    let mut fresh = |a: &Sym, copy_of: &mut BTreeMap<Sym, Sym>| {
        let c = Sym::from(format!("{a}#{counter}"));
        counter += 1;
        copy_of.insert(c.clone(), a.clone());
        c
    };
    let emit = |bag: &Bag, db: &mut Database| {
        let keep: BTreeSet<Sym> = s.iter().chain(bag.copies.keys()).cloned().collect();
        let mut map = bag.copies.clone();
        map.extend(s.iter().map(|a| (a.clone(), a.clone())));
        db.extend(d.restrict(&keep).facts().iter().map(|f| f.rename(&map)));
    };

    let mut layer: Vec<Bag> = Vec::new();
    for members in &bags {
        let bag = Bag {
            copies: members.iter().map(|a| (a.clone(), fresh(a, &mut copy_of))).collect(),
        };
        for (a, c) in &bag.copies {
            let singleton = members.len() == 1 || shape == LkShape::Maximal;
            if singleton {
                anchors.entry(a.clone()).or_insert_with(|| c.clone());
            }
        }
        emit(&bag, &mut db);
        layer.push(bag);
    }
    guard(copy_of.len())?;
    for _ in 0..max_seq_len {
        let mut next = Vec::new();
        for bag in &layer {
            let members: Vec<Sym> = bag.copies.keys().cloned().collect();
            for overlap in subsets(&members, overlap_lo.min(members.len()), l) {
                for child in &bags {
                    if !overlap.iter().all(|a| child.contains(a)) {
                        continue;
                    }
                    let copies = child
                        .iter()
                        .map(|a| {
                            let c = if overlap.contains(a) {
                                bag.copies[a].clone()
                            } else {
                                fresh(a, &mut copy_of)
                            };
                            (a.clone(), c)
                        })
                        .collect();
                    let b = Bag { copies };
                    emit(&b, &mut db);
                    next.push(b);
                }
                guard(copy_of.len())?;
            }
        }
        layer = next;
    }
    Ok(UnravelingPrefix {
        db,
        copy_of,
        depth: max_seq_len,
        anchors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sym;
    use crate::querytools::eval_cq;
    use crate::syntax::{parse_database, parse_query};
    use proptest::prelude::*;

    fn db(text: &str) -> Database {
        parse_database(text).unwrap()
    }

    fn set(names: &[&str]) -> BTreeSet<Sym> {
        names.iter().map(|n| sym(n)).collect()
    }

    #[test]
    fn single_edge_depth_one() {
        let p = tree_unravel_prefix(&db("r(a,b)"), &BTreeSet::new(), 1).unwrap();
        assert_eq!(p.db.adom(), set(&["a", "b", "a~r~b", "b~r^~a"]));
        assert!(p.db.contains(&Atom::role("r", "a", "a~r~b")));
        assert!(p.db.contains(&Atom::role("r", "b~r^~a", "b")));
        assert!(!p.db.contains(&Atom::role("r", "a", "b")));
        assert!(p.uncopies_into(&db("r(a,b)")));
    }

    #[test]
    fn full_anchor_set_gives_the_database() {
        let d = db("r(a,b)\nr(b,c)\nA(c)");
        let p = tree_unravel_prefix(&d, &d.adom(), 0).unwrap();
        assert_eq!(p.db, d);
    }

    #[test]
    fn loop_at_anchor_is_kept() {
        let d = db("r(a,a)");
        let p = tree_unravel_prefix(&d, &set(&["a"]), 2).unwrap();
        assert!(p.db.contains(&Atom::role("r", "a", "a")));
        let p = tree_unravel_prefix(&d, &BTreeSet::new(), 2).unwrap();
        assert!(!p.db.contains(&Atom::role("r", "a", "a")));
    }

    #[test]
    fn tree_prefix_guard() {
        let d = db("r(a,b)\nr(b,c)\nr(c,a)\nr(a,c)");
        assert!(tree_unravel_prefix(&d, &BTreeSet::new(), 40).unwrap_err().is_guard());
    }

    #[test]
    fn triangle_is_broken_by_small_bags() {
        let d = db("r(a,b)\nr(b,c)\nr(c,a)");
        let p = lk_unravel_prefix(&d, &BTreeSet::new(), 1, 2, 2).unwrap();
        let tri = parse_query("q() :- r(x,y), r(y,z), r(z,x).").unwrap();
        assert!(eval_cq(&p.db, &tri.disjuncts[0]).is_empty());
        assert!(p.uncopies_into(&d));
    }

    #[test]
    fn clique_fits_in_one_bag() {
        let d = db(crate::testutil::K4);
        let p = lk_unravel_prefix(&d, &BTreeSet::new(), 1, 4, 1).unwrap();
        let k4 = parse_query("q() :- e(x,y), e(x,z), e(x,w), e(y,z), e(y,w), e(z,w).").unwrap();
        assert!(!eval_cq(&p.db, &k4.disjuncts[0]).is_empty());
        // The singleton bag holds the distinguished copy.
        let p = lk_unravel_prefix(&d, &BTreeSet::new(), 1, 4, 0).unwrap();
        let a = p.anchor(&sym("a")).unwrap();
        assert_eq!(p.copy_of[a], sym("a"));
        assert!(p.db.facts().iter().all(|f| !f.terms().contains(&a) || f.terms().len() == 1));
    }

    #[test]
    fn anchored_everything_contains_the_database() {
        let d = db("r(a,b)\nr(b,c)\nr(c,a)\nA(a)");
        let p = lk_unravel_prefix(&d, &d.adom(), 1, 3, 1).unwrap();
        assert!(d.facts().iter().all(|f| p.db.contains(f)));
    }

    #[test]
    fn maximal_prefix_is_inside_the_full_one() {
        let d = db("r(a,b)\nr(b,c)\nr(c,a)");
        let full = lk_unravel_prefix(&d, &BTreeSet::new(), 1, 2, 1).unwrap();
        let max = lk_unravel_prefix_with(&d, &BTreeSet::new(), 1, 2, 1, LkShape::Maximal).unwrap();
        assert!(max.db.len() < full.db.len());
        assert!(crate::querytools::db_hom(&max.db, &full.db, &BTreeMap::new()).is_some());
    }

    #[test]
    fn rejects_bad_widths() {
        assert!(lk_unravel_prefix(&db("r(a,b)"), &BTreeSet::new(), 2, 2, 1).is_err());
    }

    fn arb_db() -> impl Strategy<Value = Database> {
        let fact = (0..3usize, 0..4usize, 0..4usize).prop_map(|(r, a, b)| {
            let c = ["a", "b", "c", "d"];
            if r == 2 {
                Atom::concept("A", c[a])
            } else {
                Atom::role(["r", "s"][r], c[a], c[b])
            }
        });
        prop::collection::vec(fact, 1..7).prop_map(Database::from_facts)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn uncopying_is_a_homomorphism(d in arb_db(), anchored in 0..3usize) {
            let s: BTreeSet<Sym> = d.adom().into_iter().take(anchored).collect();
            let t = tree_unravel_prefix(&d, &s, 2).unwrap();
            prop_assert!(t.uncopies_into(&d));
            let p = lk_unravel_prefix(&d, &s, 1, 2, 1).unwrap();
            prop_assert!(p.uncopies_into(&d));
        }

        #[test]
        fn prefixes_grow_monotonically(d in arb_db()) {
            let s = BTreeSet::new();
            let a = tree_unravel_prefix(&d, &s, 1).unwrap();
            let b = tree_unravel_prefix(&d, &s, 2).unwrap();
            prop_assert!(a.db.facts().is_subset(b.db.facts()));
            let a = lk_unravel_prefix(&d, &s, 1, 2, 0).unwrap();
            let b = lk_unravel_prefix(&d, &s, 1, 2, 1).unwrap();
            prop_assert!(a.db.facts().is_subset(b.db.facts()));
        }
    }
}
