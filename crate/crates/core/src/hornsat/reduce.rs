use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::solver::{horn_solve, HornFormula, HornResult};
use crate::ctx::Ctx;
use crate::error::{Error, Result};
use crate::kernel::{Atom, Concept, Cq, Database, Ontology, Sym, TOP_NAME};
use crate::typesat::{keys_compat, Core, Edge, TypeSystem, TypeTable};

/// Types that may be realized in some model of the tree unraveling at `S`,
/// as read off the least model of the Horn reduction. Types are indices
/// into the table.
#[derive(Debug, Clone)]
pub struct Availability {
    /// S-assignments whose variable is not derived.
    pub sigmas: Vec<Vec<u32>>,
    pub s: Vec<Sym>,
    /// For each constant outside `S` and each index into `sigmas`, the
    /// types whose assignment variable is not derived.
    pub free: BTreeMap<Sym, Vec<Vec<u32>>>,
}

struct Layout {
    consts: Vec<Sym>,
    pos: HashMap<Sym, usize>,
    in_s: Vec<Option<usize>>,
}

/// Builds and solves the Horn formula for one type table. `None` means the
/// formula is unsatisfiable, that is, the unraveling has no model.
pub fn availability(
    ctx: &Ctx,
    sys: &TypeSystem,
    table: &TypeTable,
    d: &Database,
    s: &[Sym],
) -> Result<Option<Availability>> {
    let mut d = d.clone();
    for c in s {
        d.insert(Atom::Concept(Sym::new(TOP_NAME), c.clone()));
    }
    let consts: Vec<Sym> = d.adom().into_iter().collect();
    let pos: HashMap<Sym, usize> = consts.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let mut in_s = vec![None; consts.len()];
    for (i, c) in s.iter().enumerate() {
        in_s[pos[c]] = Some(i);
    }
    let lay = Layout { consts, pos, in_s };
    let n = lay.consts.len();

    // Candidate types per constant by (c3).
    let mut need = vec![0u64; n];
    for (a, c) in d.concept_facts() {
        if let Some(bit) = sys.closure.name_atom(a) {
            need[lay.pos[c]] |= 1 << bit;
        }
    }
    let base: Vec<Vec<u32>> = need
        .iter()
        .map(|&m| (0..table.len() as u32).filter(|&t| table.types[t as usize] & m == m).collect())
        .collect();

    // Role facts split by whether they touch S.
    let mut edge_cache: HashMap<Sym, Edge> = HashMap::new();
    let mut edge = |r: &Sym| *edge_cache.entry(r.clone()).or_insert_with(|| sys.closure.edge(r));
    let mut s_facts: Vec<(usize, usize, Edge)> = Vec::new();
    let mut to_s: Vec<Vec<(usize, Edge)>> = vec![Vec::new(); n];
    let mut free_facts: Vec<(usize, usize, Edge)> = Vec::new();
    for (r, a, b) in d.role_facts() {
        let e = edge(r);
        let (i, j) = (lay.pos[a], lay.pos[b]);
        match (lay.in_s[i], lay.in_s[j]) {
            (Some(x), Some(y)) => s_facts.push((x, y, e)),
            (None, Some(y)) => to_s[i].push((y, e)),
            (Some(x), None) => to_s[j].push((x, e.inv())),
            (None, None) => {
                if !e.is_trivial() {
                    free_facts.push((i, j, e));
                }
            }
        }
    }

    // S-assignments by backtracking under (c3) and (c4).
    let s_base: Vec<&Vec<u32>> = s.iter().map(|c| &base[lay.pos[c]]).collect();
    let mut sigmas: Vec<Vec<u32>> = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    enumerate_sigmas(table, &s_base, &s_facts, &mut cur, &mut sigmas, ctx.limits.max_assignments)?;

    // Variables p_sigma, then p_{sigma,t,a} for a outside S.
    let mut f = HornFormula::new();
    let p_sigma: Vec<u32> = sigmas.iter().map(|_| f.fresh()).collect();
    let mut vars: Vec<Vec<Vec<(u32, u32)>>> = vec![Vec::new(); n];
    let mut assignments = sigmas.len();
    for a in 0..n {
        if lay.in_s[a].is_some() {
            continue;
        }
        vars[a] = sigmas
            .iter()
            .map(|sigma| {
                base[a]
                    .iter()
                    .copied()
                    .filter(|&t| {
                        to_s[a]
                            .iter()
                            .all(|&(x, e)| table.compat(e, t as usize, sigma[x] as usize))
                    })
                    .map(|t| (t, f.fresh()))
                    .collect()
            })
            .collect();
        assignments += vars[a].iter().map(Vec::len).sum::<usize>();
        if assignments > ctx.limits.max_assignments {
            return Err(Error::guard(format!(
                "Horn reduction needs more than {} assignments",
                ctx.limits.max_assignments
            )));
        }
    }

    // (1) transfer along facts between constants outside S, both ways.
    for &(i, j, e) in &free_facts {
        for (x, y, e) in [(i, j, e), (j, i, e.inv())] {
            for si in 0..sigmas.len() {
                transfer(&mut f, table, e, &vars[x][si], &vars[y][si]);
            }
        }
    }
    for a in 0..n {
        if lay.in_s[a].is_some() {
            continue;
        }
        let mut all = Vec::new();
        for (si, list) in vars[a].iter().enumerate() {
            let body: Vec<u32> = list.iter().map(|&(_, v)| v).collect();
            // (2) projection and (3) expansion.
            f.add(body.clone(), Some(p_sigma[si]));
            for &v in &body {
                f.add(vec![p_sigma[si]], Some(v));
            }
            all.extend(body);
        }
        // (4) some assignment must remain at every constant.
        f.add(all, None);
    }
    // Some S-assignment must remain.
    f.add(p_sigma.clone(), None);

    ctx.stats.add_horn_vars(f.num_vars);
    ctx.stats.add_assignments(assignments);
    if ctx.dumping() {
        ctx.dump(&format!("{}\n", f.dump()))?;
    }
    let model = match horn_solve(&f) {
        HornResult::Unsat => return Ok(None),
        HornResult::Sat(m) => m,
    };
    let keep: Vec<usize> = (0..sigmas.len()).filter(|&i| !model[p_sigma[i] as usize]).collect();
    let mut free = BTreeMap::new();
    for a in 0..n {
        if lay.in_s[a].is_some() {
            continue;
        }
        let per: Vec<Vec<u32>> = keep
            .iter()
            .map(|&si| {
                vars[a][si]
                    .iter()
                    .filter(|&&(_, v)| !model[v as usize])
                    .map(|&(t, _)| t)
                    .collect()
            })
            .collect();
        free.insert(lay.consts[a].clone(), per);
    }
    Ok(Some(Availability {
        sigmas: keep.iter().map(|&i| sigmas[i].clone()).collect(),
        s: s.to_vec(),
        free,
    }))
}

fn enumerate_sigmas(
    table: &TypeTable,
    base: &[&Vec<u32>],
    facts: &[(usize, usize, Edge)],
    cur: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
    limit: usize,
) -> Result<()> {
    let k = cur.len();
    if k == base.len() {
        if out.len() >= limit {
            return Err(Error::guard(format!("more than {limit} S-assignments")));
        }
        out.push(cur.clone());
        return Ok(());
    }
    for &t in base[k] {
        cur.push(t);
        let ok = facts.iter().all(|&(x, y, e)| {
            x.max(y) != k || table.compat(e, cur[x] as usize, cur[y] as usize)
        });
        if ok {
            enumerate_sigmas(table, base, facts, cur, out, limit)?;
        }
        cur.pop();
    }
    Ok(())
}

/// Clauses `⋀{p_{t,x} : t ⇝ t'} → p_{t',y}`, factored through auxiliary
/// variables per compatibility key so that the size stays linear in the
/// number of types.
fn transfer(f: &mut HornFormula, table: &TypeTable, e: Edge, xs: &[(u32, u32)], ys: &[(u32, u32)]) {
    let mut src: BTreeMap<(u64, u64), Vec<u32>> = BTreeMap::new();
    for &(t, v) in xs {
        src.entry(table.source_key(e, t as usize)).or_default().push(v);
    }
    let mut dst: BTreeMap<(u64, u64), Vec<u32>> = BTreeMap::new();
    for &(t, v) in ys {
        dst.entry(table.target_key(e, t as usize)).or_default().push(v);
    }
    let groups: Vec<((u64, u64), u32)> = src
        .into_iter()
        .map(|(key, body)| {
            let g = f.fresh();
            f.add(body, Some(g));
            (key, g)
        })
        .collect();
    for (key, heads) in dst {
        let body: Vec<u32> = groups
            .iter()
            .filter(|&&(sk, _)| keys_compat(sk, key))
            .map(|&(_, g)| g)
            .collect();
        let h = f.fresh();
        f.add(body, Some(h));
        for v in heads {
            f.add(vec![h], Some(v));
        }
    }
}

/// A disjunct `C(a)` of a query whose answer is fixed to the constant `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub constant: Sym,
    pub concept: Concept,
}

/// Whether the disjunction of the Boolean ELIQs `beliqs` (as concepts
/// `C` for `∃u.C`) and the `targets` is entailed by the tree unraveling of
/// `d` at `S` under `o`.
pub fn entails_disjunction(
    ctx: &Ctx,
    o: &Ontology,
    d: &Database,
    s: &BTreeSet<Sym>,
    beliqs: &[Concept],
    targets: &[Target],
) -> Result<bool> {
    let globals: Vec<Concept> = beliqs.iter().map(|c| Concept::not(c.clone())).collect();
    let extra: Vec<Concept> = targets.iter().map(|t| t.concept.clone()).collect();
    let (sys, handles) = TypeSystem::for_ontology(o, &extra, &globals, ctx.limits.max_closure)?;
    let mut d = d.clone();
    for t in targets {
        d.insert(Atom::Concept(Sym::new(TOP_NAME), t.constant.clone()));
    }
    let s: Vec<Sym> = s.iter().cloned().collect();
    for table in &sys.tables {
        let Some(av) = availability(ctx, &sys, table, &d, &s)? else {
            continue;
        };
        if has_countermodel(table, &av, targets, &handles) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Some remaining S-assignment refutes every target at S constants, and
/// every other target constant has a remaining type refuting its targets.
fn has_countermodel(table: &TypeTable, av: &Availability, targets: &[Target], handles: &[Core]) -> bool {
    let refutes = |t: u32, c: &Sym| {
        targets
            .iter()
            .zip(handles)
            .filter(|(tg, _)| tg.constant == *c)
            .all(|(_, h)| !h.eval(table.types[t as usize]))
    };
    let s_pos: BTreeMap<&Sym, usize> = av.s.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let others: BTreeSet<&Sym> = targets
        .iter()
        .map(|t| &t.constant)
        .filter(|c| !s_pos.contains_key(c))
        .collect();
    av.sigmas.iter().enumerate().any(|(si, sigma)| {
        s_pos.iter().all(|(c, &i)| refutes(sigma[i], c))
            && others
                .iter()
                .all(|c| av.free[*c][si].iter().any(|&t| refutes(t, c)))
    })
}

/// Constants `a` of `d` with `a ∈ Q(D≈_∅)` for the ELIQ `C(x)`, all at
/// once from one least model.
pub fn entailed_constants(ctx: &Ctx, o: &Ontology, d: &Database, c: &Concept) -> Result<BTreeSet<Sym>> {
    let (sys, handles) = TypeSystem::for_ontology(o, std::slice::from_ref(c), &[], ctx.limits.max_closure)?;
    let h = &handles[0];
    let adom = d.adom();
    let mut out: BTreeSet<Sym> = adom.clone();
    for table in &sys.tables {
        let Some(av) = availability(ctx, &sys, table, d, &[])? else {
            continue;
        };
        for (a, per) in &av.free {
            if per.iter().flatten().any(|&t| !h.eval(table.types[t as usize])) {
                out.remove(a);
            }
        }
    }
    Ok(out)
}

/// Splits a disjunction of bELIQs into Boolean concepts and targets at the
/// answer tuple.
pub fn split_beliqs(q: &[Cq], a: &[Sym]) -> Result<(Vec<Concept>, Vec<Target>)> {
    let mut beliqs = Vec::new();
    let mut targets = Vec::new();
    for p in q {
        if !p.is_beliq() {
            return Err(Error::Unsupported(format!("disjunct {p} is not a bELIQ")));
        }
        let c = p.to_concept().expect("bELIQ has a concept form");
        if p.is_boolean() {
            beliqs.push(c);
        } else {
            let constant = a
                .first()
                .ok_or_else(|| Error::Invalid("unary disjunct needs an answer constant".into()))?;
            targets.push(Target {
                constant: constant.clone(),
                concept: c,
            });
        }
    }
    Ok((beliqs, targets))
}

/// Whether `ā ∈ Q(D≈_S)` for `Q = (o, q)` with `q` a disjunction of bELIQs.
pub fn unravel_entails(
    q: &[Cq],
    o: &Ontology,
    d: &Database,
    a: &[Sym],
    s: &BTreeSet<Sym>,
) -> Result<bool> {
    unravel_entails_ctx(&Ctx::default(), q, o, d, a, s)
}

pub fn unravel_entails_ctx(
    ctx: &Ctx,
    q: &[Cq],
    o: &Ontology,
    d: &Database,
    a: &[Sym],
    s: &BTreeSet<Sym>,
) -> Result<bool> {
    let (beliqs, targets) = split_beliqs(q, a)?;
    entails_disjunction(ctx, o, d, s, &beliqs, &targets)
}

/// Whether the tree unraveling of `d` at `S` has no model of `o`.
pub fn unravel_unsat(ctx: &Ctx, o: &Ontology, d: &Database, s: &BTreeSet<Sym>) -> Result<bool> {
    entails_disjunction(ctx, o, d, s, &[], &[])
}
