use std::fmt::Write as _;

/// A propositional Horn clause; `head == None` stands for ⊥.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub body: Vec<u32>,
    pub head: Option<u32>,
}

/// A conjunction of Horn clauses over variables `0..num_vars`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HornFormula {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HornResult {
    /// The least model of the formula.
    Sat(Vec<bool>),
    Unsat,
}

impl HornResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, HornResult::Sat(_))
    }
}

impl HornFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> u32 {
        self.num_vars += 1;
        (self.num_vars - 1) as u32
    }

    pub fn add(&mut self, body: Vec<u32>, head: Option<u32>) {
        self.clauses.push(Clause { body, head });
    }

    pub fn size(&self) -> usize {
        self.clauses.iter().map(|c| c.body.len() + 1).sum()
    }

    /// One clause per line: body variables joined by `-`, then `>` and the
    /// head, with `F` for ⊥.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.clauses {
            let body: Vec<String> = c.body.iter().map(u32::to_string).collect();
            let head = c.head.map_or_else(|| "F".to_string(), |h| h.to_string());
            let _ = writeln!(out, "{}>{}", body.join("-"), head);
        }
        out
    }
}

/// Unit propagation with per-clause counters of unsatisfied body atoms;
/// linear in the total clause size.
pub fn horn_solve(f: &HornFormula) -> HornResult {
    let n = f.num_vars;
    let mut watch: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut remaining: Vec<u32> = Vec::with_capacity(f.clauses.len());
    let mut value = vec![false; n];
    let mut queue: Vec<u32> = Vec::new();
    for (ci, c) in f.clauses.iter().enumerate() {
        remaining.push(c.body.len() as u32);
        for &v in &c.body {
            watch[v as usize].push(ci as u32);
        }
        if c.body.is_empty() {
            match c.head {
                None => return HornResult::Unsat,
                Some(h) if !value[h as usize] => {
                    value[h as usize] = true;
                    queue.push(h);
                }
                Some(_) => {}
            }
        }
    }
    while let Some(v) = queue.pop() {
        for &ci in &watch[v as usize] {
            let r = &mut remaining[ci as usize];
            *r -= 1;
            if *r == 0 {
                match f.clauses[ci as usize].head {
                    None => return HornResult::Unsat,
                    Some(h) if !value[h as usize] => {
                        value[h as usize] = true;
                        queue.push(h);
                    }
                    Some(_) => {}
                }
            }
        }
    }
    HornResult::Sat(value)
}
