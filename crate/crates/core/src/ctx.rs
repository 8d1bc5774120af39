use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::error::Result;

/// Size bounds that turn runaway instances into reported guard trips.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Maximum number of closure atoms (concept names and existential restrictions).
    pub max_closure: usize,
    /// Maximum active-domain size for brute-force enumerations.
    pub max_adom: usize,
    /// Maximum element count for exact tree-decomposition search.
    pub max_td_elements: usize,
    /// Maximum number of conjuncts produced by distributivity.
    pub max_distributivity: u64,
    /// Maximum size of an exhaustive approximation set.
    pub max_exhaustive: u64,
    /// Maximum number of assignments held by the elimination engine.
    pub max_assignments: usize,
    /// Maximum number of facts in any generated database.
    pub max_facts: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_closure: 24,
            max_adom: 12,
            max_td_elements: 16,
            max_distributivity: 1 << 20,
            max_exhaustive: 1 << 16,
            max_assignments: 1 << 21,
            max_facts: 200_000,
        }
    }
}

#[derive(Debug, Default)]
pub struct Stats {
    horn_vars: AtomicU64,
    assignments: AtomicU64,
}

impl Stats {
    pub fn add_horn_vars(&self, n: usize) {
        self.horn_vars.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn add_assignments(&self, n: usize) {
        self.assignments.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub fn horn_vars(&self) -> u64 {
        self.horn_vars.load(Ordering::Relaxed)
    }

    pub fn assignments(&self) -> u64 {
        self.assignments.load(Ordering::Relaxed)
    }
}

/// Evaluation context shared by all algorithms of one run.
#[derive(Debug, Default)]
pub struct Ctx {
    pub limits: Limits,
    pub stats: Stats,
    dump: Option<Mutex<File>>,
}

impl Ctx {
    pub fn new(limits: Limits) -> Self {
        Ctx {
            limits,
            ..Ctx::default()
        }
    }

    /// Every Horn formula built afterwards is appended to `path`.
    pub fn with_horn_dump(mut self, path: &Path) -> Result<Self> {
        self.dump = Some(Mutex::new(File::create(path)?));
        Ok(self)
    }

    pub fn dumping(&self) -> bool {
        self.dump.is_some()
    }

    pub(crate) fn dump(&self, text: &str) -> Result<()> {
        if let Some(file) = &self.dump {
            let mut file = file.lock().expect("dump file lock poisoned");
            file.write_all(text.as_bytes())?;
        }
        Ok(())
    }
}
