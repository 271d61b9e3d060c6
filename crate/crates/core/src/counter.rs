//! Exact model counting with dynamic component decomposition and a component
//! cache that outlives individual queries.
//!
//! The same [`SharedCache`] serves every counting query of an entropy run,
//! and also holds the output-stage entries, since both are keyed by the
//! canonical encoding of a residual clause set.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::formula::residual::{propagate, vars_of, Propagation};
use crate::formula::{Clause, Var};

/// Exact nonnegative model count.
pub type BigCount = BigUint;

/// A connected set of active clauses and the variables they touch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub clauses: Vec<Clause>,
    pub vars: Vec<Var>,
}

impl Component {
    pub fn key(&self) -> CacheKey {
        CacheKey::of(&self.clauses)
    }
}

/// Result of splitting a residual clause set over a variable scope.
#[derive(Clone, Debug, Default)]
pub struct Split {
    pub components: Vec<Component>,
    /// Scope inputs that occur in no active clause.
    pub free_inputs: usize,
    /// Scope outputs that occur in no active clause.
    pub free_outputs: Vec<Var>,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Connected components of the primal graph of `clauses`, ordered by their
/// smallest variable.
pub fn components(clauses: &[Clause]) -> Vec<Component> {
    let vars = vars_of(clauses);
    if vars.is_empty() {
        return Vec::new();
    }
    let max = vars.last().map_or(0, |v| v.index()) as usize;
    let mut dense = vec![u32::MAX; max + 1];
    for (i, v) in vars.iter().enumerate() {
        dense[v.index() as usize] = i as u32;
    }
    let mut parent: Vec<u32> = (0..vars.len() as u32).collect();
    for c in clauses {
        let first = dense[c.lits()[0].var().index() as usize];
        for v in c.vars().skip(1) {
            let a = find(&mut parent, first);
            let b = find(&mut parent, dense[v.index() as usize]);
            if a != b {
                // The smaller dense index stays root.
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi as usize] = lo;
            }
        }
    }
    collect_components(clauses, &vars, &dense, &mut parent)
}

fn collect_components(
    clauses: &[Clause],
    vars: &[Var],
    dense: &[u32],
    parent: &mut [u32],
) -> Vec<Component> {
    let mut slot = vec![usize::MAX; vars.len()];
    let mut out: Vec<Component> = Vec::new();
    for i in 0..vars.len() as u32 {
        let r = find(parent, i) as usize;
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Component {
                clauses: Vec::new(),
                vars: Vec::new(),
            });
        }
        out[slot[r]].vars.push(vars[i as usize]);
    }
    for c in clauses {
        let v = c.lits()[0].var();
        let r = find(parent, dense[v.index() as usize]) as usize;
        out[slot[r]].clauses.push(c.clone());
    }
    out
}

/// Splits `clauses` into components and classifies the scope variables that
/// no active clause mentions.
pub fn split_components(
    clauses: &[Clause],
    scope: &[Var],
    is_output: impl Fn(Var) -> bool,
) -> Split {
    let components = components(clauses);
    let mut active: Vec<Var> = components.iter().flat_map(|c| c.vars.iter().copied()).collect();
    active.sort_unstable();
    let mut free_inputs = 0;
    let mut free_outputs = Vec::new();
    for &v in scope {
        if active.binary_search(&v).is_err() {
            if is_output(v) {
                free_outputs.push(v);
            } else {
                free_inputs += 1;
            }
        }
    }
    Split {
        components,
        free_inputs,
        free_outputs,
    }
}

/// Canonical encoding of a clause set: clauses sorted and deduplicated, each
/// written as its sorted literal codes followed by a 0 separator. The full
/// encoding is the key, so distinct clause sets never collide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey(Vec<u32>);

impl CacheKey {
    pub fn of(clauses: &[Clause]) -> CacheKey {
        let mut refs: Vec<&Clause> = clauses.iter().collect();
        refs.sort_unstable();
        refs.dedup();
        let mut codes = Vec::with_capacity(refs.iter().map(|c| c.len() + 1).sum());
        for c in refs {
            codes.extend(c.iter().map(|l| l.code()));
            codes.push(0);
        }
        CacheKey(codes)
    }

    pub fn byte_len(&self) -> usize {
        self.0.len() * std::mem::size_of::<u32>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub count: BigCount,
    /// Present for components that still contained outputs when stored.
    pub entropy: Option<f64>,
    /// Number of outputs in the component when stored.
    pub y_count: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct CacheStats {
    pub x_hits: u64,
    pub x_misses: u64,
    pub y_hits: u64,
    pub y_misses: u64,
    /// Whole-cache resets forced by the byte budget.
    pub resets: u64,
}

/// Component cache shared by the counting and entropy stages of one run.
#[derive(Debug, Default)]
pub struct SharedCache {
    map: HashMap<CacheKey, CacheEntry>,
    bytes: usize,
    budget: Option<usize>,
    stats: CacheStats,
}

const ENTRY_OVERHEAD: usize = 64;

impl SharedCache {
    pub fn new() -> SharedCache {
        SharedCache::default()
    }

    /// A cache that is cleared completely whenever its estimated size would
    /// exceed `bytes`.
    pub fn with_budget(bytes: usize) -> SharedCache {
        SharedCache {
            budget: Some(bytes),
            ..SharedCache::default()
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    pub fn bytes(&self) -> usize {
        self.bytes
    }

    /// Count lookup for an output-free component.
    pub fn get_count(&mut self, key: &CacheKey) -> Option<BigCount> {
        match self.map.get(key) {
            Some(e) => {
                self.stats.x_hits += 1;
                Some(e.count.clone())
            }
            None => {
                self.stats.x_misses += 1;
                None
            }
        }
    }

    /// Entropy and count lookup for a component with outputs.
    pub fn get_entropy(&mut self, key: &CacheKey) -> Option<(f64, BigCount)> {
        match self.map.get(key).and_then(|e| e.entropy.map(|h| (h, e.count.clone()))) {
            Some(hit) => {
                self.stats.y_hits += 1;
                Some(hit)
            }
            None => {
                self.stats.y_misses += 1;
                None
            }
        }
    }

    pub fn peek(&self, key: &CacheKey) -> Option<&CacheEntry> {
        self.map.get(key)
    }

    pub fn insert(&mut self, key: CacheKey, entry: CacheEntry) {
        let size = key.byte_len() + (entry.count.bits() as usize).div_ceil(8) + ENTRY_OVERHEAD;
        if let Some(budget) = self.budget {
            if self.bytes + size > budget {
                self.map.clear();
                self.bytes = 0;
                self.stats.resets += 1;
            }
        }
        if let Some(old) = self.map.insert(key.clone(), entry) {
            let old_size =
                key.byte_len() + (old.count.bits() as usize).div_ceil(8) + ENTRY_OVERHEAD;
            self.bytes -= old_size;
        }
        self.bytes += size;
    }

    pub fn clear(&mut self) {
        self.map.clear();
        self.bytes = 0;
    }
}

/// Most occurrences first, ties by smallest index.
fn branch_var(comp: &Component) -> Var {
    let mut occ: HashMap<Var, u32> = HashMap::with_capacity(comp.vars.len());
    for c in &comp.clauses {
        for v in c.vars() {
            *occ.entry(v).or_default() += 1;
        }
    }
    comp.vars
        .iter()
        .copied()
        .max_by(|a, b| occ[a].cmp(&occ[b]).then(b.cmp(a)))
        .expect("component has variables")
}

/// A counting session over a borrowed cache.
pub struct Counter<'c> {
    cache: &'c mut SharedCache,
    use_cache: bool,
    decisions: u64,
}

impl<'c> Counter<'c> {
    pub fn new(cache: &'c mut SharedCache, use_cache: bool) -> Counter<'c> {
        Counter {
            cache,
            use_cache,
            decisions: 0,
        }
    }

    /// Branch decisions made so far by this session.
    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    /// Models of `clauses` over the variables occurring in them. Unit
    /// clauses are allowed.
    pub fn count_clauses(&mut self, clauses: &[Clause]) -> BigCount {
        let n_vars = vars_of(clauses).len();
        match propagate(clauses, &[]) {
            Propagation::Conflict { .. } => BigCount::zero(),
            Propagation::Residual {
                clauses: residual,
                assigned,
            } => {
                let free = n_vars - assigned.len() - vars_of(&residual).len();
                self.count_residual(&residual) << free
            }
        }
    }

    /// Models of a propagated residual (no units, no empty clause) over the
    /// variables occurring in it.
    pub fn count_residual(&mut self, clauses: &[Clause]) -> BigCount {
        let mut total = BigCount::from(1u32);
        for comp in components(clauses) {
            let c = self.count_component(&comp);
            if c.is_zero() {
                return c;
            }
            total *= c;
        }
        total
    }

    pub fn count_component(&mut self, comp: &Component) -> BigCount {
        let key = self.use_cache.then(|| comp.key());
        if let Some(k) = &key {
            if let Some(c) = self.cache.get_count(k) {
                return c;
            }
        }
        let v = branch_var(comp);
        self.decisions += 1;
        let mut total = BigCount::zero();
        for value in [false, true] {
            if let Propagation::Residual { clauses, assigned } =
                propagate(&comp.clauses, &[v.lit(value)])
            {
                let free = comp.vars.len() - assigned.len() - vars_of(&clauses).len();
                total += self.count_residual(&clauses) << free;
            }
        }
        if let Some(k) = key {
            self.cache.insert(
                k,
                CacheEntry {
                    count: total.clone(),
                    entropy: None,
                    y_count: 0,
                },
            );
        }
        total
    }
}

/// Models of `clauses` over the variables occurring in them.
pub fn count_clauses(clauses: &[Clause], cache: &mut SharedCache, use_cache: bool) -> BigCount {
    Counter::new(cache, use_cache).count_clauses(clauses)
}

/// Models of `clauses` over `scope`, a superset of the clause variables;
/// scope variables absent from every clause double the count.
pub fn count_models(
    clauses: &[Clause],
    scope: &[Var],
    cache: &mut SharedCache,
    use_cache: bool,
) -> BigCount {
    let occurring = vars_of(clauses);
    debug_assert!(occurring.iter().all(|v| scope.contains(v)));
    let free = scope.len() - occurring.len();
    count_clauses(clauses, cache, use_cache) << free
}
