//! Variable orderings for the output stage: a minfill elimination order over
//! the primal graph, the static decision priority derived from it, and the
//! dynamic VSADS alternative.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::formula::{CircuitFormula, Clause, Var};

/// Undirected graph over the variables that occur in clauses; two variables
/// are adjacent iff they share a clause.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrimalGraph {
    adj: BTreeMap<Var, BTreeSet<Var>>,
}

impl PrimalGraph {
    pub fn from_clauses(clauses: &[Clause]) -> PrimalGraph {
        let mut adj: BTreeMap<Var, BTreeSet<Var>> = BTreeMap::new();
        for c in clauses {
            for a in c.vars() {
                let entry = adj.entry(a).or_default();
                entry.extend(c.vars().filter(|&b| b != a));
            }
        }
        PrimalGraph { adj }
    }

    pub fn from_formula(f: &CircuitFormula) -> PrimalGraph {
        PrimalGraph::from_clauses(f.clauses())
    }

    /// Builds a graph from an explicit edge list.
    pub fn from_edges(vertices: impl IntoIterator<Item = Var>, edges: &[(Var, Var)]) -> PrimalGraph {
        let mut adj: BTreeMap<Var, BTreeSet<Var>> =
            vertices.into_iter().map(|v| (v, BTreeSet::new())).collect();
        for &(a, b) in edges {
            if a != b {
                adj.entry(a).or_default().insert(b);
                adj.entry(b).or_default().insert(a);
            }
        }
        PrimalGraph { adj }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Var> + '_ {
        self.adj.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: Var) -> Option<&BTreeSet<Var>> {
        self.adj.get(&v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationOrder {
    pub order: Vec<Var>,
    /// Largest neighborhood met at elimination time, i.e. the width of the
    /// induced tree decomposition.
    pub width: usize,
}

fn fill_in(adj: &HashMap<Var, BTreeSet<Var>>, v: Var) -> usize {
    let nb: Vec<Var> = adj[&v].iter().copied().collect();
    let mut missing = 0;
    for (i, a) in nb.iter().enumerate() {
        let na = &adj[a];
        missing += nb[i + 1..].iter().filter(|b| !na.contains(b)).count();
    }
    missing
}

/// Greedy minfill: eliminate the vertex needing the fewest fill edges, ties
/// broken by smallest degree, then smallest index.
pub fn minfill_order(g: &PrimalGraph) -> EliminationOrder {
    let mut adj: HashMap<Var, BTreeSet<Var>> =
        g.adj.iter().map(|(&v, nb)| (v, nb.clone())).collect();
    let mut fill: BTreeMap<Var, usize> = adj.keys().map(|&v| (v, fill_in(&adj, v))).collect();
    let mut order = Vec::with_capacity(adj.len());
    let mut width = 0;

    while let Some((&v, _)) = fill
        .iter()
        .min_by_key(|(&v, &f)| (f, adj[&v].len(), v))
    {
        let nb: Vec<Var> = adj[&v].iter().copied().collect();
        width = width.max(nb.len());
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                adj.get_mut(&a).expect("live vertex").insert(b);
                adj.get_mut(&b).expect("live vertex").insert(a);
            }
        }
        for a in &nb {
            adj.get_mut(a).expect("live vertex").remove(&v);
        }
        adj.remove(&v);
        fill.remove(&v);
        order.push(v);

        // Only vertices within distance two of `v` can see their fill change.
        let mut touched: BTreeSet<Var> = nb.iter().copied().collect();
        for a in &nb {
            touched.extend(adj[a].iter().copied());
        }
        for u in touched {
            fill.insert(u, fill_in(&adj, u));
        }
    }

    EliminationOrder { order, width }
}

/// Static priority over outputs: rank 0 is decided first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionOrder {
    rank: HashMap<Var, usize>,
    sequence: Vec<Var>,
}

impl DecisionOrder {
    /// Uses `sequence` as given: earlier variables are decided first.
    pub fn from_sequence(sequence: Vec<Var>) -> DecisionOrder {
        let rank = sequence.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        DecisionOrder { rank, sequence }
    }

    pub fn rank(&self, v: Var) -> Option<usize> {
        self.rank.get(&v).copied()
    }

    /// Outputs in decision order.
    pub fn sequence(&self) -> &[Var] {
        &self.sequence
    }

    /// Highest-priority variable among `candidates`. Variables without a rank
    /// come after every ranked one, by index.
    pub fn pick(&self, candidates: impl IntoIterator<Item = Var>) -> Option<Var> {
        candidates
            .into_iter()
            .min_by_key(|&v| (self.rank(v).unwrap_or(usize::MAX), v))
    }
}

/// Ranks the outputs occurring in `f` by descending elimination position, so
/// the last-eliminated output is decided first.
pub fn decision_priority(f: &CircuitFormula, e: &EliminationOrder) -> Result<DecisionOrder> {
    let position: HashMap<Var, usize> = e.order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let occurring = f.occurring_vars();
    let mut ys: Vec<(usize, Var)> = Vec::new();
    for &y in f.outputs().iter().filter(|y| occurring.contains(y)) {
        let p = *position.get(&y).ok_or(Error::MissingFromOrder(y))?;
        ys.push((p, y));
    }
    ys.sort_unstable_by(|a, b| b.cmp(a));
    Ok(DecisionOrder::from_sequence(ys.into_iter().map(|(_, y)| y).collect()))
}

/// VSADS: activity bumped on conflicts mixed with occurrence counts in the
/// active clauses.
#[derive(Clone, Debug)]
pub struct Vsads {
    activity: HashMap<Var, f64>,
    decisions: u64,
    weight: f64,
    decay: f64,
    period: u64,
}

impl Default for Vsads {
    fn default() -> Vsads {
        Vsads {
            activity: HashMap::new(),
            decisions: 0,
            weight: 1.0,
            decay: 0.95,
            period: 64,
        }
    }
}

impl Vsads {
    pub fn new() -> Vsads {
        Vsads::default()
    }

    pub fn activity(&self, v: Var) -> f64 {
        self.activity.get(&v).copied().unwrap_or(0.0)
    }

    pub fn bump(&mut self, vars: impl IntoIterator<Item = Var>) {
        for v in vars {
            *self.activity.entry(v).or_default() += 1.0;
        }
    }

    /// Records a decision; every `period` decisions all activities decay.
    pub fn on_decision(&mut self) {
        self.decisions += 1;
        if self.decisions % self.period == 0 {
            for a in self.activity.values_mut() {
                *a *= self.decay;
            }
        }
    }

    /// The candidate maximizing `weight · activity + occurrences`, ties by
    /// smallest index.
    pub fn pick(&self, clauses: &[Clause], candidates: &[Var]) -> Result<Var> {
        let mut occ: HashMap<Var, u32> = HashMap::new();
        for c in clauses {
            for v in c.vars() {
                *occ.entry(v).or_default() += 1;
            }
        }
        let score = |v: Var| self.weight * self.activity(v) + f64::from(occ.get(&v).copied().unwrap_or(0));
        let mut best: Option<(f64, Var)> = None;
        for &v in candidates {
            let s = score(v);
            match best {
                Some((bs, bv)) if bs > s || (bs == s && bv < v) => {}
                _ => best = Some((s, v)),
            }
        }
        best.map(|(_, v)| v).ok_or(Error::NoOutputVariable)
    }
}
