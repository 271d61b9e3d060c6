//! The entropy search over outputs.
//!
//! Each call works on a residual clause set that still mentions outputs. It
//! checks the entropy cache, picks an output, conditions both ways with unit
//! propagation, splits each residual into variable-disjoint components and
//! recurses on the ones that still contain outputs. Output-free components go
//! to the exact counter. Entropies of components add and their counts
//! multiply; a decision combines its two branches by their probabilities.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::counter::{components, BigCount, CacheEntry, CacheKey, CacheStats, Counter, SharedCache};
use crate::error::{Error, Result};
use crate::formula::residual::{propagate, vars_of, Propagation};
use crate::formula::{CircuitFormula, Clause, Lit, Var};
use crate::numeric::ratio;
use crate::ordering::{decision_priority, minfill_order, DecisionOrder, PrimalGraph, Vsads};
use crate::preprocess::{apply_pre, PreStats};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    /// Static order: reverse minfill elimination order over the outputs.
    #[default]
    Minfill,
    /// Dynamic activity-plus-occurrence scoring.
    Vsads,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PseConfig {
    pub heuristic: Heuristic,
    pub use_pre: bool,
    pub use_ycache: bool,
    pub use_xcache: bool,
    pub use_decomposition: bool,
    pub emit_trace: bool,
    /// Explicit output decision order; overrides the heuristic when set.
    /// Outputs missing from it are decided after the listed ones, by index.
    pub order: Option<Vec<Var>>,
    /// Soft limit, checked before each output decision.
    pub timeout: Option<Duration>,
    /// Byte budget for the shared cache; unbounded when `None`.
    pub cache_bytes: Option<usize>,
}

impl Default for PseConfig {
    fn default() -> PseConfig {
        PseConfig {
            heuristic: Heuristic::Minfill,
            use_pre: true,
            use_ycache: true,
            use_xcache: true,
            use_decomposition: true,
            emit_trace: false,
            order: None,
            timeout: None,
            cache_bytes: None,
        }
    }
}

/// The two branches of an output decision.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSplit {
    pub count0: BigCount,
    pub count1: BigCount,
    pub h0: f64,
    pub h1: f64,
    /// Variables of the decision node missing below each branch.
    pub gap0: u32,
    pub gap1: u32,
}

impl BranchSplit {
    /// Branch without gaps, the only shape a circuit formula produces.
    pub fn circuit(count0: BigCount, h0: f64, count1: BigCount, h1: f64) -> BranchSplit {
        BranchSplit {
            count0,
            count1,
            h0,
            h1,
            gap0: 0,
            gap1: 0,
        }
    }

    fn weights(&self) -> (BigCount, BigCount) {
        (&self.count0 << self.gap0, &self.count1 << self.gap1)
    }

    /// Branch probabilities `2^gap_i · count_i / total`; `(0, 0)` when the
    /// total is zero.
    pub fn probabilities(&self) -> (f64, f64) {
        let (w0, w1) = self.weights();
        let total = &w0 + &w1;
        if total.is_zero() {
            return (0.0, 0.0);
        }
        (ratio(&w0, &total), ratio(&w1, &total))
    }
}

/// Entropy and count of a decision from its branches:
/// `count = Σ 2^gap_i · count_i` and `H = Σ p_i · (h_i + gap_i − log2 p_i)`.
pub fn combine_decision(s: &BranchSplit) -> (f64, BigCount) {
    let (w0, w1) = s.weights();
    let total = &w0 + &w1;
    if total.is_zero() {
        return (0.0, total);
    }
    let (p0, p1) = s.probabilities();
    let mut h = 0.0;
    for (p, hi, gap) in [(p0, s.h0, s.gap0), (p1, s.h1, s.gap1)] {
        if p > 0.0 {
            h += p * (hi + f64::from(gap) - p.log2());
        }
    }
    (h, total)
}

/// One branch outcome of a trace node, or the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEdge {
    /// Outputs fixed by propagation, the decided one excluded.
    pub forced: Vec<Lit>,
    /// Product of the output-free component counts, times `2^k` for `k`
    /// inputs left unconstrained.
    #[serde(with = "decimal")]
    pub factor: BigCount,
    /// Trace nodes of the components that still contain outputs.
    pub children: Vec<usize>,
    #[serde(with = "decimal")]
    pub count: BigCount,
    /// Propagation failed on this branch.
    pub conflict: bool,
}

impl TraceEdge {
    fn zero(conflict: bool) -> TraceEdge {
        TraceEdge {
            forced: Vec::new(),
            factor: BigCount::zero(),
            children: Vec::new(),
            count: BigCount::zero(),
            conflict,
        }
    }
}

/// An output decision. Nodes are stored children first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub var: Var,
    /// Outputs of the component the decision was made in.
    pub yvars: Vec<Var>,
    pub lo: TraceEdge,
    pub hi: TraceEdge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    /// Complete order over the outputs when the run used a static order.
    pub order: Option<Vec<Var>>,
    pub decomposition: bool,
    pub root_yvars: Vec<Var>,
    pub nodes: Vec<TraceNode>,
    pub root: TraceEdge,
}

mod decimal {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::counter::BigCount;

    pub fn serialize<S: Serializer>(n: &BigCount, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigCount, D::Error> {
        let text = String::deserialize(d)?;
        BigCount::parse_bytes(text.as_bytes(), 10)
            .ok_or_else(|| D::Error::custom(format!("not a decimal count: {text:?}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PseStats {
    /// Output decisions.
    pub decisions: u64,
    /// Branch decisions inside the counter.
    pub x_decisions: u64,
    /// Components with outputs reached through decomposition.
    pub components: u64,
    /// Output decisions recorded as trace nodes (cache hits excluded).
    pub trace_nodes: u64,
    pub cache: CacheStats,
    pub cache_entries: usize,
    /// Width of the minfill elimination order, when one was computed.
    pub treewidth: Option<usize>,
    pub pre: Option<PreStats>,
    pub time_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyResult {
    /// Bits.
    pub entropy: f64,
    pub count: BigCount,
    pub stats: PseStats,
    pub trace: Option<Trace>,
}

enum Chooser {
    Static(DecisionOrder),
    Dynamic(Vsads),
}

/// Picks the next output among `candidates` (the outputs of `clauses`).
pub fn pick_good_var(
    clauses: &[Clause],
    candidates: &[Var],
    order: Option<&DecisionOrder>,
    vsads: Option<&Vsads>,
) -> Result<Var> {
    match (order, vsads) {
        (Some(o), _) => o.pick(candidates.iter().copied()).ok_or(Error::NoOutputVariable),
        (None, Some(s)) => s.pick(clauses, candidates),
        (None, None) => candidates.iter().copied().min().ok_or(Error::NoOutputVariable),
    }
}

struct Unit {
    entropy: f64,
    count: BigCount,
    node: Option<usize>,
}

struct Branch {
    entropy: f64,
    count: BigCount,
    edge: TraceEdge,
}

struct Engine<'a> {
    outputs: Vec<bool>,
    cfg: &'a PseConfig,
    cache: SharedCache,
    chooser: Chooser,
    stats: PseStats,
    nodes: Option<Vec<TraceNode>>,
    node_of: HashMap<CacheKey, usize>,
    deadline: Option<Instant>,
}

impl Engine<'_> {
    fn is_output(&self, v: Var) -> bool {
        self.outputs.get(v.index() as usize).copied().unwrap_or(false)
    }

    fn count_x(&mut self, f: impl FnOnce(&mut Counter<'_>) -> BigCount) -> BigCount {
        let mut counter = Counter::new(&mut self.cache, self.cfg.use_xcache);
        let n = f(&mut counter);
        self.stats.x_decisions += counter.decisions();
        n
    }

    /// Entropy and count of a propagated residual that mentions outputs,
    /// over the variables occurring in it.
    fn unit(&mut self, clauses: Vec<Clause>) -> Result<Unit> {
        let key = self.cfg.use_ycache.then(|| CacheKey::of(&clauses));
        if let Some(k) = &key {
            if let Some((entropy, count)) = self.cache.get_entropy(k) {
                let node = self.node_of.get(k).copied();
                if self.nodes.is_none() || node.is_some() {
                    return Ok(Unit {
                        entropy,
                        count,
                        node,
                    });
                }
            }
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Error::Timeout);
        }

        let scope = vars_of(&clauses);
        let yvars: Vec<Var> = scope.iter().copied().filter(|&v| self.is_output(v)).collect();
        let y = match &mut self.chooser {
            Chooser::Static(order) => pick_good_var(&clauses, &yvars, Some(order), None)?,
            Chooser::Dynamic(vsads) => {
                vsads.on_decision();
                pick_good_var(&clauses, &yvars, None, Some(vsads))?
            }
        };
        self.stats.decisions += 1;

        let lo = self.branch(&clauses, &scope, Some(y.neg()))?;
        let hi = self.branch(&clauses, &scope, Some(y.pos()))?;
        let (entropy, count) = combine_decision(&BranchSplit::circuit(
            lo.count,
            lo.entropy,
            hi.count,
            hi.entropy,
        ));

        self.stats.trace_nodes += 1;
        let node = self.nodes.as_mut().map(|nodes| {
            nodes.push(TraceNode {
                var: y,
                yvars: yvars.clone(),
                lo: lo.edge,
                hi: hi.edge,
            });
            nodes.len() - 1
        });
        if let Some(k) = key {
            if let Some(id) = node {
                self.node_of.insert(k.clone(), id);
            }
            self.cache.insert(
                k,
                CacheEntry {
                    count: count.clone(),
                    entropy: Some(entropy),
                    y_count: yvars.len() as u32,
                },
            );
        }
        Ok(Unit {
            entropy,
            count,
            node,
        })
    }

    /// Conditions `clauses` on `decision` (if any) and solves the residual
    /// over `scope`.
    fn branch(&mut self, clauses: &[Clause], scope: &[Var], decision: Option<Lit>) -> Result<Branch> {
        let zero = |conflict| Branch {
            entropy: 0.0,
            count: BigCount::zero(),
            edge: TraceEdge::zero(conflict),
        };
        let assumptions: Vec<Lit> = decision.into_iter().collect();
        let (residual, assigned) = match propagate(clauses, &assumptions) {
            Propagation::Conflict { clause, .. } => {
                if let (Chooser::Dynamic(vsads), Some(i)) = (&mut self.chooser, clause) {
                    let outputs = &self.outputs;
                    vsads.bump(clauses[i].vars().filter(|v| outputs[v.index() as usize]));
                }
                return Ok(zero(true));
            }
            Propagation::Residual { clauses, assigned } => (clauses, assigned),
        };

        let forced: Vec<Lit> = assigned
            .iter()
            .copied()
            .filter(|&l| self.is_output(l.var()) && Some(l) != decision)
            .collect();
        let occurring: BTreeSet<Var> = vars_of(&residual).into_iter().collect();
        let fixed: BTreeSet<Var> = assigned.iter().map(|l| l.var()).collect();
        let mut free_inputs = 0usize;
        let mut free_output = None;
        for &v in scope {
            if !fixed.contains(&v) && !occurring.contains(&v) {
                if self.is_output(v) {
                    free_output.get_or_insert(v);
                } else {
                    free_inputs += 1;
                }
            }
        }

        let mut factor = BigCount::one() << free_inputs;
        let mut entropy = 0.0;
        let mut count_children = BigCount::one();
        let mut children = Vec::new();
        let has_output = |c: &[Clause], outputs: &[bool]| {
            c.iter().flat_map(|c| c.vars()).any(|v| outputs[v.index() as usize])
        };

        let parts: Vec<Vec<Clause>> = if self.cfg.use_decomposition {
            components(&residual).into_iter().map(|c| c.clauses).collect()
        } else if residual.is_empty() {
            Vec::new()
        } else {
            vec![residual]
        };
        let decomposed = self.cfg.use_decomposition;
        for part in parts {
            if has_output(&part, &self.outputs) {
                if decomposed {
                    self.stats.components += 1;
                }
                let u = self.unit(part)?;
                if u.count.is_zero() {
                    return Ok(zero(false));
                }
                entropy += u.entropy;
                count_children *= u.count;
                children.extend(u.node);
            } else {
                let n = if decomposed {
                    let comp = crate::counter::Component {
                        vars: vars_of(&part),
                        clauses: part,
                    };
                    self.count_x(|c| c.count_component(&comp))
                } else {
                    self.count_x(|c| c.count_residual(&part))
                };
                if n.is_zero() {
                    return Ok(zero(false));
                }
                factor *= n;
            }
        }

        if let Some(var) = free_output {
            return Err(Error::CircuitViolation { var });
        }
        let count = &factor * count_children;
        Ok(Branch {
            entropy,
            count: count.clone(),
            edge: TraceEdge {
                forced,
                factor,
                children,
                count,
                conflict: false,
            },
        })
    }
}

/// Appends the outputs missing from `sequence`, by index.
fn complete_order(sequence: &[Var], outputs: &BTreeSet<Var>) -> Vec<Var> {
    let listed: BTreeSet<Var> = sequence.iter().copied().collect();
    let mut out: Vec<Var> = sequence.iter().copied().filter(|v| outputs.contains(v)).collect();
    out.extend(outputs.iter().copied().filter(|v| !listed.contains(v)));
    out
}

/// Shannon entropy (bits) of the output distribution of `f`, together with
/// its exact model count.
///
/// Fails with [`Error::CircuitViolation`] when an output is left
/// unconstrained on a satisfiable branch, and with [`Error::Timeout`] when
/// the configured limit passes.
pub fn pse_entropy(f: &CircuitFormula, cfg: &PseConfig) -> Result<EntropyResult> {
    let start = Instant::now();
    let mut stats = PseStats::default();
    let pre;
    let formula = if cfg.use_pre {
        let r = apply_pre(f);
        stats.pre = Some(r.stats);
        pre = r.formula;
        &pre
    } else {
        f
    };

    let mut trace_order = None;
    let chooser = match (&cfg.order, cfg.heuristic) {
        (Some(seq), _) => {
            let full = complete_order(seq, formula.outputs());
            trace_order = Some(full.clone());
            Chooser::Static(DecisionOrder::from_sequence(full))
        }
        (None, Heuristic::Minfill) => {
            let e = minfill_order(&PrimalGraph::from_formula(formula));
            stats.treewidth = Some(e.width);
            let d = decision_priority(formula, &e)?;
            let full = complete_order(d.sequence(), formula.outputs());
            trace_order = Some(full.clone());
            Chooser::Static(DecisionOrder::from_sequence(full))
        }
        (None, Heuristic::Vsads) => Chooser::Dynamic(Vsads::new()),
    };

    let mut engine = Engine {
        outputs: formula.output_mask(),
        cfg,
        cache: cfg
            .cache_bytes
            .map_or_else(SharedCache::new, SharedCache::with_budget),
        chooser,
        stats,
        nodes: cfg.emit_trace.then(Vec::new),
        node_of: HashMap::new(),
        deadline: cfg.timeout.map(|t| start + t),
    };
    let scope: Vec<Var> = formula.scope().into_iter().collect();
    let root = engine.branch(formula.clauses(), &scope, None)?;

    let mut stats = engine.stats;
    stats.cache = engine.cache.stats();
    stats.cache_entries = engine.cache.len();
    stats.time_ms = start.elapsed().as_secs_f64() * 1e3;
    let trace = engine.nodes.map(|nodes| Trace {
        order: trace_order,
        decomposition: cfg.use_decomposition,
        root_yvars: formula.outputs().iter().copied().collect(),
        nodes,
        root: root.edge,
    });
    Ok(EntropyResult {
        entropy: if root.count.is_zero() { 0.0 } else { root.entropy },
        count: root.count,
        stats,
        trace,
    })
}
