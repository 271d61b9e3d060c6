//! Algebraic decision diagrams with conjunctive decomposition.
//!
//! A node is a terminal carrying a weight, a decision on an output variable
//! with `lo` (false) and `hi` (true) children, or a conjunction of children
//! over disjoint variables. The weight of an assignment is the product of the
//! terminals reached; the diagram's weight sums it over all assignments of
//! its variables, and its entropy is that of the normalized distribution.
//!
//! Weight and entropy are computed once, when a node is created. A variable
//! missing below a decision child (a gap) doubles that child's weight per
//! missing variable and adds one bit per missing variable to its entropy.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::counter::BigCount;
use crate::error::{Error, Result};
use crate::formula::{Assignment, Lit, Var};
use crate::pse::{combine_decision, BranchSplit, Trace, TraceEdge};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Terminal(BigCount),
    Decision { var: Var, lo: NodeId, hi: NodeId },
    Conj(Vec<NodeId>),
}

#[derive(Clone, Debug)]
struct Entry {
    node: Node,
    vars: BTreeSet<Var>,
    weight: BigCount,
    entropy: f64,
}

/// Largest variable count accepted by [`AddAndDiagram::distribution`].
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Clone, Debug)]
pub struct AddAndDiagram {
    entries: Vec<Entry>,
    /// Present when structurally identical nodes are merged on creation.
    intern: Option<HashMap<Node, NodeId>>,
    order: Option<Vec<Var>>,
    rank: HashMap<Var, usize>,
    root: Option<NodeId>,
}

impl AddAndDiagram {
    /// An empty diagram that merges identical nodes. With an `order`, every
    /// decision must precede (in that order) all variables below it.
    pub fn new(order: Option<Vec<Var>>) -> AddAndDiagram {
        let rank = order
            .iter()
            .flatten()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        AddAndDiagram {
            entries: Vec::new(),
            intern: Some(HashMap::new()),
            order,
            rank,
            root: None,
        }
    }

    /// Like [`AddAndDiagram::new`], but every constructor call makes a fresh
    /// node.
    pub fn unshared(order: Option<Vec<Var>>) -> AddAndDiagram {
        AddAndDiagram {
            intern: None,
            ..AddAndDiagram::new(order)
        }
    }

    pub fn order(&self) -> Option<&[Var]> {
        self.order.as_deref()
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn set_root(&mut self, id: NodeId) -> Result<()> {
        self.check_id(id)?;
        self.root = Some(id);
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.entries[id].node
    }

    pub fn vars(&self, id: NodeId) -> &BTreeSet<Var> {
        &self.entries[id].vars
    }

    pub fn weight_of(&self, id: NodeId) -> &BigCount {
        &self.entries[id].weight
    }

    pub fn entropy_of(&self, id: NodeId) -> f64 {
        self.entries[id].entropy
    }

    /// Root weight; zero for a diagram without root.
    pub fn weight(&self) -> BigCount {
        self.root.map_or_else(BigCount::zero, |r| self.weight_of(r).clone())
    }

    /// Root entropy in bits; zero for a diagram without root.
    pub fn entropy(&self) -> f64 {
        self.root.map_or(0.0, |r| self.entropy_of(r))
    }

    /// Nodes stored, reachable or not.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_id(&self, id: NodeId) -> Result<()> {
        if id < self.entries.len() {
            Ok(())
        } else {
            Err(Error::InvalidDiagram(format!("unknown node {id}")))
        }
    }

    fn add(&mut self, node: Node, vars: BTreeSet<Var>, weight: BigCount, entropy: f64) -> NodeId {
        if let Some(map) = &self.intern {
            if let Some(&id) = map.get(&node) {
                return id;
            }
        }
        let id = self.entries.len();
        if let Some(map) = &mut self.intern {
            map.insert(node.clone(), id);
        }
        self.entries.push(Entry {
            node,
            vars,
            weight,
            entropy,
        });
        id
    }

    pub fn terminal(&mut self, weight: BigCount) -> NodeId {
        self.add(Node::Terminal(weight.clone()), BTreeSet::new(), weight, 0.0)
    }

    fn precedes(&self, a: Var, b: Var) -> bool {
        match (self.rank.get(&a), self.rank.get(&b)) {
            (Some(x), Some(y)) => x < y,
            _ => false,
        }
    }

    pub fn decision(&mut self, var: Var, lo: NodeId, hi: NodeId) -> Result<NodeId> {
        self.check_id(lo)?;
        self.check_id(hi)?;
        let below: BTreeSet<Var> = self.vars(lo).union(self.vars(hi)).copied().collect();
        if below.contains(&var) {
            return Err(Error::InvalidDiagram(format!("{var} repeats below its own decision")));
        }
        if self.order.is_some() {
            if let Some(&w) = below.iter().find(|&&w| !self.precedes(var, w)) {
                return Err(Error::InvalidDiagram(format!("{var} does not precede {w}")));
            }
        }
        let gap = |child: NodeId| (below.len() - self.vars(child).len()) as u32;
        let split = BranchSplit {
            count0: self.weight_of(lo).clone(),
            count1: self.weight_of(hi).clone(),
            h0: self.entropy_of(lo),
            h1: self.entropy_of(hi),
            gap0: gap(lo),
            gap1: gap(hi),
        };
        let (entropy, weight) = combine_decision(&split);
        let mut vars = below;
        vars.insert(var);
        Ok(self.add(Node::Decision { var, lo, hi }, vars, weight, entropy))
    }

    pub fn conj(&mut self, children: Vec<NodeId>) -> Result<NodeId> {
        if children.is_empty() {
            return Err(Error::InvalidDiagram("conjunction without children".into()));
        }
        let mut vars = BTreeSet::new();
        let mut weight = BigCount::one();
        let mut entropy = 0.0;
        for &c in &children {
            self.check_id(c)?;
            for &v in self.vars(c) {
                if !vars.insert(v) {
                    return Err(Error::InvalidDiagram(format!("{v} shared by conjoined children")));
                }
            }
            weight *= self.weight_of(c);
            entropy += self.entropy_of(c);
        }
        if weight.is_zero() {
            entropy = 0.0;
        }
        Ok(self.add(Node::Conj(children), vars, weight, entropy))
    }

    /// Weight of a total assignment over the root's variables.
    pub fn eval_assignment(&self, sigma: &Assignment) -> Result<BigCount> {
        let Some(mut stack) = self.root.map(|r| vec![r]) else {
            return Ok(BigCount::zero());
        };
        let mut product = BigCount::one();
        while let Some(id) = stack.pop() {
            match self.node(id) {
                Node::Terminal(w) => product *= w,
                Node::Conj(ch) => stack.extend(ch.iter().copied()),
                &Node::Decision { var, lo, hi } => {
                    let value = sigma.get(var).ok_or(Error::UnknownVariable(var))?;
                    stack.push(if value { hi } else { lo });
                }
            }
        }
        Ok(product)
    }

    /// Every assignment of the root's variables with its weight, by
    /// enumeration. Refuses more than [`ENUMERATION_LIMIT`] variables.
    pub fn distribution(&self) -> Result<Vec<(Assignment, BigCount)>> {
        let vars: Vec<Var> = self.root.map(|r| self.vars(r).iter().copied().collect()).unwrap_or_default();
        if vars.len() > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                what: "diagram enumeration",
                size: vars.len(),
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut out = Vec::with_capacity(1 << vars.len());
        for bits in 0u32..(1 << vars.len()) {
            let sigma = Assignment::from_lits(
                vars.iter().enumerate().map(|(i, v)| v.lit(bits >> i & 1 == 1)),
            )?;
            let w = self.eval_assignment(&sigma)?;
            out.push((sigma, w));
        }
        Ok(out)
    }

    /// Reachable nodes, children before parents.
    fn reachable(&self) -> Vec<NodeId> {
        let Some(root) = self.root else {
            return Vec::new();
        };
        let mut seen = vec![false; self.entries.len()];
        let mut out = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
                continue;
            }
            if seen[id] {
                continue;
            }
            seen[id] = true;
            stack.push((id, true));
            match self.node(id) {
                Node::Terminal(_) => {}
                Node::Decision { lo, hi, .. } => {
                    stack.push((*hi, false));
                    stack.push((*lo, false));
                }
                Node::Conj(ch) => stack.extend(ch.iter().rev().map(|&c| (c, false))),
            }
        }
        out
    }

    /// Distinct nodes reachable from the root, terminals included.
    pub fn node_count(&self) -> usize {
        self.reachable().len()
    }

    /// Copy of the reachable part with structurally identical nodes merged.
    pub fn reduce(&self) -> AddAndDiagram {
        let mut out = AddAndDiagram::new(self.order.clone());
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        for id in self.reachable() {
            let new = match self.node(id) {
                Node::Terminal(w) => out.terminal(w.clone()),
                Node::Decision { var, lo, hi } => out
                    .decision(*var, map[lo], map[hi])
                    .expect("a valid node stays valid"),
                Node::Conj(ch) => out
                    .conj(ch.iter().map(|c| map[c]).collect())
                    .expect("a valid node stays valid"),
            };
            map.insert(id, new);
        }
        out.root = self.root.map(|r| map[&r]);
        out
    }

    /// True when the diagram has an order and every decision precedes all
    /// variables below it, so every path visits variables in that order.
    pub fn is_ordered(&self) -> bool {
        self.order.is_some()
            && self.reachable().into_iter().all(|id| match *self.node(id) {
                Node::Decision { var, .. } => self
                    .vars(id)
                    .iter()
                    .all(|&w| w == var || self.precedes(var, w)),
                _ => true,
            })
    }

    /// Graphviz rendering: boxes for terminals, dashed `lo` edges, solid `hi`
    /// edges.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("digraph addand {\n");
        let nodes = self.reachable();
        for &id in nodes.iter().rev() {
            let _ = match self.node(id) {
                Node::Terminal(w) => writeln!(s, "  n{id} [shape=box, label=\"{w}\"];"),
                Node::Decision { var, .. } => writeln!(s, "  n{id} [shape=circle, label=\"{var}\"];"),
                Node::Conj(_) => writeln!(s, "  n{id} [shape=circle, label=\"∧\"];"),
            };
        }
        for &id in nodes.iter().rev() {
            match self.node(id) {
                Node::Terminal(_) => {}
                Node::Decision { lo, hi, .. } => {
                    let _ = writeln!(s, "  n{id} -> n{lo} [style=dashed];");
                    let _ = writeln!(s, "  n{id} -> n{hi} [style=solid];");
                }
                Node::Conj(ch) => {
                    for c in ch {
                        let _ = writeln!(s, "  n{id} -> n{c};");
                    }
                }
            }
        }
        s.push_str("}\n");
        s
    }

    /// Line-oriented form, children before parents:
    ///
    /// ```text
    /// addand v1
    /// order 3 4          (or: order none)
    /// root 2             (or: root none)
    /// 0 T 1
    /// 1 D 4 0 0
    /// 2 C 0 1
    /// ```
    pub fn export_text(&self) -> String {
        let mut s = String::from("addand v1\n");
        match &self.order {
            Some(o) => {
                s.push_str("order");
                for v in o {
                    let _ = write!(s, " {v}");
                }
                s.push('\n');
            }
            None => s.push_str("order none\n"),
        }
        let nodes = self.reachable();
        let renumber: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        match self.root {
            Some(r) => {
                let _ = writeln!(s, "root {}", renumber[&r]);
            }
            None => s.push_str("root none\n"),
        }
        for (i, &id) in nodes.iter().enumerate() {
            let _ = match self.node(id) {
                Node::Terminal(w) => writeln!(s, "{i} T {w}"),
                Node::Decision { var, lo, hi } => {
                    writeln!(s, "{i} D {var} {} {}", renumber[lo], renumber[hi])
                }
                Node::Conj(ch) => {
                    let ids: Vec<String> = ch.iter().map(|c| renumber[c].to_string()).collect();
                    writeln!(s, "{i} C {}", ids.join(" "))
                }
            };
        }
        s
    }

    /// Parses [`AddAndDiagram::export_text`] output. Nodes are kept exactly
    /// as listed, without merging.
    pub fn import_text(text: &str) -> Result<AddAndDiagram> {
        let bad = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "addand v1")) => {}
            Some((n, _)) => return Err(bad(n, "expected header `addand v1`")),
            None => return Err(bad(1, "empty diagram text")),
        }
        let num = |n: usize, tok: &str| tok.parse::<u64>().map_err(|_| bad(n, &format!("not a number: {tok}")));
        let var = |n: usize, tok: &str| -> Result<Var> {
            match num(n, tok)? {
                v @ 1..=0xFFFF_FFFF => Ok(Var::new(v as u32)),
                _ => Err(bad(n, "variable index out of range")),
            }
        };

        let order = match lines.next() {
            Some((n, l)) if l.starts_with("order") => {
                let toks: Vec<&str> = l.split_whitespace().skip(1).collect();
                if toks == ["none"] {
                    None
                } else {
                    Some(toks.iter().map(|t| var(n, t)).collect::<Result<Vec<_>>>()?)
                }
            }
            Some((n, _)) => return Err(bad(n, "expected `order` line")),
            None => return Err(bad(2, "missing `order` line")),
        };
        let root = match lines.next() {
            Some((_, "root none")) => None,
            Some((n, l)) if l.starts_with("root ") => Some((n, num(n, &l[5..])? as usize)),
            Some((n, _)) => return Err(bad(n, "expected `root` line")),
            None => return Err(bad(3, "missing `root` line")),
        };

        let mut d = AddAndDiagram::unshared(order);
        for (n, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() < 2 || num(n, toks[0])? as usize != d.len() {
                return Err(bad(n, "node ids must be consecutive from 0"));
            }
            let child = |tok: &str| -> Result<NodeId> {
                let id = num(n, tok)? as usize;
                if id >= d.len() {
                    return Err(bad(n, "child must be listed before its parent"));
                }
                Ok(id)
            };
            match (toks[1], &toks[2..]) {
                ("T", [w]) => {
                    let w = BigCount::parse_bytes(w.as_bytes(), 10).ok_or_else(|| bad(n, "bad weight"))?;
                    d.terminal(w);
                }
                ("D", [v, lo, hi]) => {
                    let (v, lo, hi) = (var(n, v)?, child(lo)?, child(hi)?);
                    d.decision(v, lo, hi)?;
                }
                ("C", ch) if !ch.is_empty() => {
                    let ch = ch.iter().map(|t| child(t)).collect::<Result<Vec<_>>>()?;
                    d.conj(ch)?;
                }
                _ => return Err(bad(n, "malformed node line")),
            }
        }
        if let Some((n, r)) = root {
            d.set_root(r).map_err(|_| bad(n, "root refers to an unknown node"))?;
        }
        Ok(d)
    }

    fn rank_of(&self, v: Var) -> (usize, Var) {
        (self.rank.get(&v).copied().unwrap_or(usize::MAX), v)
    }

    fn sort_by_order(&self, vars: &mut [Var]) {
        vars.sort_by_key(|&v| self.rank_of(v));
    }

    /// Weight-zero diagram deciding every variable of `vars`, both children
    /// alike, down to terminal 0.
    fn zero_chain(&mut self, vars: &BTreeSet<Var>) -> Result<NodeId> {
        let mut vs: Vec<Var> = vars.iter().copied().collect();
        self.sort_by_order(&mut vs);
        let mut cur = self.terminal(BigCount::zero());
        for &v in vs.iter().rev() {
            cur = self.decision(v, cur, cur)?;
        }
        Ok(cur)
    }

    /// Decision on `lit`'s variable whose other side is zero over the same
    /// variables as `rest`.
    fn forced(&mut self, lit: Lit, rest: NodeId) -> Result<NodeId> {
        let below = self.vars(rest).clone();
        let zero = self.zero_chain(&below)?;
        if lit.is_positive() {
            self.decision(lit.var(), zero, rest)
        } else {
            self.decision(lit.var(), rest, zero)
        }
    }
}

/// Materializes the search trace of an entropy run.
///
/// With decomposition, a trace node becomes a decision whose branches are
/// the conjunction of a chain over the forced outputs (ending in the
/// branch's output-free factor) and the component subdiagrams. Without
/// decomposition, forced outputs are placed at their position in the order,
/// giving a plain ordered diagram without conjunctions. Failed branches
/// become all-zero chains over the outputs they would have covered.
pub fn build_from_trace(trace: &Trace) -> Result<AddAndDiagram> {
    let mut d = AddAndDiagram::new(trace.order.clone());
    for (i, node) in trace.nodes.iter().enumerate() {
        for e in [&node.lo, &node.hi] {
            if let Some(&c) = e.children.iter().find(|&&c| c >= i) {
                return Err(Error::InvalidTrace(format!("node {i} refers to later node {c}")));
            }
            if !trace.decomposition && e.children.len() > 1 {
                return Err(Error::InvalidTrace(format!("node {i} splits without decomposition")));
            }
        }
    }
    if let Some(&c) = trace.root.children.iter().find(|&&c| c >= trace.nodes.len()) {
        return Err(Error::InvalidTrace(format!("root refers to unknown node {c}")));
    }
    let root_scope: BTreeSet<Var> = trace.root_yvars.iter().copied().collect();
    let root = if trace.decomposition {
        let mut ids = Vec::with_capacity(trace.nodes.len());
        for node in &trace.nodes {
            let scope: BTreeSet<Var> = node.yvars.iter().copied().filter(|&v| v != node.var).collect();
            let lo = conj_edge(&mut d, &node.lo, &scope, &ids)?;
            let hi = conj_edge(&mut d, &node.hi, &scope, &ids)?;
            ids.push(d.decision(node.var, lo, hi)?);
        }
        conj_edge(&mut d, &trace.root, &root_scope, &ids)?
    } else {
        let mut b = Flat {
            trace,
            memo: HashMap::new(),
        };
        b.edge(&mut d, &trace.root, &BTreeSet::new(), &BigCount::one(), &root_scope)?
    };
    d.set_root(root)?;
    Ok(d)
}

fn conj_edge(d: &mut AddAndDiagram, e: &TraceEdge, scope: &BTreeSet<Var>, ids: &[NodeId]) -> Result<NodeId> {
    if e.count.is_zero() {
        return d.zero_chain(scope);
    }
    let mut forced = e.forced.clone();
    forced.sort_by_key(|l| d.rank_of(l.var()));
    let mut chain = d.terminal(e.factor.clone());
    for &l in forced.iter().rev() {
        chain = d.forced(l, chain)?;
    }
    let mut items: Vec<NodeId> = Vec::with_capacity(e.children.len() + 1);
    let trivial = forced.is_empty() && e.factor.is_one();
    if !trivial || e.children.is_empty() {
        items.push(chain);
    }
    items.extend(e.children.iter().map(|&c| ids[c]));
    if items.len() == 1 {
        Ok(items[0])
    } else {
        d.conj(items)
    }
}

/// Builder for the decomposition-free form.
struct Flat<'t> {
    trace: &'t Trace,
    memo: HashMap<(Vec<Lit>, BigCount, Option<usize>), NodeId>,
}

impl Flat<'_> {
    fn edge(
        &mut self,
        d: &mut AddAndDiagram,
        e: &TraceEdge,
        pending: &BTreeSet<Lit>,
        factor: &BigCount,
        scope: &BTreeSet<Var>,
    ) -> Result<NodeId> {
        if e.count.is_zero() {
            return d.zero_chain(scope);
        }
        let mut pending = pending.clone();
        pending.extend(e.forced.iter().copied());
        self.build(d, &pending, &(factor * &e.factor), e.children.first().copied())
    }

    fn build(
        &mut self,
        d: &mut AddAndDiagram,
        pending: &BTreeSet<Lit>,
        factor: &BigCount,
        next: Option<usize>,
    ) -> Result<NodeId> {
        let key = (pending.iter().copied().collect::<Vec<_>>(), factor.clone(), next);
        if let Some(&id) = self.memo.get(&key) {
            return Ok(id);
        }
        let first_pending = pending.iter().copied().min_by_key(|l| d.rank_of(l.var()));
        let next_node = next.map(|i| &self.trace.nodes[i]);
        let id = match (first_pending, next_node) {
            (None, None) => d.terminal(factor.clone()),
            (Some(l), n) if n.is_none_or(|n| d.rank_of(l.var()) < d.rank_of(n.var)) => {
                let mut rest_pending = pending.clone();
                rest_pending.remove(&l);
                let rest = self.build(d, &rest_pending, factor, next)?;
                d.forced(l, rest)?
            }
            (_, Some(n)) => {
                let scope: BTreeSet<Var> = pending
                    .iter()
                    .map(|l| l.var())
                    .chain(n.yvars.iter().copied())
                    .filter(|&v| v != n.var)
                    .collect();
                let lo = self.edge(d, &n.lo, pending, factor, &scope)?;
                let hi = self.edge(d, &n.hi, pending, factor, &scope)?;
                d.decision(n.var, lo, hi)?
            }
            (Some(_), None) => unreachable!("handled by the pending arm"),
        };
        self.memo.insert(key, id);
        Ok(id)
    }
}

/// Entropy of an explicit weight list, by definition. Zero total gives 0.
pub fn entropy_of_weights<'a>(weights: impl IntoIterator<Item = &'a BigCount>) -> f64 {
    let ws: Vec<&BigCount> = weights.into_iter().filter(|w| !w.is_zero()).collect();
    let total: BigCount = ws.iter().copied().sum();
    if total.is_zero() {
        return 0.0;
    }
    ws.into_iter()
        .map(|w| crate::numeric::plogp(crate::numeric::ratio(w, &total)))
        .sum()
}

/// Per-variable counts of nodes, for inspecting diagram shapes.
pub fn decision_profile(d: &AddAndDiagram) -> BTreeMap<Var, usize> {
    let mut out = BTreeMap::new();
    for id in d.reachable() {
        if let Node::Decision { var, .. } = d.node(id) {
            *out.entry(*var).or_default() += 1;
        }
    }
    out
}
