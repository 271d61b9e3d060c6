//! Literal-equivalence preprocessing.
//!
//! Equivalent literals are found as strongly connected components of the
//! binary implication graph, together with the units found by propagation.
//! Every class is collapsed onto one representative, preferring an input.
//! Eliminated inputs leave `X` (they are determined, so the count does not
//! change). Eliminated or forced outputs keep their place in `Y` through
//! restored defining clauses, which pins the output distribution.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::formula::residual::{propagate, Propagation};
use crate::formula::{CircuitFormula, Clause, Lit, Var};

/// One class of equivalent literals. The complementary class is implied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LitClass {
    /// Positive literal of the representative variable.
    pub representative: Lit,
    /// Every literal of the class, representative included, sorted.
    pub members: Vec<Lit>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivClasses {
    /// Nontrivial classes only (two or more members).
    pub classes: Vec<LitClass>,
    /// Literals fixed by unit propagation.
    pub forced: Vec<Lit>,
    /// Set when propagation fails or a class contains both `l` and `¬l`.
    pub unsat: bool,
}

impl EquivClasses {
    /// Maps each non-representative member variable to the literal it must
    /// be replaced with.
    pub fn substitution(&self) -> HashMap<Var, Lit> {
        let mut map = HashMap::new();
        for class in &self.classes {
            for &m in &class.members {
                if m.var() != class.representative.var() {
                    // m ≡ rep, hence var(m) ≡ rep when m is positive and ¬rep otherwise.
                    let target = if m.is_positive() {
                        class.representative
                    } else {
                        !class.representative
                    };
                    map.insert(m.var(), target);
                }
            }
        }
        map
    }
}

/// Iterative Tarjan over literal codes.
fn strongly_connected(n_codes: usize, succ: &[Vec<u32>]) -> Vec<Vec<u32>> {
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n_codes];
    let mut low = vec![0u32; n_codes];
    let mut on_stack = vec![false; n_codes];
    let mut stack: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    let mut next = 0u32;

    for root in 0..n_codes as u32 {
        if index[root as usize] != UNSEEN || succ[root as usize].is_empty() {
            continue;
        }
        let mut call: Vec<(u32, usize)> = vec![(root, 0)];
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if let Some(&w) = succ[v as usize].get(*edge) {
                *edge += 1;
                if index[w as usize] == UNSEEN {
                    index[w as usize] = next;
                    low[w as usize] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut scc = Vec::new();
                loop {
                    let w = stack.pop().expect("scc member");
                    on_stack[w as usize] = false;
                    scc.push(w);
                    if w == v {
                        break;
                    }
                }
                out.push(scc);
            }
        }
    }
    out
}

fn lit_of_code(code: u32) -> Lit {
    let var = Var::new(code >> 1);
    var.lit(code & 1 == 0)
}

fn classes_of(clauses: &[Clause], prefer: impl Fn(Var) -> bool) -> (Vec<LitClass>, bool) {
    let max_var = clauses
        .iter()
        .flat_map(|c| c.vars())
        .map(|v| v.index())
        .max()
        .unwrap_or(0);
    let n_codes = 2 * (max_var as usize + 1);
    let mut succ: Vec<Vec<u32>> = vec![Vec::new(); n_codes];
    for c in clauses.iter().filter(|c| c.len() == 2) {
        let (a, b) = (c[0], c[1]);
        succ[(!a).code() as usize].push(b.code());
        succ[(!b).code() as usize].push(a.code());
    }

    let mut classes = Vec::new();
    for scc in strongly_connected(n_codes, &succ) {
        if scc.len() < 2 {
            continue;
        }
        let mut members: Vec<Lit> = scc.into_iter().map(lit_of_code).collect();
        members.sort_unstable();
        if members.windows(2).any(|w| w[0].var() == w[1].var()) {
            return (Vec::new(), true);
        }
        let rep_var = members
            .iter()
            .map(|l| l.var())
            .min_by_key(|&v| (!prefer(v), v))
            .expect("nonempty class");
        let rep_lit = *members.iter().find(|l| l.var() == rep_var).expect("member");
        // Keep the class where the representative appears positively; its
        // complement carries no extra information.
        if rep_lit.is_positive() {
            classes.push(LitClass {
                representative: rep_lit,
                members,
            });
        }
    }
    classes.sort_by_key(|c| c.representative);
    (classes, false)
}

pub fn detect_equivalences(f: &CircuitFormula) -> EquivClasses {
    match propagate(f.clauses(), &[]) {
        Propagation::Conflict { assigned, .. } => EquivClasses {
            classes: Vec::new(),
            forced: assigned,
            unsat: true,
        },
        Propagation::Residual { clauses, assigned } => {
            let (classes, unsat) = classes_of(&clauses, |v| f.is_input(v));
            EquivClasses {
                classes,
                forced: assigned,
                unsat,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct PreStats {
    /// Variables replaced by a class representative.
    pub merged_vars: usize,
    /// Variables fixed by unit propagation.
    pub forced_units: usize,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreResult {
    pub formula: CircuitFormula,
    /// Defining clauses re-added for eliminated or forced outputs.
    pub restored: Vec<Clause>,
    pub stats: PreStats,
}

fn substitute(l: Lit, map: &HashMap<Var, Lit>) -> Lit {
    match map.get(&l.var()) {
        Some(&t) if l.is_positive() => t,
        Some(&t) => !t,
        None => l,
    }
}

/// Collapses equivalent literals to a fixpoint, then restores the outputs.
/// Model count and entropy are preserved exactly.
pub fn apply_pre(f: &CircuitFormula) -> PreResult {
    let mut stats = PreStats::default();
    let mut core: Vec<Clause> = f.clauses().to_vec();
    let mut removed_inputs: BTreeSet<Var> = BTreeSet::new();
    // Eliminated output -> literal it equals.
    let mut defs: BTreeMap<Var, Lit> = BTreeMap::new();
    // Output -> forced value.
    let mut fixed: BTreeMap<Var, bool> = BTreeMap::new();

    loop {
        stats.rounds += 1;
        let (residual, forced) = match propagate(&core, &[]) {
            Propagation::Conflict { .. } => {
                return PreResult {
                    formula: f.unsat_like(),
                    restored: Vec::new(),
                    stats,
                };
            }
            Propagation::Residual { clauses, assigned } => (clauses, assigned),
        };
        stats.forced_units += forced.len();
        let forced_val: HashMap<Var, bool> = forced.iter().map(|l| (l.var(), l.value())).collect();
        for l in &forced {
            if f.is_output(l.var()) {
                fixed.insert(l.var(), l.value());
            } else {
                removed_inputs.insert(l.var());
            }
        }
        // Definitions over a now-forced literal become fixed values.
        defs.retain(|&y, lit| match forced_val.get(&lit.var()) {
            Some(&b) => {
                fixed.insert(y, if lit.is_positive() { b } else { !b });
                false
            }
            None => true,
        });

        let (classes, unsat) = classes_of(&residual, |v| f.is_input(v));
        if unsat {
            return PreResult {
                formula: f.unsat_like(),
                restored: Vec::new(),
                stats,
            };
        }
        let eq = EquivClasses {
            classes,
            forced: Vec::new(),
            unsat: false,
        };
        let map = eq.substitution();
        if forced.is_empty() && map.is_empty() {
            core = residual;
            break;
        }
        stats.merged_vars += map.len();
        for (&v, &target) in &map {
            if f.is_output(v) {
                defs.insert(v, target);
            } else {
                removed_inputs.insert(v);
            }
        }
        for lit in defs.values_mut() {
            *lit = substitute(*lit, &map);
        }

        let mut next: Vec<Clause> = residual
            .iter()
            .filter_map(|c| Clause::new(c.iter().map(|&l| substitute(l, &map)).collect()))
            .collect();
        next.sort();
        next.dedup();
        core = next;
    }

    let mut restored = Vec::new();
    for (&y, &r) in &defs {
        restored.push(Clause::new(vec![!r, y.pos()]).expect("distinct vars"));
        restored.push(Clause::new(vec![r, y.neg()]).expect("distinct vars"));
    }
    for (&y, &b) in &fixed {
        restored.push(Clause::new(vec![y.lit(b)]).expect("unit"));
    }

    let mut clauses = core;
    clauses.extend(restored.iter().cloned());
    clauses.sort();
    clauses.dedup();
    let inputs = f
        .inputs()
        .iter()
        .copied()
        .filter(|v| !removed_inputs.contains(v))
        .collect();
    let formula = CircuitFormula::new(f.nvars(), clauses, inputs, f.outputs().clone())
        .expect("preprocessing keeps the formula well formed");
    PreResult {
        formula,
        restored,
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_dimacs;

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v)
    }

    fn formula(text: &str) -> CircuitFormula {
        parse_dimacs(text.as_bytes()).unwrap()
    }

    #[test]
    fn binary_equivalence() {
        let f = formula("p cnf 3 3\nc p input 1 2 3 0\nc p output 0\n-1 2 0\n1 -2 0\n1 2 3 0\n");
        let eq = detect_equivalences(&f);
        assert!(!eq.unsat);
        assert_eq!(eq.classes.len(), 1);
        assert_eq!(eq.classes[0].representative, lit(1));
        assert_eq!(eq.classes[0].members, vec![lit(1), lit(2)]);
        assert_eq!(eq.substitution()[&Var::new(2)], lit(1));
    }

    #[test]
    fn unit_chain() {
        let f = formula("p cnf 2 2\nc p input 1 2 0\nc p output 0\n1 0\n-1 2 0\n");
        let eq = detect_equivalences(&f);
        assert_eq!(eq.forced, vec![lit(1), lit(2)]);
        assert!(eq.classes.is_empty());
        assert!(!eq.unsat);
    }

    #[test]
    fn contradictory_binary_clauses() {
        let f = formula("p cnf 2 4\nc p input 1 2 0\nc p output 0\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n");
        assert!(detect_equivalences(&f).unsat);
        let r = apply_pre(&f);
        assert!(r.formula.is_trivially_unsat());
    }

    #[test]
    fn pure_input_merge() {
        let f = formula("p cnf 4 4\nc p input 1 2 3 0\nc p output 4 0\n-1 2 0\n1 -2 0\n2 3 -4 0\n-3 4 0\n");
        let r = apply_pre(&f);
        assert!(r.restored.is_empty());
        assert!(!r.formula.occurring_vars().contains(&Var::new(2)));
        assert!(!r.formula.inputs().contains(&Var::new(2)));
        assert_eq!(r.formula.outputs(), f.outputs());
        assert_eq!(r.stats.merged_vars, 1);
    }

    #[test]
    fn output_restoration() {
        let f = formula("p cnf 2 2\nc p input 1 0\nc p output 2 0\n-1 2 0\n1 -2 0\n");
        let r = apply_pre(&f);
        assert_eq!(
            r.restored,
            vec![
                Clause::new(vec![lit(-1), lit(2)]).unwrap(),
                Clause::new(vec![lit(1), lit(-2)]).unwrap()
            ]
        );
        assert_eq!(r.formula.sorted_clauses(), f.sorted_clauses());
    }

    #[test]
    fn negated_equivalence_to_output() {
        // y3 ≡ ¬x1, and y3 feeds a ternary clause.
        let f = formula("p cnf 3 3\nc p input 1 2 0\nc p output 3 0\n1 3 0\n-1 -3 0\n2 3 -1 0\n");
        let r = apply_pre(&f);
        assert!(r.restored.contains(&Clause::new(vec![lit(1), lit(3)]).unwrap()));
        assert!(r.restored.contains(&Clause::new(vec![lit(-1), lit(-3)]).unwrap()));
        assert_eq!(apply_pre(&r.formula).formula.sorted_clauses(), r.formula.sorted_clauses());
    }

    #[test]
    fn forced_outputs_stay() {
        let f = formula("p cnf 3 2\nc p input 1 2 0\nc p output 3 0\n1 0\n-1 3 0\n");
        let r = apply_pre(&f);
        assert_eq!(r.formula.outputs(), f.outputs());
        assert!(r.formula.clauses().contains(&Clause::new(vec![lit(3)]).unwrap()));
        assert!(!r.formula.inputs().contains(&Var::new(1)));
        assert!(r.formula.inputs().contains(&Var::new(2)));
    }
}
