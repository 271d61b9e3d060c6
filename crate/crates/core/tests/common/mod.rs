//! Formula builders and oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use pse_core::addand::{AddAndDiagram, NodeId};
use pse_core::formula::{random_circuit, RandomCircuitSpec};
use pse_core::{BigCount, CircuitFormula, Clause, Lit, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn clause(ls: &[i64]) -> Clause {
    Clause::new(ls.iter().map(|&v| Lit::from_dimacs(v)).collect()).expect("not a tautology")
}

pub fn vars(range: std::ops::RangeInclusive<u32>) -> BTreeSet<Var> {
    range.map(Var::new).collect()
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    let t = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    t(p) + t(1.0 - p)
}

/// The separable family: inputs `1..=2n`, outputs `2n+1..=4n`. Block `i`
/// sets both `y_i` and `y_{n+i}` to `x_i ∧ x_{n+i}`.
pub fn separable(n: u32) -> CircuitFormula {
    let x = |i: u32| i64::from(i);
    let y = |i: u32| i64::from(2 * n + i);
    let mut clauses = Vec::new();
    for i in 1..=n {
        let (a, b) = (x(i), x(n + i));
        for c in [y(i), y(n + i)] {
            clauses.push(clause(&[-a, -b, c]));
            clauses.push(clause(&[a, -c]));
            clauses.push(clause(&[b, -c]));
        }
    }
    CircuitFormula::new(4 * n, clauses, vars(1..=2 * n), vars(2 * n + 1..=4 * n)).unwrap()
}

/// Outputs of [`separable`] in their natural order `y_1 … y_2n`.
pub fn separable_order(n: u32) -> Vec<Var> {
    (2 * n + 1..=4 * n).map(Var::new).collect()
}

/// The ten-variable worked example: inputs 1..=5 are `x1..x5`, outputs
/// 6..=10 are `y1..y5`.
pub fn worked_example() -> CircuitFormula {
    let (x1, x2, x3, x4, x5) = (1, 2, 3, 4, 5);
    let (y1, y2, y3, y4, y5) = (6, 7, 8, 9, 10);
    let clauses = vec![
        clause(&[x2, x3, y3]),
        clause(&[-y3, -y4]),
        clause(&[x2, y3]),
        clause(&[-x2, y4]),
        clause(&[-x1, -y1]),
        clause(&[x1, y1]),
        clause(&[-x4, x5, y2]),
        clause(&[x4, -x5, y2]),
        clause(&[-x4, -x5, -y2]),
        clause(&[x4, x5, y2]),
        clause(&[-y1, -y5]),
        clause(&[y1, y5]),
        clause(&[y1, x4, x5]),
        clause(&[y1, y3, y4]),
    ];
    CircuitFormula::new(10, clauses, vars(1..=5), vars(6..=10)).unwrap()
}

pub fn worked_example_order() -> Vec<Var> {
    (6..=10).map(Var::new).collect()
}

/// Entropy of the worked example from its closed form: the root splits
/// 12/16 on `y1`, and the two sides are the sums of their independent parts.
pub fn worked_example_entropy() -> f64 {
    let lo = h2(1.0 / 3.0) + 1.0;
    let hi = 1.0 + h2(0.25);
    3.0 / 7.0 * lo + 4.0 / 7.0 * hi + h2(3.0 / 7.0)
}

/// Corpus formula `seed` for the property tests: 3..=14 inputs, 1..=10
/// outputs, gate fan-in up to 3.
pub fn corpus(seed: u64) -> CircuitFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n_inputs = rng.gen_range(3..=14);
    let n_outputs = rng.gen_range(1..=10);
    random_circuit(&RandomCircuitSpec::new(seed, n_inputs, n_outputs))
}

/// Adds fresh variables equivalent to existing literals: an input copy, an
/// output copy, and a negated copy of an input. Count and entropy are
/// unchanged, since every new variable is a function of an old one.
pub fn with_equivalences(f: &CircuitFormula, seed: u64) -> CircuitFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Var> = f.inputs().iter().copied().collect();
    let ys: Vec<Var> = f.outputs().iter().copied().collect();
    let mut clauses = f.clauses().to_vec();
    let mut inputs = f.inputs().clone();
    let mut outputs = f.outputs().clone();
    let mut next = f.nvars();
    let mut equate = |clauses: &mut Vec<Clause>, a: Lit| {
        next += 1;
        let b = Var::new(next).pos();
        clauses.push(Clause::new(vec![!a, b]).unwrap());
        clauses.push(Clause::new(vec![a, !b]).unwrap());
        b.var()
    };
    let x = xs[rng.gen_range(0..xs.len())];
    inputs.insert(equate(&mut clauses, x.pos()));
    let x = xs[rng.gen_range(0..xs.len())];
    inputs.insert(equate(&mut clauses, x.neg()));
    let y = ys[rng.gen_range(0..ys.len())];
    outputs.insert(equate(&mut clauses, y.lit(rng.gen_bool(0.5))));
    // An output tied to an input literal.
    let x = xs[rng.gen_range(0..xs.len())];
    outputs.insert(equate(&mut clauses, x.lit(rng.gen_bool(0.5))));
    let n = clauses.len();
    clauses.swap(0, rng.gen_range(0..n));
    CircuitFormula::new(next, clauses, inputs, outputs).unwrap()
}

/// Random diagram over variables `1..=n_vars` in natural order. Decision
/// children are drawn independently, so gaps are common.
pub fn random_diagram(seed: u64, n_vars: u32) -> AddAndDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = AddAndDiagram::new(Some((1..=n_vars).map(Var::new).collect()));
    let root = grow(&mut d, &mut rng, 1, n_vars);
    d.set_root(root).unwrap();
    d
}

fn grow(d: &mut AddAndDiagram, rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> NodeId {
    if lo > hi || rng.gen_bool(0.15) {
        return d.terminal(BigCount::from(rng.gen_range(0u32..6)));
    }
    if hi - lo >= 2 && rng.gen_bool(0.25) {
        let mid = rng.gen_range(lo..hi);
        let a = grow(d, rng, lo, mid);
        let b = grow(d, rng, mid + 1, hi);
        return d.conj(vec![a, b]).unwrap();
    }
    // Skip a few variables to create gaps.
    let var = rng.gen_range(lo..=hi.min(lo + 2));
    let l = grow(d, rng, var + 1, hi);
    let h = grow(d, rng, var + 1, hi);
    d.decision(Var::new(var), l, h).unwrap()
}
