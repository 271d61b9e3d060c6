//! Checking the circuit property: no two solutions agree on `X` and differ
//! on `Y`.

use std::collections::BTreeMap;

use super::{CircuitFormula, Clause, Lit, Var};
use crate::counter::{count_clauses, SharedCache};
use crate::error::{Error, Result};

/// Largest `|X| + |Y|` accepted by [`ValidationMode::Brute`].
pub const BRUTE_FORCE_LIMIT: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    /// Enumerate every assignment of `X ∪ Y`.
    Brute,
    /// Count models of `φ(X,Y) ∧ φ(X,Y') ∧ Y ≠ Y'` with the exact counter.
    SelfComposition,
}

pub fn validate_circuit(f: &CircuitFormula, mode: ValidationMode) -> Result<bool> {
    match mode {
        ValidationMode::Brute => brute(f),
        ValidationMode::SelfComposition => Ok(self_composition(f)),
    }
}

fn brute(f: &CircuitFormula) -> Result<bool> {
    let n = f.inputs().len() + f.outputs().len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force validation",
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let nx = f.inputs().len();
    let ny = f.outputs().len();
    let bit: BTreeMap<Var, usize> = f
        .inputs()
        .iter()
        .chain(f.outputs().iter())
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u32, 0u32), |(pos, neg), l| {
                let b = 1u32 << bit[&l.var()];
                if l.is_positive() {
                    (pos | b, neg)
                } else {
                    (pos, neg | b)
                }
            })
        })
        .collect();
    let sat = |a: u32| masks.iter().all(|&(p, q)| a & p != 0 || !a & q != 0);

    for x in 0u32..(1 << nx) {
        let mut found = 0;
        for y in 0u32..(1 << ny) {
            if sat(x | (y << nx)) {
                found += 1;
                if found > 1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn self_composition(f: &CircuitFormula) -> bool {
    let mut next = f.nvars();
    let mut fresh = || {
        next += 1;
        Var::new(next)
    };
    let primed: BTreeMap<Var, Var> = f.outputs().iter().map(|&y| (y, fresh())).collect();
    let rename = |l: Lit| match primed.get(&l.var()) {
        Some(&v) => v.lit(l.is_positive()),
        None => l,
    };

    let mut clauses: Vec<Clause> = f.clauses().to_vec();
    clauses.extend(
        f.clauses()
            .iter()
            .map(|c| Clause::new(c.iter().map(|&l| rename(l)).collect()).expect("renaming keeps clauses")),
    );
    // d_y → (y ≠ y'), and at least one d_y holds.
    let mut some_diff = Vec::new();
    for (&y, &y2) in &primed {
        let d = fresh();
        clauses.push(Clause::new(vec![d.neg(), y.pos(), y2.pos()]).expect("distinct vars"));
        clauses.push(Clause::new(vec![d.neg(), y.neg(), y2.neg()]).expect("distinct vars"));
        some_diff.push(d.pos());
    }
    // With no outputs the disjunction is empty and nothing can differ.
    clauses.push(Clause::new(some_diff).expect("distinct vars"));

    let mut cache = SharedCache::new();
    count_clauses(&clauses, &mut cache, true) == 0u32.into()
}
