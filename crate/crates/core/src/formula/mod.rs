//! CNF circuit formulas: variables, literals, clauses, assignments and the
//! operations that build and condition them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod dimacs;
mod generate;
pub(crate) mod residual;
mod validate;

pub use dimacs::{parse_dimacs, serialize_dimacs};
pub use generate::{random_circuit, GateKind, RandomCircuitSpec};
pub use validate::{validate_circuit, ValidationMode, BRUTE_FORCE_LIMIT};

/// A propositional variable, 1-based as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(u32);

impl Var {
    /// # Panics
    ///
    /// If `index` is zero.
    pub fn new(index: u32) -> Var {
        assert!(index > 0, "variables are 1-based");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal, packed as `2 * var + negated`. Ordering by code places the
/// positive literal of a variable directly before its negation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i64", try_from = "i64")]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit((var.0 << 1) | u32::from(!positive))
    }

    /// Builds a literal from its signed DIMACS form.
    ///
    /// # Panics
    ///
    /// If `value` is zero.
    pub fn from_dimacs(value: i64) -> Lit {
        assert!(value != 0, "0 is not a literal");
        Lit::new(Var::new(value.unsigned_abs() as u32), value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0);
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// The value the variable takes when this literal is true.
    pub fn value(self) -> bool {
        self.is_positive()
    }

    pub fn code(self) -> u32 {
        self.0
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl From<Lit> for i64 {
    fn from(l: Lit) -> i64 {
        l.to_dimacs()
    }
}

impl TryFrom<i64> for Lit {
    type Error = String;

    fn try_from(value: i64) -> std::result::Result<Lit, String> {
        if value == 0 || value.unsigned_abs() > u64::from(u32::MAX >> 1) {
            return Err(format!("invalid literal {value}"));
        }
        Ok(Lit::from_dimacs(value))
    }
}

/// A disjunction of literals, kept sorted by literal code with no duplicates
/// and no complementary pair.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Normalizes `lits` into a clause. Returns `None` for a tautology.
    pub fn new(mut lits: Vec<Lit>) -> Option<Clause> {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause { lits })
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    /// Wraps literals that are already sorted, deduplicated and free of
    /// complementary pairs.
    pub(crate) fn from_sorted(lits: Vec<Lit>) -> Clause {
        debug_assert!(lits.windows(2).all(|w| w[0].var() < w[1].var()));
        Clause { lits }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var())
    }
}

impl std::ops::Deref for Clause {
    type Target = [Lit];

    fn deref(&self) -> &[Lit] {
        &self.lits
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.lits.iter()).finish()
    }
}

/// A CNF `φ(X, Y)` with disjoint input set `X` and output set `Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitFormula {
    nvars: u32,
    clauses: Vec<Clause>,
    inputs: BTreeSet<Var>,
    outputs: BTreeSet<Var>,
}

impl CircuitFormula {
    /// Checks the structural invariants: `X ∩ Y = ∅`, every clause variable
    /// lies in `X ∪ Y`, and every variable is at most `nvars`.
    pub fn new(
        nvars: u32,
        clauses: Vec<Clause>,
        inputs: BTreeSet<Var>,
        outputs: BTreeSet<Var>,
    ) -> Result<CircuitFormula> {
        let check_range = |v: Var| {
            if v.0 > nvars {
                Err(Error::VarOutOfRange {
                    var: i64::from(v.0),
                    nvars,
                })
            } else {
                Ok(())
            }
        };
        for &v in inputs.iter().chain(outputs.iter()) {
            check_range(v)?;
        }
        if let Some(&v) = inputs.intersection(&outputs).next() {
            return Err(Error::OverlappingIo(v));
        }
        for c in &clauses {
            for v in c.vars() {
                check_range(v)?;
                if !inputs.contains(&v) && !outputs.contains(&v) {
                    return Err(Error::UndeclaredVar(v));
                }
            }
        }
        Ok(CircuitFormula {
            nvars,
            clauses,
            inputs,
            outputs,
        })
    }

    pub fn nvars(&self) -> u32 {
        self.nvars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn inputs(&self) -> &BTreeSet<Var> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeSet<Var> {
        &self.outputs
    }

    pub fn is_input(&self, v: Var) -> bool {
        self.inputs.contains(&v)
    }

    pub fn is_output(&self, v: Var) -> bool {
        self.outputs.contains(&v)
    }

    /// `X ∪ Y`, the variables solutions range over.
    pub fn scope(&self) -> BTreeSet<Var> {
        self.inputs.union(&self.outputs).copied().collect()
    }

    /// True for the canonical unsatisfiable form, a single empty clause.
    pub fn is_trivially_unsat(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// Variables occurring in at least one clause.
    pub fn occurring_vars(&self) -> BTreeSet<Var> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    /// Per-variable output flag, indexed by variable index.
    pub(crate) fn output_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nvars as usize + 1];
        for v in &self.outputs {
            mask[v.0 as usize] = true;
        }
        mask
    }

    fn check_lits(&self, lits: &[Lit]) -> Result<()> {
        for l in lits {
            let v = l.var();
            if v.0 > self.nvars || (!self.is_input(v) && !self.is_output(v)) {
                return Err(Error::UnknownVariable(v));
            }
        }
        let mut seen: BTreeMap<Var, bool> = BTreeMap::new();
        for l in lits {
            if let Some(&b) = seen.get(&l.var()) {
                if b != l.value() {
                    return Err(Error::ContradictoryLiterals(l.var()));
                }
            }
            seen.insert(l.var(), l.value());
        }
        Ok(())
    }

    /// Asserts `lits` and runs unit propagation to fixpoint.
    ///
    /// Returns the residual formula (same `X`, `Y` and `nvars`) and every
    /// literal fixed along the way, decisions included. On conflict the
    /// residual is the canonical unsatisfiable formula and the assignment
    /// holds what was derived before the conflict.
    pub fn condition(&self, lits: &[Lit]) -> Result<(CircuitFormula, Assignment)> {
        self.check_lits(lits)?;
        let (clauses, assigned) = match residual::propagate(&self.clauses, lits) {
            residual::Propagation::Residual { clauses, assigned } => (clauses, assigned),
            residual::Propagation::Conflict { assigned, .. } => (vec![Clause::empty()], assigned),
        };
        let mut assignment = Assignment::new();
        for l in assigned {
            assignment.bind(l.var(), l.value())?;
        }
        let residual = CircuitFormula {
            nvars: self.nvars,
            clauses,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        };
        Ok((residual, assignment))
    }

    /// The canonical unsatisfiable formula with the same variable sets.
    pub(crate) fn unsat_like(&self) -> CircuitFormula {
        CircuitFormula {
            nvars: self.nvars,
            clauses: vec![Clause::empty()],
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        }
    }

    /// Clauses sorted into a canonical order, for comparisons that ignore
    /// clause order.
    pub fn sorted_clauses(&self) -> Vec<Clause> {
        let mut cs = self.clauses.clone();
        cs.sort();
        cs
    }
}

/// A partial map from variables to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    bindings: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Result<Assignment> {
        let mut a = Assignment::new();
        for l in lits {
            a.bind(l.var(), l.value())?;
        }
        Ok(a)
    }

    /// Binds `var`. Rebinding to the same value is a no-op; rebinding to the
    /// other value is an error.
    pub fn bind(&mut self, var: Var, value: bool) -> Result<()> {
        match self.bindings.insert(var, value) {
            Some(old) if old != value => {
                self.bindings.insert(var, old);
                Err(Error::ContradictoryLiterals(var))
            }
            _ => Ok(()),
        }
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.bindings.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// `σ↓V'`.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Assignment {
        Assignment {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(&v, &b)| (v, b))
                .collect(),
        }
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.bindings.iter().map(|(&v, &b)| Lit::new(v, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.bindings.iter().map(|(&v, &b)| (v, b))
    }

    /// True iff every clause has a literal made true by this assignment.
    pub fn satisfies(&self, clauses: &[Clause]) -> bool {
        clauses
            .iter()
            .all(|c| c.iter().any(|l| self.get(l.var()) == Some(l.value())))
    }
}
