//! Unit propagation over plain clause lists, shared by conditioning, the
//! counter and the entropy search.

use super::{Clause, Lit, Var};

#[derive(Debug)]
pub(crate) enum Propagation {
    /// Propagation reached a fixpoint. `clauses` has no satisfied clause, no
    /// false literal and no unit clause.
    Residual {
        clauses: Vec<Clause>,
        assigned: Vec<Lit>,
    },
    /// Some clause was falsified, or the assumptions contradict each other
    /// (`clause` is `None` in that case).
    Conflict {
        assigned: Vec<Lit>,
        clause: Option<usize>,
    },
}

const UNSET: u8 = 0;
const TRUE: u8 = 1;
const FALSE: u8 = 2;

fn lit_state(values: &[u8], l: Lit) -> u8 {
    match values[l.var().index() as usize] {
        UNSET => UNSET,
        v if (v == TRUE) == l.value() => TRUE,
        _ => FALSE,
    }
}

/// Asserts `assumptions` on `clauses` and propagates units to fixpoint.
/// Unit clauses already present in `clauses` are propagated as well.
pub(crate) fn propagate(clauses: &[Clause], assumptions: &[Lit]) -> Propagation {
    let max_var = clauses
        .iter()
        .flat_map(|c| c.iter())
        .chain(assumptions.iter())
        .map(|l| l.var().index())
        .max()
        .unwrap_or(0);
    let mut values = vec![UNSET; max_var as usize + 1];
    let mut assigned = Vec::with_capacity(assumptions.len());

    for &l in assumptions {
        match lit_state(&values, l) {
            TRUE => {}
            FALSE => {
                return Propagation::Conflict {
                    assigned,
                    clause: None,
                }
            }
            _ => {
                values[l.var().index() as usize] = if l.value() { TRUE } else { FALSE };
                assigned.push(l);
            }
        }
    }

    let mut satisfied = vec![false; clauses.len()];
    loop {
        let mut changed = false;
        for (i, c) in clauses.iter().enumerate() {
            if satisfied[i] {
                continue;
            }
            let mut open = None;
            let mut n_open = 0usize;
            for &l in c.iter() {
                match lit_state(&values, l) {
                    TRUE => {
                        satisfied[i] = true;
                        break;
                    }
                    UNSET => {
                        n_open += 1;
                        open = Some(l);
                    }
                    _ => {}
                }
            }
            if satisfied[i] {
                continue;
            }
            match n_open {
                0 => {
                    return Propagation::Conflict {
                        assigned,
                        clause: Some(i),
                    }
                }
                1 => {
                    let l = open.expect("one open literal");
                    values[l.var().index() as usize] = if l.value() { TRUE } else { FALSE };
                    assigned.push(l);
                    satisfied[i] = true;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    let residual = clauses
        .iter()
        .zip(&satisfied)
        .filter(|(_, &sat)| !sat)
        .map(|(c, _)| {
            if c.iter().all(|&l| lit_state(&values, l) == UNSET) {
                c.clone()
            } else {
                Clause::from_sorted(
                    c.iter()
                        .copied()
                        .filter(|&l| lit_state(&values, l) == UNSET)
                        .collect(),
                )
            }
        })
        .collect();
    Propagation::Residual {
        clauses: residual,
        assigned,
    }
}

/// Sorted, deduplicated variables occurring in `clauses`.
pub(crate) fn vars_of(clauses: &[Clause]) -> Vec<Var> {
    let mut vs: Vec<Var> = clauses.iter().flat_map(|c| c.vars()).collect();
    vs.sort_unstable();
    vs.dedup();
    vs
}
