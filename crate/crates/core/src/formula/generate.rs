//! Seeded random circuit formulas: every output is Tseitin-defined as a gate
//! over input literals, so the circuit property holds by construction.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CircuitFormula, Clause, Lit, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomCircuitSpec {
    pub seed: u64,
    pub n_inputs: u32,
    pub n_outputs: u32,
    /// Upper bound on the fan-in of AND, OR and XOR gates (at least 2).
    pub max_arity: u32,
}

impl RandomCircuitSpec {
    pub fn new(seed: u64, n_inputs: u32, n_outputs: u32) -> RandomCircuitSpec {
        RandomCircuitSpec {
            seed,
            n_inputs,
            n_outputs,
            max_arity: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
    Xor,
    Not,
    Maj3,
}

const GATES: [GateKind; 5] = [
    GateKind::And,
    GateKind::Or,
    GateKind::Xor,
    GateKind::Not,
    GateKind::Maj3,
];

/// Clauses for `out ↔ gate(ins)`.
fn encode_gate(kind: GateKind, out: Lit, ins: &[Lit], clauses: &mut Vec<Clause>) {
    let mut push = |lits: Vec<Lit>| {
        if let Some(c) = Clause::new(lits) {
            clauses.push(c);
        }
    };
    match kind {
        GateKind::And => {
            for &l in ins {
                push(vec![!out, l]);
            }
            push(std::iter::once(out).chain(ins.iter().map(|&l| !l)).collect());
        }
        GateKind::Or => {
            for &l in ins {
                push(vec![out, !l]);
            }
            push(std::iter::once(!out).chain(ins.iter().copied()).collect());
        }
        GateKind::Not => {
            push(vec![out, ins[0]]);
            push(vec![!out, !ins[0]]);
        }
        GateKind::Maj3 => {
            let (a, b, c) = (ins[0], ins[1], ins[2]);
            for (p, q) in [(a, b), (a, c), (b, c)] {
                push(vec![!p, !q, out]);
                push(vec![p, q, !out]);
            }
        }
        GateKind::Xor => {
            // Forbid every assignment of (ins, out) whose parity is wrong.
            let k = ins.len();
            for mask in 0u32..(1 << k) {
                let ones = mask.count_ones() as usize;
                for out_true in [false, true] {
                    if (ones % 2 == 1) == out_true {
                        continue;
                    }
                    let mut lits: Vec<Lit> = ins
                        .iter()
                        .enumerate()
                        .map(|(i, &l)| if mask >> i & 1 == 1 { !l } else { l })
                        .collect();
                    lits.push(if out_true { !out } else { out });
                    push(lits);
                }
            }
        }
    }
}

/// Builds a circuit formula with inputs `1..=n_inputs` and outputs after
/// them. Deterministic in `spec.seed`.
///
/// # Panics
///
/// If `n_inputs` or `n_outputs` is zero.
pub fn random_circuit(spec: &RandomCircuitSpec) -> CircuitFormula {
    assert!(spec.n_inputs >= 1 && spec.n_outputs >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let max_arity = spec.max_arity.max(2).min(spec.n_inputs) as usize;
    let inputs: Vec<Var> = (1..=spec.n_inputs).map(Var::new).collect();
    let outputs: Vec<Var> = (1..=spec.n_outputs)
        .map(|j| Var::new(spec.n_inputs + j))
        .collect();

    let mut clauses = Vec::new();
    for &y in &outputs {
        let mut kind = *GATES.choose(&mut rng).expect("nonempty");
        if kind == GateKind::Maj3 && inputs.len() < 3 {
            kind = GateKind::And;
        }
        let arity = match kind {
            GateKind::Not => 1,
            GateKind::Maj3 => 3,
            _ if max_arity < 2 => 1,
            _ => rng.gen_range(2..=max_arity),
        };
        let ins: Vec<Lit> = inputs
            .choose_multiple(&mut rng, arity)
            .map(|&v| v.lit(rng.gen_bool(0.5)))
            .collect();
        // A single-input AND/OR/XOR degenerates to a buffer, which is fine.
        encode_gate(kind, y.pos(), &ins, &mut clauses);
    }

    CircuitFormula::new(
        spec.n_inputs + spec.n_outputs,
        clauses,
        inputs.into_iter().collect::<BTreeSet<_>>(),
        outputs.into_iter().collect::<BTreeSet<_>>(),
    )
    .expect("generated formula is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Assignment;

    /// Each gate encoding must have exactly one output value per input
    /// assignment, matching the gate's truth table.
    #[test]
    fn gate_truth_tables() {
        let ins: Vec<Lit> = (1..=3).map(|v| Var::new(v).pos()).collect();
        let out = Var::new(4).pos();
        let table = |kind: GateKind, k: usize, bits: u32| -> bool {
            let b: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
            match kind {
                GateKind::And => b.iter().all(|&x| x),
                GateKind::Or => b.iter().any(|&x| x),
                GateKind::Xor => b.iter().filter(|&&x| x).count() % 2 == 1,
                GateKind::Not => !b[0],
                GateKind::Maj3 => b.iter().filter(|&&x| x).count() >= 2,
            }
        };
        for kind in GATES {
            let k = match kind {
                GateKind::Not => 1,
                _ => 3,
            };
            let mut clauses = Vec::new();
            encode_gate(kind, out, &ins[..k], &mut clauses);
            for bits in 0u32..(1 << k) {
                for y in [false, true] {
                    let mut a = Assignment::new();
                    for (i, l) in ins[..k].iter().enumerate() {
                        a.bind(l.var(), bits >> i & 1 == 1).unwrap();
                    }
                    a.bind(out.var(), y).unwrap();
                    assert_eq!(a.satisfies(&clauses), y == table(kind, k, bits), "{kind:?} {bits:b} {y}");
                }
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = RandomCircuitSpec::new(1, 3, 2);
        assert_eq!(random_circuit(&spec), random_circuit(&spec));
        let other = RandomCircuitSpec::new(2, 3, 2);
        let differs = (0..10).any(|s| {
            random_circuit(&RandomCircuitSpec { seed: s, ..spec })
                != random_circuit(&RandomCircuitSpec { seed: s + 100, ..other })
        });
        assert!(differs);
    }

    #[test]
    fn shape() {
        let f = random_circuit(&RandomCircuitSpec::new(5, 6, 4));
        assert_eq!(f.inputs().len(), 6);
        assert_eq!(f.outputs().len(), 4);
        for y in f.outputs() {
            assert!(f.occurring_vars().contains(y));
        }
    }
}
