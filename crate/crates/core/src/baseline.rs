//! Entropy by enumerating every output assignment and counting the inputs
//! that produce it. Exponential in `|Y|`; meant as a reference.

use std::time::Instant;

use num_traits::Zero;

use crate::counter::{BigCount, Counter, SharedCache};
use crate::error::{Error, Result};
use crate::formula::residual::{propagate, vars_of, Propagation};
use crate::formula::{CircuitFormula, Lit, Var};
use crate::numeric::{plogp, ratio};
use crate::pse::{EntropyResult, PseStats};

/// Largest `|Y|` the enumeration accepts.
pub const BASELINE_LIMIT: usize = 20;

/// Baseline with a cache shared across all conditioned counts.
pub fn baseline_entropy(f: &CircuitFormula) -> Result<EntropyResult> {
    baseline_entropy_with(f, true)
}

pub fn baseline_entropy_with(f: &CircuitFormula, use_cache: bool) -> Result<EntropyResult> {
    let start = Instant::now();
    let ys: Vec<Var> = f.outputs().iter().copied().collect();
    if ys.len() > BASELINE_LIMIT {
        return Err(Error::TooLarge {
            what: "baseline enumeration",
            size: ys.len(),
            limit: BASELINE_LIMIT,
        });
    }
    let n_inputs = f.inputs().len();
    let mut cache = SharedCache::new();
    let mut counter = Counter::new(&mut cache, use_cache);
    let mut weights: Vec<BigCount> = Vec::new();

    for bits in 0u64..(1u64 << ys.len()) {
        let sigma: Vec<Lit> = ys.iter().enumerate().map(|(i, y)| y.lit(bits >> i & 1 == 1)).collect();
        if let Propagation::Residual { clauses, assigned } = propagate(f.clauses(), &sigma) {
            // Every output is assigned, so the rest is over inputs only.
            let fixed_inputs = assigned.len() - ys.len();
            let free = n_inputs - fixed_inputs - vars_of(&clauses).len();
            let w = counter.count_residual(&clauses) << free;
            if !w.is_zero() {
                weights.push(w);
            }
        }
    }

    let x_decisions = counter.decisions();
    let total: BigCount = weights.iter().sum();
    let entropy = if total.is_zero() {
        0.0
    } else {
        weights.iter().map(|w| plogp(ratio(w, &total))).sum()
    };
    Ok(EntropyResult {
        entropy,
        count: total,
        stats: PseStats {
            x_decisions,
            cache: cache.stats(),
            cache_entries: cache.len(),
            time_ms: start.elapsed().as_secs_f64() * 1e3,
            ..PseStats::default()
        },
        trace: None,
    })
}
