//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Run with `cargo test -p pse-core --test acceptance`. Criterion 10 needs
//! the benchmark files and reads them from `$PSE_BENCH_DIR`.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use num_traits::ToPrimitive;
use pse_core::addand::{build_from_trace, AddAndDiagram, Node};
use pse_core::counter::count_models;
use pse_core::formula::{parse_dimacs, validate_circuit, ValidationMode, BRUTE_FORCE_LIMIT};
use pse_core::{
    apply_pre, baseline_entropy, pse_entropy, BigCount, CircuitFormula, Clause, Heuristic, Lit,
    PseConfig, SharedCache, Var,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BLOCK_ENTROPY: f64 = 0.8112781244591328;
const SEPARABLE_TOL_PER_BLOCK: f64 = 1e-9;
const WORKED_EXAMPLE_ENTROPY: f64 = 2.8423710;
const WORKED_EXAMPLE_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-9;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Result<String, String>) -> Verdict {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let time = match limit {
        Some(l) => format!("{} ms, limit {} ms", took.as_millis(), l.as_millis()),
        None => format!("{} ms", took.as_millis()),
    };
    match outcome {
        Ok(msg) if limit.is_none_or(|l| took < l) => Verdict::Pass(format!("{msg} ({time})")),
        Ok(msg) => Verdict::Fail(format!("{msg}, too slow ({time})")),
        Err(msg) => Verdict::Fail(format!("{msg} ({time})")),
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(f: &CircuitFormula, cfg: &PseConfig) -> Result<(f64, BigCount), String> {
    pse_entropy(f, cfg).map(|r| (r.entropy, r.count)).map_err(|e| e.to_string())
}

fn separable_values() -> Verdict {
    timed(Some(Duration::from_secs(1)), || {
        let mut worst = 0.0f64;
        for n in 1..=8u32 {
            let (h, count) = run(&separable(n), &PseConfig::default())?;
            let expected = f64::from(n) * BLOCK_ENTROPY;
            let err = (h - expected).abs();
            worst = worst.max(err / f64::from(n));
            check(err <= SEPARABLE_TOL_PER_BLOCK * f64::from(n), || {
                format!("n={n}: entropy {h} vs {expected}")
            })?;
            check(count == BigCount::from(4u32).pow(n), || format!("n={n}: count {count}"))?;
        }
        Ok(format!("n=1..8 entropy n*h(3/4) within {SEPARABLE_TOL_PER_BLOCK:e}*n (worst {worst:.1e} per block), counts 4^n"))
    })
}

fn worked_example_values() -> Verdict {
    timed(Some(Duration::from_millis(100)), || {
        let (h, count) = run(&worked_example(), &PseConfig::default())?;
        check(count == BigCount::from(28u32), || format!("count {count}, expected 28"))?;
        check((h - WORKED_EXAMPLE_ENTROPY).abs() <= WORKED_EXAMPLE_TOL, || {
            format!("entropy {h}, expected {WORKED_EXAMPLE_ENTROPY}")
        })?;
        check((h - worked_example_entropy()).abs() <= ORACLE_TOL, || {
            format!("entropy {h} vs closed form {}", worked_example_entropy())
        })?;
        Ok(format!("count 28, entropy {h:.7} (target {WORKED_EXAMPLE_ENTROPY} ± {WORKED_EXAMPLE_TOL:e})"))
    })
}

fn traced_diagram(f: &CircuitFormula, order: Vec<Var>, decomposition: bool) -> Result<AddAndDiagram, String> {
    let cfg = PseConfig {
        use_pre: false,
        use_decomposition: decomposition,
        emit_trace: true,
        order: Some(order),
        ..PseConfig::default()
    };
    let r = pse_entropy(f, &cfg).map_err(|e| e.to_string())?;
    let d = build_from_trace(r.trace.as_ref().expect("trace requested")).map_err(|e| e.to_string())?;
    check(d.weight() == r.count, || format!("diagram weight {} vs count {}", d.weight(), r.count))?;
    check((d.entropy() - r.entropy).abs() <= ORACLE_TOL, || {
        format!("diagram entropy {} vs {}", d.entropy(), r.entropy)
    })?;
    check(d.is_ordered(), || "diagram violates the order".into())?;
    Ok(d)
}

fn worked_example_nodes() -> Verdict {
    timed(None, || {
        let f = worked_example();
        let with = traced_diagram(&f, worked_example_order(), true)?.node_count();
        let without = traced_diagram(&f, worked_example_order(), false)?.node_count();
        check(with == 14 && without == 24, || {
            format!("{with} nodes with decomposition, {without} without; expected 14 and 24")
        })?;
        Ok("order y1..y5: 14 nodes with decomposition, 24 without".into())
    })
}

fn succinctness() -> Verdict {
    timed(Some(Duration::from_secs(10)), || {
        let mut sizes = Vec::new();
        for n in 1..=8u32 {
            let f = separable(n);
            let on = traced_diagram(&f, separable_order(n), true)?.node_count();
            let off = traced_diagram(&f, separable_order(n), false)?.node_count();
            check(on <= 8 * n as usize, || format!("n={n}: {on} nodes with decomposition > 8n"))?;
            check(off >= 1 << n, || format!("n={n}: {off} nodes without decomposition < 2^n"))?;
            sizes.push(format!("{on}/{off}"));
        }
        Ok(format!("nodes on/off for n=1..8: {}", sizes.join(" ")))
    })
}

fn oracle_equivalence() -> Verdict {
    timed(Some(Duration::from_secs(60)), || {
        let mut worst = 0.0f64;
        for seed in 1..=200u64 {
            let f = corpus(seed);
            let (h, count) = run(&f, &PseConfig::default())?;
            let b = baseline_entropy(&f).map_err(|e| e.to_string())?;
            worst = worst.max((h - b.entropy).abs());
            check((h - b.entropy).abs() <= ORACLE_TOL, || {
                format!("seed {seed}: entropy {h} vs baseline {}", b.entropy)
            })?;
            check(count == b.count, || format!("seed {seed}: count {count} vs baseline {}", b.count))?;
        }
        Ok(format!("200 formulas agree with enumeration (max |ΔH| {worst:.1e}, tol {ORACLE_TOL:e})"))
    })
}

fn ablations() -> Verdict {
    timed(Some(Duration::from_secs(120)), || {
        let mut runs = 0;
        for seed in 1..=50u64 {
            let f = corpus(1000 + seed);
            let (h_ref, c_ref) = run(&f, &PseConfig::default())?;
            for bits in 0u8..16 {
                for heuristic in [Heuristic::Minfill, Heuristic::Vsads] {
                    let cfg = PseConfig {
                        heuristic,
                        use_pre: bits & 1 != 0,
                        use_xcache: bits & 2 != 0,
                        use_ycache: bits & 4 != 0,
                        use_decomposition: bits & 8 != 0,
                        ..PseConfig::default()
                    };
                    let (h, c) = run(&f, &cfg)?;
                    runs += 1;
                    check(c == c_ref && (h - h_ref).abs() <= ORACLE_TOL, || {
                        format!("seed {}: {cfg:?} gives ({h}, {c}) vs ({h_ref}, {c_ref})", 1000 + seed)
                    })?;
                }
            }
        }
        Ok(format!("{runs} runs over 50 formulas x 32 configurations agree"))
    })
}

fn enumeration_entropy(weights: &[BigCount]) -> f64 {
    let ws: Vec<f64> = weights.iter().map(|w| w.to_f64().unwrap()).collect();
    let total: f64 = ws.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    ws.iter().filter(|&&w| w > 0.0).map(|&w| -(w / total) * (w / total).log2()).sum()
}

fn has_gap(d: &AddAndDiagram) -> bool {
    (0..d.len()).any(|id| match *d.node(id) {
        Node::Decision { lo, hi, .. } => d.vars(lo) != d.vars(hi),
        _ => false,
    })
}

fn diagram_recursions() -> Verdict {
    timed(None, || {
        let mut gapped = 0;
        let mut worst = 0.0f64;
        for seed in 0..100u64 {
            let d = random_diagram(seed, 12);
            let dist = d.distribution().map_err(|e| e.to_string())?;
            let weights: Vec<BigCount> = dist.into_iter().map(|(_, w)| w).collect();
            let total: BigCount = weights.iter().sum();
            check(d.weight() == total, || format!("seed {seed}: weight {} vs sum {total}", d.weight()))?;
            let h = enumeration_entropy(&weights);
            worst = worst.max((d.entropy() - h).abs());
            check((d.entropy() - h).abs() <= ORACLE_TOL, || {
                format!("seed {seed}: entropy {} vs enumeration {h}", d.entropy())
            })?;
            gapped += usize::from(has_gap(&d));
        }
        check(gapped >= 10, || format!("only {gapped} diagrams exercise gaps"))?;
        Ok(format!("100 diagrams, {gapped} with gaps: weights exact, max |ΔH| {worst:.1e}"))
    })
}

fn pre_preservation() -> Verdict {
    timed(None, || {
        let raw = PseConfig {
            use_pre: false,
            ..PseConfig::default()
        };
        let mut merged = 0;
        let mut restored = 0;
        for seed in 1..=100u64 {
            let f = with_equivalences(&corpus(2000 + seed), seed);
            let once = apply_pre(&f);
            merged += once.stats.merged_vars;
            restored += once.restored.len();
            let g = &once.formula;
            check(g.outputs() == f.outputs(), || format!("seed {seed}: outputs changed"))?;
            let mut cache = SharedCache::new();
            let scope = |h: &CircuitFormula| h.scope().into_iter().collect::<Vec<_>>();
            let cf = count_models(f.clauses(), &scope(&f), &mut cache, false);
            let cg = count_models(g.clauses(), &scope(g), &mut cache, false);
            check(cf == cg, || format!("seed {seed}: count {cf} became {cg}"))?;
            let (hf, _) = run(&f, &raw)?;
            let (hg, _) = run(g, &raw)?;
            check((hf - hg).abs() <= ORACLE_TOL, || format!("seed {seed}: entropy {hf} became {hg}"))?;
            let twice = apply_pre(g);
            check(
                twice.formula.sorted_clauses() == g.sorted_clauses()
                    && twice.formula.inputs() == g.inputs(),
                || format!("seed {seed}: not idempotent"),
            )?;
        }
        Ok(format!("100 formulas: counts exact, entropy within {ORACLE_TOL:e}, idempotent ({merged} variables merged, {restored} clauses restored)"))
    })
}

fn small_random_cnf(rng: &mut ChaCha8Rng) -> CircuitFormula {
    let nx = rng.gen_range(1..=3u32);
    let ny = rng.gen_range(1..=3u32);
    let n = nx + ny;
    let mut clauses = Vec::new();
    for _ in 0..rng.gen_range(1..=6) {
        let width = rng.gen_range(1..=3);
        let lits: Vec<Lit> = (0..width)
            .map(|_| Var::new(rng.gen_range(1..=n)).lit(rng.gen_bool(0.5)))
            .collect();
        clauses.extend(Clause::new(lits));
    }
    CircuitFormula::new(n, clauses, vars(1..=nx), vars(nx + 1..=n)).unwrap()
}

fn validation() -> Verdict {
    timed(None, || {
        let both = |f: &CircuitFormula| -> Result<bool, String> {
            let s = validate_circuit(f, ValidationMode::SelfComposition).map_err(|e| e.to_string())?;
            if f.inputs().len() + f.outputs().len() <= BRUTE_FORCE_LIMIT {
                let b = validate_circuit(f, ValidationMode::Brute).map_err(|e| e.to_string())?;
                check(b == s, || "modes disagree".into())?;
            }
            Ok(s)
        };
        for n in 1..=8 {
            check(both(&separable(n))?, || format!("separable n={n} rejected"))?;
        }
        for seed in 1..=200 {
            check(both(&corpus(seed))?, || format!("generated seed {seed} rejected"))?;
        }
        let or = CircuitFormula::new(2, vec![clause(&[1, 2])], vars(1..=1), vars(2..=2)).unwrap();
        check(!both(&or)?, || "(x ∨ y) accepted".into())?;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut accepted = 0;
        for i in 0..100 {
            let f = small_random_cnf(&mut rng);
            let b = validate_circuit(&f, ValidationMode::Brute).map_err(|e| e.to_string())?;
            let s = validate_circuit(&f, ValidationMode::SelfComposition).map_err(|e| e.to_string())?;
            check(b == s, || format!("small formula {i}: brute {b}, self-composition {s}"))?;
            accepted += usize::from(b);
        }
        Ok(format!(
            "separable and 200 generated accepted, (x∨y) rejected, modes agree on 100 small formulas ({accepted} circuits)"
        ))
    })
}

fn benchmark_spot_checks() -> Verdict {
    let Some(dir) = std::env::var_os("PSE_BENCH_DIR") else {
        return Verdict::Skip("PSE_BENCH_DIR not set; benchmark files are not distributed".into());
    };
    let cases = [
        ("blasted_case102", 8.0, 1e-6),
        ("CVE-2007-2875", 32.0, 1e-6),
        ("small-bug1-fixpoint-5", 12.81, 0.01),
    ];
    timed(None, || {
        let mut found = Vec::new();
        for (stem, expected, tol) in cases {
            let Some(path) = find_bench(Path::new(&dir), stem) else {
                continue;
            };
            let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let f = parse_dimacs(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
            let (h, _) = run(&f, &PseConfig::default())?;
            check((h - expected).abs() <= tol, || format!("{stem}: entropy {h}, expected {expected} ± {tol}"))?;
            found.push(format!("{stem}={h:.4}"));
        }
        check(!found.is_empty(), || "no benchmark files found".into())?;
        Ok(found.join(", "))
    })
}

fn find_bench(dir: &Path, stem: &str) -> Option<std::path::PathBuf> {
    let entries = std::fs::read_dir(dir).ok()?;
    entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with(stem)))
        .min()
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("separable family golden values", separable_values),
        ("worked example golden values", worked_example_values),
        ("worked example diagram sizes", worked_example_nodes),
        ("succinctness of decomposition", succinctness),
        ("agreement with enumeration", oracle_equivalence),
        ("ablation invariance", ablations),
        ("diagram weight and entropy recursions", diagram_recursions),
        ("equivalence preprocessing preserves results", pre_preservation),
        ("circuit validation", validation),
        ("benchmark spot checks", benchmark_spot_checks),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, msg) = match f() {
            Verdict::Pass(m) => ("PASS", m),
            Verdict::Fail(m) => {
                failed += 1;
                ("FAIL", m)
            }
            Verdict::Skip(m) => ("SKIP", m),
        };
        println!("criterion {:>2} {tag}  {name}: {msg}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
