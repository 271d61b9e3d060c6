//! `pse`: exact output entropy of circuit formulas.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 circuit-property
//! violation, 3 verification disagreement, 4 timeout.

mod report;

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

use pse_core::addand::build_from_trace;
use pse_core::baseline::baseline_entropy;
use pse_core::formula::{parse_dimacs, random_circuit, serialize_dimacs, RandomCircuitSpec};
use pse_core::{pse_entropy, CircuitFormula, Heuristic, PseConfig, Var};

use report::{ManifestEntry, Report, StatsFormat};

const EXIT_INPUT: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_DISAGREE: u8 = 3;
const EXIT_TIMEOUT: u8 = 4;

/// Entropy difference tolerated by `--mode verify`.
const VERIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Entropy and model count by output search.
    Pse,
    /// Entropy by enumerating output assignments.
    Baseline,
    /// Run both and compare.
    Verify,
    /// Write the search trace as an explicit diagram.
    Compile,
    /// Write random circuit formulas.
    Gen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum HeuristicArg {
    Minfill,
    Vsads,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DiagramFormat {
    Dot,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "pse", version, about = "Exact Shannon entropy of circuit CNF formulas")]
struct Cli {
    /// Extended DIMACS file (`-` for stdin). Not used by `--mode gen`.
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Pse)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = HeuristicArg::Minfill)]
    heuristic: HeuristicArg,
    /// Skip literal-equivalence preprocessing.
    #[arg(long)]
    no_pre: bool,
    /// Disable the cache for output-free components.
    #[arg(long)]
    no_xcache: bool,
    /// Disable the entropy cache.
    #[arg(long)]
    no_ycache: bool,
    /// Decide outputs without splitting into components.
    #[arg(long)]
    no_decomp: bool,
    /// Write the search trace as JSON.
    #[arg(long, value_name = "PATH")]
    emit_trace: Option<PathBuf>,
    /// Byte budget for the component cache.
    #[arg(long, value_name = "N")]
    cache_bytes: Option<usize>,
    #[arg(long, value_enum, default_value_t = StatsFormat::Text)]
    stats: StatsFormat,
    /// Soft time limit, checked before each output decision.
    #[arg(long, value_name = "SECONDS")]
    timeout: Option<f64>,
    /// Explicit output decision order, e.g. `6,7,8`.
    #[arg(long, value_delimiter = ',', value_name = "VARS")]
    order: Option<Vec<u32>>,
    /// Diagram destination for `--mode compile`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DiagramFormat::Text)]
    format: DiagramFormat,
    /// First generator seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of formulas to generate.
    #[arg(long, default_value_t = 10)]
    count: u64,
    #[arg(long, default_value_t = 8)]
    inputs: u32,
    #[arg(long, default_value_t = 4)]
    outputs: u32,
    /// Maximum gate fan-in.
    #[arg(long, default_value_t = 3)]
    arity: u32,
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

impl Cli {
    fn config(&self) -> Result<PseConfig> {
        let timeout = match self.timeout {
            Some(t) if !(t.is_finite() && t >= 0.0) => bail!("--timeout must be a nonnegative number"),
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        let order = match &self.order {
            Some(vs) if vs.contains(&0) => bail!("--order takes positive variable indices"),
            Some(vs) => Some(vs.iter().map(|&v| Var::new(v)).collect()),
            None => None,
        };
        Ok(PseConfig {
            heuristic: match self.heuristic {
                HeuristicArg::Minfill => Heuristic::Minfill,
                HeuristicArg::Vsads => Heuristic::Vsads,
            },
            use_pre: !self.no_pre,
            use_ycache: !self.no_ycache,
            use_xcache: !self.no_xcache,
            use_decomposition: !self.no_decomp,
            emit_trace: self.emit_trace.is_some() || self.mode == Mode::Compile,
            order,
            timeout,
            cache_bytes: self.cache_bytes,
        })
    }

    fn input_path(&self) -> Result<&Path> {
        self.input.as_deref().context("an input file is required for this mode")
    }
}

fn read_formula(path: &Path) -> Result<CircuitFormula> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        buf
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_dimacs(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn echo_config(r: &mut Report, cli: &Cli, path: &Path) {
    r.push("input", path.display().to_string());
    r.push("mode", format!("{:?}", cli.mode).to_lowercase());
    r.push("heuristic", format!("{:?}", cli.heuristic).to_lowercase());
    r.push("pre", !cli.no_pre);
    r.push("xcache", !cli.no_xcache);
    r.push("ycache", !cli.no_ycache);
    r.push("decomposition", !cli.no_decomp);
}

fn run(cli: &Cli) -> Result<u8> {
    if cli.mode == Mode::Gen {
        return generate(cli);
    }
    let cfg = cli.config()?;
    let path = cli.input_path()?;
    let f = read_formula(path)?;
    let mut r = Report::default();
    echo_config(&mut r, cli, path);
    let mut code = 0;

    match cli.mode {
        Mode::Pse | Mode::Compile => {
            let res = pse_entropy(&f, &cfg)?;
            r.entropy("entropy", res.entropy);
            r.push("count", res.count.to_string());
            if let (Some(p), Some(t)) = (&cli.emit_trace, &res.trace) {
                let json = serde_json::to_string(t).context("serializing trace")?;
                fs::write(p, json).with_context(|| format!("writing {}", p.display()))?;
            }
            if cli.mode == Mode::Compile {
                let trace = res.trace.as_ref().context("trace missing")?;
                let d = build_from_trace(trace)?;
                let text = match cli.format {
                    DiagramFormat::Dot => d.export_dot(),
                    DiagramFormat::Text => d.export_text(),
                };
                let out = cli.out.as_ref().context("--mode compile needs --out PATH")?;
                fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
                r.push("diagram_nodes", d.node_count() as u64);
                r.push("diagram", out.display().to_string());
            }
            r.stats(&res.stats);
            r.push("status", "ok");
        }
        Mode::Baseline => {
            let res = baseline_entropy(&f)?;
            r.entropy("entropy", res.entropy);
            r.push("count", res.count.to_string());
            r.stats(&res.stats);
            r.push("status", "ok");
        }
        Mode::Verify => {
            let b = baseline_entropy(&f)?;
            let p = pse_entropy(&f, &cfg)?;
            let agree = p.count == b.count && (p.entropy - b.entropy).abs() <= VERIFY_TOL;
            r.entropy("entropy", p.entropy);
            r.push("count", p.count.to_string());
            r.entropy("baseline_entropy", b.entropy);
            r.push("baseline_count", b.count.to_string());
            r.stats(&p.stats);
            r.push("status", if agree { "agree" } else { "disagree" });
            if !agree {
                code = EXIT_DISAGREE;
            }
        }
        Mode::Gen => unreachable!("handled above"),
    }
    print!("{}", r.render(cli.stats));
    Ok(code)
}

fn generate(cli: &Cli) -> Result<u8> {
    let dir = cli.out_dir.as_ref().context("--mode gen needs --out-dir DIR")?;
    if cli.inputs == 0 || cli.outputs == 0 {
        bail!("--inputs and --outputs must be positive");
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut manifest = Vec::new();
    for seed in cli.seed..cli.seed.saturating_add(cli.count) {
        let spec = RandomCircuitSpec {
            seed,
            n_inputs: cli.inputs,
            n_outputs: cli.outputs,
            max_arity: cli.arity,
        };
        let file = format!("circuit-{seed}.cnf");
        let text = serialize_dimacs(&random_circuit(&spec));
        fs::write(dir.join(&file), text).with_context(|| format!("writing {file}"))?;
        manifest.push(ManifestEntry {
            file,
            seed,
            inputs: spec.n_inputs,
            outputs: spec.n_outputs,
            max_arity: spec.max_arity,
        });
    }
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(dir.join("manifest.json"), json).context("writing manifest.json")?;
    let mut r = Report::default();
    r.push("mode", "gen");
    r.push("generated", manifest.len() as u64);
    r.push("out_dir", dir.display().to_string());
    r.push("status", "ok");
    print!("{}", r.render(cli.stats));
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> (u8, &'static str) {
    match err.downcast_ref::<pse_core::Error>() {
        Some(pse_core::Error::CircuitViolation { .. }) => (EXIT_VIOLATION, "circuit-violation"),
        Some(pse_core::Error::Timeout) => (EXIT_TIMEOUT, "timeout"),
        _ => (EXIT_INPUT, "error"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let (code, status) = exit_code(&err);
            eprintln!("pse: {err:#}");
            println!("status={status}");
            ExitCode::from(code)
        }
    }
}
