//! Extended DIMACS: a standard `p cnf` body plus `c p input … 0` and
//! `c p output … 0` declarations. A legacy `c ind … 0` line is read as the
//! output set when no `c p` declaration is present, with every other
//! variable taken as input.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{CircuitFormula, Clause, Lit, Var};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads a zero-terminated list of variable indices.
fn parse_var_list<'a>(
    tokens: impl Iterator<Item = &'a str>,
    line: usize,
    into: &mut Vec<i64>,
) -> Result<()> {
    for tok in tokens {
        let v: i64 = tok
            .parse()
            .map_err(|_| parse_err(line, format!("bad variable `{tok}`")))?;
        if v == 0 {
            return Ok(());
        }
        into.push(v);
    }
    Err(parse_err(line, "declaration not terminated by 0"))
}

fn to_vars(raw: &[i64], nvars: u32) -> Result<BTreeSet<Var>> {
    raw.iter()
        .map(|&v| {
            if v < 1 || v > i64::from(nvars) {
                Err(Error::VarOutOfRange { var: v, nvars })
            } else {
                Ok(Var::new(v as u32))
            }
        })
        .collect()
}

pub fn parse_dimacs(text: &[u8]) -> Result<CircuitFormula> {
    let text = std::str::from_utf8(text).map_err(|_| parse_err(0, "input is not ASCII"))?;

    let mut header: Option<(u32, usize)> = None;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut independent = Vec::new();
    let (mut saw_input, mut saw_output, mut saw_ind) = (false, false, false);
    let mut clauses = Vec::new();
    let mut n_read = 0usize;
    let mut current: Vec<Lit> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        if trimmed.starts_with('c') {
            toks.next();
            match (toks.next(), toks.clone().next()) {
                (Some("p"), Some("input")) => {
                    toks.next();
                    saw_input = true;
                    parse_var_list(toks, line, &mut inputs)?;
                }
                (Some("p"), Some("output")) => {
                    toks.next();
                    saw_output = true;
                    parse_var_list(toks, line, &mut outputs)?;
                }
                (Some("ind"), _) => {
                    saw_ind = true;
                    parse_var_list(toks, line, &mut independent)?;
                }
                _ => {}
            }
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line, "duplicate header"));
            }
            let parts: Vec<&str> = toks.collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", nv, nc] => nv.parse::<u32>().ok().zip(nc.parse::<usize>().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| parse_err(line, "malformed header"))?);
            continue;
        }
        let Some((nvars, _)) = header else {
            return Err(parse_err(line, "clause before header"));
        };
        for tok in toks {
            let v: i64 = tok
                .parse()
                .map_err(|_| parse_err(line, format!("bad literal `{tok}`")))?;
            if v == 0 {
                n_read += 1;
                if let Some(c) = Clause::new(std::mem::take(&mut current)) {
                    clauses.push(c);
                }
                continue;
            }
            if v.unsigned_abs() > u64::from(nvars) {
                return Err(Error::VarOutOfRange { var: v, nvars });
            }
            current.push(Lit::from_dimacs(v));
        }
    }

    let Some((nvars, nclauses)) = header else {
        return Err(parse_err(0, "missing header"));
    };
    if !current.is_empty() {
        return Err(parse_err(0, "last clause not terminated by 0"));
    }
    if n_read != nclauses {
        return Err(parse_err(
            0,
            format!("header declares {nclauses} clauses, found {n_read}"),
        ));
    }

    let (inputs, outputs) = if !saw_input && !saw_output {
        if !saw_ind {
            return Err(Error::MissingDeclaration("input/output"));
        }
        let outputs = to_vars(&independent, nvars)?;
        let inputs = (1..=nvars)
            .map(Var::new)
            .filter(|v| !outputs.contains(v))
            .collect();
        (inputs, outputs)
    } else if !saw_output {
        return Err(Error::MissingDeclaration("output"));
    } else if !saw_input {
        return Err(Error::MissingDeclaration("input"));
    } else {
        (to_vars(&inputs, nvars)?, to_vars(&outputs, nvars)?)
    };

    CircuitFormula::new(nvars, clauses, inputs, outputs)
}

/// Writes declarations before clauses. `parse_dimacs` reads the result back
/// to the same formula.
pub fn serialize_dimacs(f: &CircuitFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", f.nvars(), f.clauses().len());
    for (kind, vars) in [("input", f.inputs()), ("output", f.outputs())] {
        let _ = write!(out, "c p {kind}");
        for v in vars {
            let _ = write!(out, " {v}");
        }
        out.push_str(" 0\n");
    }
    for c in f.clauses() {
        for l in c.iter() {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}
