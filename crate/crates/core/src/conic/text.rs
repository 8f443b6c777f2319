//! Plain-text program format.
//!
//! ```text
//! conic-program v1
//! vars <n>
//! name <index> <label>            (optional, one per variable)
//! objective <index>:<coef> ...
//! cone <zero|nonneg|soc|exp> <dim>
//! <constant> <index>:<coef> ...   (dim rows per cone block)
//! end
//! ```
//!
//! Each block row is the affine expression `constant + sum coef * x[index]`,
//! and the rows of a block together must lie in the named cone.

use std::fmt::Write as _;

use super::{Affine, Cone, ConeBlock, ConicProgram};
use crate::error::{Error, Result};

const HEADER: &str = "conic-program v1";

fn write_terms(out: &mut String, terms: &[(usize, f64)]) {
    for &(i, c) in terms {
        let _ = write!(out, " {i}:{c:?}");
    }
}

pub fn dump(program: &ConicProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "vars {}", program.n_vars);
    for (i, name) in program.names.iter().enumerate() {
        let _ = writeln!(out, "name {i} {name}");
    }
    out.push_str("objective");
    let obj: Vec<(usize, f64)> =
        program.objective.iter().copied().enumerate().filter(|&(_, c)| c != 0.0).collect();
    write_terms(&mut out, &obj);
    out.push('\n');
    for block in &program.blocks {
        let _ = writeln!(out, "cone {} {}", block.cone.keyword(), block.cone.dim());
        for r in &block.rows {
            let _ = write!(out, "{:?}", r.constant);
            write_terms(&mut out, &r.terms);
            out.push('\n');
        }
    }
    out.push_str("end\n");
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_terms<'a>(line: usize, toks: impl Iterator<Item = &'a str>) -> Result<Vec<(usize, f64)>> {
    toks.map(|t| {
        let (i, c) = t.split_once(':').ok_or_else(|| perr(line, format!("bad term '{t}'")))?;
        let i = i.parse::<usize>().map_err(|_| perr(line, format!("bad index '{i}'")))?;
        let c = c.parse::<f64>().map_err(|_| perr(line, format!("bad coefficient '{c}'")))?;
        Ok((i, c))
    })
    .collect()
}

pub fn load(text: &str) -> Result<ConicProgram> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, first) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    if first != HEADER {
        return Err(perr(ln, format!("expected '{HEADER}'")));
    }
    let (ln, vars) = lines.next().ok_or_else(|| perr(ln + 1, "missing vars line"))?;
    let n_vars = vars
        .strip_prefix("vars ")
        .and_then(|s| s.trim().parse::<usize>().ok())
        .ok_or_else(|| perr(ln, "expected 'vars <n>'"))?;
    let mut program =
        ConicProgram { n_vars, objective: vec![0.0; n_vars], blocks: Vec::new(), names: Vec::new() };
    let mut names: Vec<Option<String>> = vec![None; n_vars];
    let mut saw_end = false;
    while let Some((ln, l)) = lines.next() {
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("name") => {
                let i = toks
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .filter(|&i| i < n_vars)
                    .ok_or_else(|| perr(ln, "bad name index"))?;
                let label: Vec<&str> = toks.collect();
                names[i] = Some(label.join(" "));
            }
            Some("objective") => {
                for (i, c) in parse_terms(ln, toks)? {
                    if i >= n_vars {
                        return Err(perr(ln, format!("index {i} out of range")));
                    }
                    program.objective[i] += c;
                }
            }
            Some("cone") => {
                let kind = toks.next().ok_or_else(|| perr(ln, "missing cone kind"))?;
                let dim = toks
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| perr(ln, "missing cone dimension"))?;
                let cone = match kind {
                    "zero" => Cone::Zero(dim),
                    "nonneg" => Cone::Nonneg(dim),
                    "soc" => Cone::SecondOrder(dim),
                    "exp" if dim == 3 => Cone::Exp,
                    "exp" => return Err(perr(ln, "exponential cone must have dimension 3")),
                    other => return Err(perr(ln, format!("unknown cone '{other}'"))),
                };
                let mut rows = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let (rl, row) = lines.next().ok_or_else(|| perr(ln, "truncated cone block"))?;
                    let mut rt = row.split_whitespace();
                    let constant = rt
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .ok_or_else(|| perr(rl, "expected row constant"))?;
                    let terms = parse_terms(rl, rt)?;
                    if let Some(&(i, _)) = terms.iter().find(|t| t.0 >= n_vars) {
                        return Err(perr(rl, format!("index {i} out of range")));
                    }
                    rows.push(Affine { constant, terms });
                }
                program.blocks.push(ConeBlock { cone, rows });
            }
            Some("end") => {
                saw_end = true;
                break;
            }
            Some(other) => return Err(perr(ln, format!("unexpected keyword '{other}'"))),
            None => {}
        }
    }
    if !saw_end {
        return Err(perr(text.lines().count(), "missing 'end'"));
    }
    if names.iter().any(Option::is_some) {
        program.names =
            names.into_iter().enumerate().map(|(i, n)| n.unwrap_or_else(|| format!("x{i}"))).collect();
    }
    Ok(program)
}
