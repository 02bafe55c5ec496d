//! Reader for the line-based CSP instance format.
//!
//! ```text
//! csp 2
//! dom 1 1 2 3 4
//! dom 2 1 2 3
//! ctuples 2 1 2
//! 1 3
//! 4 1
//! end
//! cmdd 2 1 2 other.mdd
//! end
//! ```
//!
//! Variables are numbered from 1. `#` starts a comment. Paths in `cmdd`
//! lines are relative to the instance file.

use std::path::Path;

use super::Csp;
use crate::error::InstanceError;
use crate::mdd::{Mdd, Value};

fn numbers<T: std::str::FromStr>(line: usize, words: &[&str]) -> Result<Vec<T>, InstanceError> {
    words
        .iter()
        .map(|w| {
            w.parse()
                .map_err(|_| InstanceError::parse(line, format!("expected a number, found `{w}`")))
        })
        .collect()
}

enum Pending {
    Table {
        line: usize,
        scope: Vec<usize>,
        tuples: Vec<Vec<Value>>,
    },
    File {
        line: usize,
        scope: Vec<usize>,
        mdd: Mdd,
    },
}

/// Reads an instance file.
pub fn read_instance(path: &Path) -> Result<Csp, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses instance text; `cmdd` paths are resolved against `base`.
pub fn parse_instance(text: &str, base: &Path) -> Result<Csp, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first, header) = lines
        .next()
        .ok_or_else(|| InstanceError::parse(1, "empty instance"))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    let n: usize = match words.as_slice() {
        ["csp", n] => n
            .parse()
            .map_err(|_| InstanceError::parse(first, "bad variable count"))?,
        _ => return Err(InstanceError::parse(first, "expected `csp <n>`")),
    };
    let mut domains: Vec<Option<Vec<Value>>> = vec![None; n];
    let mut pending = Vec::new();
    let mut closed = None;
    let parse_scope = |line: usize, words: &[&str]| -> Result<(usize, Vec<usize>), InstanceError> {
        let arity: usize = words
            .first()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| InstanceError::parse(line, "expected an arity"))?;
        if words.len() < 1 + arity {
            return Err(InstanceError::parse(
                line,
                format!("scope needs {arity} variables"),
            ));
        }
        let scope = numbers::<usize>(line, &words[1..1 + arity])?
            .into_iter()
            .map(|v| {
                if v == 0 || v > n {
                    Err(InstanceError::parse(
                        line,
                        format!("variable {v} is not in 1..={n}"),
                    ))
                } else {
                    Ok(v - 1)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((1 + arity, scope))
    };

    while let Some((line, text)) = lines.next() {
        if let Some(at) = closed {
            return Err(InstanceError::parse(
                line,
                format!("content after the closing `end` on line {at}"),
            ));
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        match words[0] {
            "dom" => {
                let [_, var, values @ ..] = words.as_slice() else {
                    return Err(InstanceError::parse(line, "expected `dom <i> <values...>`"));
                };
                let var: usize = var
                    .parse()
                    .map_err(|_| InstanceError::parse(line, "bad variable index"))?;
                if var == 0 || var > n {
                    return Err(InstanceError::parse(
                        line,
                        format!("variable {var} is not in 1..={n}"),
                    ));
                }
                if domains[var - 1].is_some() {
                    return Err(InstanceError::parse(
                        line,
                        format!("domain of variable {var} given twice"),
                    ));
                }
                domains[var - 1] = Some(numbers(line, values)?);
            }
            "ctuples" => {
                let (used, scope) = parse_scope(line, &words[1..])?;
                if words.len() != 1 + used {
                    return Err(InstanceError::parse(
                        line,
                        "unexpected words after the scope",
                    ));
                }
                let mut tuples = Vec::new();
                loop {
                    let (tl, t) = lines.next().ok_or_else(|| {
                        InstanceError::parse(line, "table is not closed by `end`")
                    })?;
                    if t == "end" {
                        break;
                    }
                    let words: Vec<&str> = t.split_whitespace().collect();
                    if words.len() != scope.len() {
                        return Err(InstanceError::parse(
                            tl,
                            format!("tuple has {} values, expected {}", words.len(), scope.len()),
                        ));
                    }
                    tuples.push(numbers(tl, &words)?);
                }
                pending.push(Pending::Table {
                    line,
                    scope,
                    tuples,
                });
            }
            "cmdd" => {
                let (used, scope) = parse_scope(line, &words[1..])?;
                let [path] = &words[1 + used..] else {
                    return Err(InstanceError::parse(
                        line,
                        "expected one path after the scope",
                    ));
                };
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| InstanceError::parse(line, format!("{}: {e}", full.display())))?;
                let mdd = Mdd::from_text(&text)
                    .map_err(|e| InstanceError::parse(line, format!("{}: {e}", full.display())))?;
                pending.push(Pending::File { line, scope, mdd });
            }
            "end" => closed = Some(line),
            other => {
                return Err(InstanceError::parse(
                    line,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    if closed.is_none() {
        return Err(InstanceError::parse(
            text.lines().count().max(1),
            "missing closing `end`",
        ));
    }
    let domains = domains
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            d.ok_or_else(|| {
                InstanceError::parse(first, format!("no domain for variable {}", i + 1))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csp = Csp::new(domains);
    for p in pending {
        let (line, result) = match p {
            Pending::Table {
                line,
                scope,
                tuples,
            } => (line, csp.add_table(scope, tuples)),
            Pending::File { line, scope, mdd } => (line, csp.add_constraint(mdd, scope)),
        };
        result.map_err(|e| InstanceError::parse(line, e.to_string()))?;
    }
    Ok(csp)
}
