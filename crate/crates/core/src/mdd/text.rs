//! Line-based text format.
//!
//! ```text
//! mdd 2
//! dom 1 1 2 3 4
//! dom 2 1 2 3
//! node 0 1
//! node 1 3
//! edge 0 1 4
//! end
//! ```
//!
//! Variables and layers are numbered from 1 in the file; the terminal is the
//! node at layer `n + 1`. A `failed` line stands for an unsatisfiable
//! constraint. Blank lines and `#` comments are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Mdd, Value};
use crate::error::MddError;

impl Mdd {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mdd {}", self.num_vars());
        for (i, dom) in self.domains.iter().enumerate() {
            let _ = write!(out, "dom {}", i + 1);
            for v in dom {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        if self.is_failed() {
            out.push_str("failed\n");
        } else {
            for (id, node) in self.nodes.iter().enumerate() {
                let _ = writeln!(out, "node {id} {}", node.layer + 1);
            }
            for e in self.edges() {
                let _ = writeln!(out, "edge {} {} {}", e.source, e.destination, e.value);
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Mdd, MddError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line, header) = lines
            .next()
            .ok_or_else(|| MddError::parse(1, "empty input"))?;
        let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["mdd", n] => parse_num::<usize>(line, n)?,
            _ => return Err(MddError::parse(line, "expected `mdd <n>`")),
        };

        let mut domains: Vec<Option<Vec<Value>>> = vec![None; n];
        let mut ids: HashMap<u64, usize> = HashMap::new();
        let mut layers: Vec<usize> = Vec::new();
        let mut edges: Vec<(usize, u64, u64, Value)> = Vec::new();
        let mut failed = false;
        let mut end_line = None;

        for (line, content) in lines.by_ref() {
            let words: Vec<&str> = content.split_whitespace().collect();
            match words[0] {
                "dom" => {
                    let i = parse_index(line, words.get(1), n, "variable")?;
                    if domains[i].is_some() {
                        return Err(MddError::parse(
                            line,
                            format!("domain {} declared twice", i + 1),
                        ));
                    }
                    let values = words[2..]
                        .iter()
                        .map(|w| parse_num::<Value>(line, w))
                        .collect::<Result<Vec<_>, _>>()?;
                    domains[i] = Some(values);
                }
                "node" => {
                    if words.len() != 3 {
                        return Err(MddError::parse(line, "expected `node <id> <layer>`"));
                    }
                    let id = parse_num::<u64>(line, words[1])?;
                    let layer = parse_index(line, words.get(2), n + 1, "layer")?;
                    if ids.insert(id, layers.len()).is_some() {
                        return Err(MddError::parse(line, format!("node {id} declared twice")));
                    }
                    layers.push(layer);
                }
                "edge" => {
                    if words.len() != 4 {
                        return Err(MddError::parse(line, "expected `edge <src> <dst> <value>`"));
                    }
                    edges.push((
                        line,
                        parse_num(line, words[1])?,
                        parse_num(line, words[2])?,
                        parse_num(line, words[3])?,
                    ));
                }
                "failed" => failed = true,
                "end" => {
                    end_line = Some(line);
                    break;
                }
                other => {
                    return Err(MddError::parse(
                        line,
                        format!("unknown directive `{other}`"),
                    ))
                }
            }
        }
        let end_line =
            end_line.ok_or_else(|| MddError::parse(text.lines().count(), "missing `end`"))?;
        if let Some((line, _)) = lines.next() {
            return Err(MddError::parse(line, "content after `end`"));
        }
        let domains = domains
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                d.ok_or_else(|| {
                    MddError::parse(end_line, format!("missing domain for variable {}", i + 1))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        if failed {
            if !layers.is_empty() || !edges.is_empty() {
                return Err(MddError::parse(
                    end_line,
                    "a failed diagram carries no nodes",
                ));
            }
            return Ok(Mdd::new_failed(domains));
        }

        let mut adjacency: Vec<Vec<(Value, usize)>> = vec![Vec::new(); layers.len()];
        for (line, src, dst, value) in edges {
            let s = *ids
                .get(&src)
                .ok_or_else(|| MddError::parse(line, format!("edge from undeclared node {src}")))?;
            let d = *ids
                .get(&dst)
                .ok_or_else(|| MddError::parse(line, format!("edge into undeclared node {dst}")))?;
            adjacency[s].push((value, d));
        }
        let terminals: Vec<usize> = (0..layers.len()).filter(|&u| layers[u] == n).collect();
        let [terminal] = terminals[..] else {
            return Err(MddError::parse(
                end_line,
                "expected exactly one node at the terminal layer",
            ));
        };
        let min_layer = layers.iter().copied().min().unwrap_or(n);
        let roots: Vec<usize> = (0..layers.len())
            .filter(|&u| layers[u] == min_layer)
            .collect();
        let [root] = roots[..] else {
            return Err(MddError::parse(
                end_line,
                "expected exactly one node at the minimum layer",
            ));
        };
        let parts = layers.into_iter().zip(adjacency).collect();
        Mdd::from_parts(domains, parts, root, terminal).map_err(|e| match e {
            MddError::Invalid(msg) => MddError::parse(end_line, msg),
            other => other,
        })
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, word: &str) -> Result<T, MddError> {
    word.parse()
        .map_err(|_| MddError::parse(line, format!("`{word}` is not a valid number")))
}

/// Parses a 1-based index below or equal to `count` and returns it 0-based.
fn parse_index(
    line: usize,
    word: Option<&&str>,
    count: usize,
    what: &str,
) -> Result<usize, MddError> {
    let word = word.ok_or_else(|| MddError::parse(line, format!("missing {what}")))?;
    let i = parse_num::<usize>(line, word)?;
    if i == 0 || i > count {
        return Err(MddError::parse(
            line,
            format!("{what} {i} out of range 1..={count}"),
        ));
    }
    Ok(i - 1)
}
