//! Replayable operation scripts checked against the oracle.
//!
//! A script is a list of phase pushes and pops, value removals and
//! assignments applied to one propagator. After every operation the
//! propagator is compared with brute force over the constraint's solution
//! set, and after every pop its full state is compared with the snapshot
//! taken at the matching push.
//!
//! Text form, one operation per line, variables numbered from 1:
//!
//! ```text
//! push
//! remove 2:3 1:4
//! assign 1:2
//! pop
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::mdd::{structural_equal, Mdd, Value};
use crate::oracle::{self, DEFAULT_CAP};
use crate::propagator::{Propagation, PropagatorConfig, PropagatorState, StateSnapshot};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Push,
    Pop,
    Remove(Vec<(usize, Value)>),
    Assign(usize, Value),
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Push => write!(f, "push"),
            Op::Pop => write!(f, "pop"),
            Op::Remove(pairs) => {
                write!(f, "remove")?;
                for (var, v) in pairs {
                    write!(f, " {}:{v}", var + 1)?;
                }
                Ok(())
            }
            Op::Assign(var, v) => write!(f, "assign {}:{v}", var + 1),
        }
    }
}

fn parse_pair(word: &str) -> Result<(usize, Value), String> {
    let (var, value) = word
        .split_once(':')
        .ok_or_else(|| format!("expected var:value, found `{word}`"))?;
    let var: usize = var
        .parse()
        .map_err(|_| format!("bad variable in `{word}`"))?;
    let value: Value = value
        .parse()
        .map_err(|_| format!("bad value in `{word}`"))?;
    if var == 0 {
        return Err("variables are numbered from 1".into());
    }
    Ok((var - 1, value))
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.as_slice() {
            ["push"] => Ok(Op::Push),
            ["pop"] => Ok(Op::Pop),
            ["remove", pairs @ ..] => pairs
                .iter()
                .map(|w| parse_pair(w))
                .collect::<Result<_, _>>()
                .map(Op::Remove),
            ["assign", pair] => parse_pair(pair).map(|(var, v)| Op::Assign(var, v)),
            _ => Err(format!("unknown operation `{s}`")),
        }
    }
}

/// Renders a script, one operation per line.
pub fn to_text(ops: &[Op]) -> String {
    ops.iter().map(|op| format!("{op}\n")).collect()
}

/// Parses the text form; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<Op>, String> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| l.parse().map_err(|e| format!("line {i}: {e}")))
        .collect()
}

/// Draws a script of `len` operations. Removals and assignments mostly
/// target values still present in the domains the script has left, and
/// pops never outnumber pushes.
pub fn generate<R: Rng>(rng: &mut R, domains: &[Vec<Value>], len: usize) -> Vec<Op> {
    let mut current = domains.to_vec();
    let mut saved: Vec<Vec<Vec<Value>>> = Vec::new();
    let mut ops = Vec::with_capacity(len);
    let n = domains.len();
    while ops.len() < len {
        let roll = rng.gen_range(0..100);
        let open: Vec<usize> = (0..n).filter(|&i| current[i].len() > 1).collect();
        if roll < 15 || (roll < 28 && saved.is_empty()) {
            saved.push(current.clone());
            ops.push(Op::Push);
        } else if roll < 28 {
            current = saved.pop().unwrap();
            ops.push(Op::Pop);
        } else if roll < 45 && !open.is_empty() {
            let var = *open.choose(rng).unwrap();
            let v = *current[var].choose(rng).unwrap();
            current[var] = vec![v];
            ops.push(Op::Assign(var, v));
        } else {
            let k = rng.gen_range(1..=3);
            let mut pairs = Vec::new();
            for _ in 0..k {
                let var = rng.gen_range(0..n);
                let pick = if rng.gen_bool(0.1) || current[var].is_empty() {
                    domains[var].choose(rng).copied()
                } else {
                    current[var].choose(rng).copied()
                };
                if let Some(v) = pick {
                    current[var].retain(|&x| x != v);
                    pairs.push((var, v));
                }
            }
            ops.push(Op::Remove(pairs));
        }
    }
    ops
}

/// What to check while replaying.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub propagator: PropagatorConfig,
    /// Fail when an edge is redirected more often than the per-edge bound.
    pub enforce_redirect_bound: bool,
    /// Fail when reduction work on a branch exceeds its budget.
    pub enforce_work_bound: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            propagator: PropagatorConfig::default(),
            enforce_redirect_bound: true,
            enforce_work_bound: true,
        }
    }
}

/// Measurements over one replay.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplayStats {
    pub operations: usize,
    pub oracle_checks: usize,
    pub structural_checks: usize,
    pub snapshot_checks: usize,
    pub entailed_checks: usize,
    pub failures_seen: usize,
    pub max_branch_edge_removals: u64,
    pub initial_edges: usize,
    pub max_edge_redirects: u32,
    pub redirect_bound: u32,
    pub redirect_violations: u64,
    pub max_branch_reduce_work: u64,
    pub reduce_work_bound: u64,
    pub merges: u64,
    pub collapses: u64,
}

/// First mismatch found while replaying.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayFailure {
    /// Index of the operation after which the check failed; `None` when
    /// building the propagator failed.
    pub step: Option<usize>,
    pub message: String,
}

impl fmt::Display for ReplayFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "after operation {}: {}", s + 1, self.message),
            None => write!(f, "at start: {}", self.message),
        }
    }
}

/// A constraint together with its reference solution set.
#[derive(Clone, Debug)]
pub struct Subject<'a> {
    pub mdd: &'a Mdd,
    pub solutions: &'a BTreeSet<Vec<Value>>,
    pub domains: &'a [Vec<Value>],
}

/// What a push records: external domains, propagator state, and the
/// domains seen after the previous operation.
type Saved = (Vec<Vec<Value>>, StateSnapshot, Option<Vec<Vec<Value>>>);

struct Replay<'a> {
    subject: Subject<'a>,
    options: CheckOptions,
    prop: PropagatorState,
    external: Vec<Vec<Value>>,
    saved: Vec<Saved>,
    previous: Option<Vec<Vec<Value>>>,
    stats: ReplayStats,
}

fn fail<T>(step: Option<usize>, message: impl Into<String>) -> Result<T, ReplayFailure> {
    Err(ReplayFailure {
        step,
        message: message.into(),
    })
}

impl<'a> Replay<'a> {
    fn check(&mut self, step: Option<usize>) -> Result<(), ReplayFailure> {
        let p = &self.prop;
        let s = &mut self.stats;
        s.max_branch_edge_removals = s.max_branch_edge_removals.max(p.branch_edge_removals());
        s.max_edge_redirects = s.max_edge_redirects.max(p.max_edge_redirects());
        s.redirect_violations = p.stats().redirect_violations;
        s.max_branch_reduce_work = s.max_branch_reduce_work.max(p.branch_reduce_work());
        s.merges = p.stats().merges;
        s.collapses = p.stats().collapses;
        if self.options.propagator.validate_invariants {
            if let Err(e) = p.check_invariants() {
                return fail(step, e.to_string());
            }
        }
        if p.branch_edge_removals() > p.initial_edge_count() as u64 {
            return fail(
                step,
                format!(
                    "{} edge removals on this branch exceed the {} initial edges",
                    p.branch_edge_removals(),
                    p.initial_edge_count()
                ),
            );
        }
        if self.options.enforce_redirect_bound && p.stats().redirect_violations > 0 {
            return fail(
                step,
                format!(
                    "an edge was redirected more than {} times",
                    p.redirect_bound()
                ),
            );
        }
        if self.options.enforce_work_bound && p.branch_reduce_work() > p.reduce_work_bound() {
            return fail(
                step,
                format!(
                    "reduction work {} exceeds the budget {}",
                    p.branch_reduce_work(),
                    p.reduce_work_bound()
                ),
            );
        }

        let expected = oracle::valid_domains(self.subject.solutions, &self.external);
        let wiped = expected.iter().any(Vec::is_empty);
        self.stats.oracle_checks += 1;
        if p.is_failed() != wiped {
            return fail(
                step,
                format!(
                    "propagator failed = {}, oracle domains {expected:?}",
                    p.is_failed()
                ),
            );
        }
        if wiped {
            self.stats.failures_seen += 1;
            return Ok(());
        }
        let got = p.valid_domains().expect("live state");
        if got != expected {
            return fail(step, format!("valid domains {got:?}, oracle {expected:?}"));
        }
        if let Some(prev) = &self.previous {
            if got
                .iter()
                .zip(prev)
                .any(|(g, p)| g.iter().any(|v| !p.contains(v)))
            {
                return fail(
                    step,
                    format!("domains grew within a phase: {prev:?} -> {got:?}"),
                );
            }
        }
        let entailed =
            oracle::entailed(self.subject.solutions, &expected, DEFAULT_CAP).map_err(|e| {
                ReplayFailure {
                    step,
                    message: e.to_string(),
                }
            })?;
        let flag = p.is_domain_entailed().expect("live state");
        if flag != entailed {
            return fail(step, format!("entailment flag {flag}, oracle {entailed}"));
        }
        if flag {
            self.stats.entailed_checks += 1;
        }

        let live = p.live_mdd();
        let reference = if self.options.propagator.full_reduce {
            let sols = oracle::restrict(self.subject.solutions, &expected);
            Mdd::from_tuples(expected.clone(), &sols).expect("restricted solutions fit")
        } else {
            live.reduce_uniqueness()
        };
        self.stats.structural_checks += 1;
        if !structural_equal(&live, &reference) {
            return fail(
                step,
                format!("live diagram is not reduced:\n{live}\nexpected\n{reference}"),
            );
        }
        self.previous = Some(got);
        Ok(())
    }

    fn apply(&mut self, step: usize, op: &Op) -> Result<(), ReplayFailure> {
        let err = |e: crate::error::PropagatorError| ReplayFailure {
            step: Some(step),
            message: e.to_string(),
        };
        match op {
            Op::Push => {
                self.saved.push((
                    self.external.clone(),
                    self.prop.snapshot(),
                    self.previous.clone(),
                ));
                self.prop.push_phase();
            }
            Op::Pop => {
                let Some((external, snapshot, previous)) = self.saved.pop() else {
                    return Ok(());
                };
                self.prop.backtrack().map_err(err)?;
                self.external = external;
                self.previous = previous;
                self.stats.snapshot_checks += 1;
                if self.prop.snapshot() != snapshot {
                    return fail(
                        Some(step),
                        "state after backtrack differs from the snapshot at push",
                    );
                }
            }
            _ if self.prop.is_failed() => return Ok(()),
            Op::Remove(pairs) => {
                let mut removals = Vec::new();
                for &(var, v) in pairs {
                    if var >= self.external.len() {
                        return fail(Some(step), format!("variable {} out of range", var + 1));
                    }
                    if self.external[var].contains(&v) {
                        self.external[var].retain(|&x| x != v);
                        removals.push((var, v));
                    }
                }
                let out = self.prop.remove(&removals).map_err(err)?;
                self.check_newly(step, &out)?;
            }
            &Op::Assign(var, v) => {
                if var >= self.external.len() {
                    return fail(Some(step), format!("variable {} out of range", var + 1));
                }
                if !self.external[var].contains(&v) {
                    return Ok(());
                }
                let others: Vec<(usize, Value)> = self.external[var]
                    .iter()
                    .filter(|&&x| x != v)
                    .map(|&x| (var, x))
                    .collect();
                self.external[var] = vec![v];
                let out = if self.prop.current_domain(var).contains(&v) {
                    self.prop.assign(var, v).map_err(err)?
                } else {
                    self.prop.remove(&others).map_err(err)?
                };
                self.check_newly(step, &out)?;
            }
        }
        Ok(())
    }

    /// Values reported as newly removed must be exactly the ones the
    /// propagator dropped beyond the external removals.
    fn check_newly(&self, step: usize, out: &Propagation) -> Result<(), ReplayFailure> {
        let Propagation::Consistent(newly) = out else {
            return Ok(());
        };
        let mut expected = BTreeSet::new();
        for (var, ext) in self.external.iter().enumerate() {
            let cur = self.prop.current_domain(var);
            let before = self
                .previous
                .as_ref()
                .map(|p| p[var].clone())
                .unwrap_or_else(|| ext.clone());
            for v in before {
                if ext.contains(&v) && !cur.contains(&v) {
                    expected.insert((var, v));
                }
            }
        }
        let got: BTreeSet<(usize, Value)> = newly.iter().copied().collect();
        if got != expected {
            return fail(
                Some(step),
                format!("newly removed {got:?}, expected {expected:?}"),
            );
        }
        Ok(())
    }
}

/// Replays `ops` on a fresh propagator for `subject`, checking after every
/// operation.
pub fn replay(
    subject: &Subject<'_>,
    ops: &[Op],
    options: CheckOptions,
) -> Result<ReplayStats, ReplayFailure> {
    let prop =
        PropagatorState::new(subject.mdd, subject.domains, options.propagator).map_err(|e| {
            ReplayFailure {
                step: None,
                message: e.to_string(),
            }
        })?;
    let mut replay = Replay {
        subject: subject.clone(),
        options,
        stats: ReplayStats {
            initial_edges: prop.initial_edge_count(),
            redirect_bound: prop.redirect_bound(),
            reduce_work_bound: prop.reduce_work_bound(),
            ..ReplayStats::default()
        },
        prop,
        external: subject.domains.to_vec(),
        saved: Vec::new(),
        previous: None,
    };
    replay.check(None)?;
    for (i, op) in ops.iter().enumerate() {
        replay.apply(i, op)?;
        replay.stats.operations += 1;
        replay.check(Some(i))?;
    }
    Ok(replay.stats)
}

/// Shrinks a failing script by dropping operations one at a time while it
/// keeps failing.
pub fn minimize(subject: &Subject<'_>, ops: &[Op], options: CheckOptions) -> Vec<Op> {
    let mut ops = ops.to_vec();
    if replay(subject, &ops, options).is_ok() {
        return ops;
    }
    let mut i = 0;
    while i < ops.len() {
        let mut shorter = ops.clone();
        shorter.remove(i);
        if replay(subject, &shorter, options).is_err() {
            ops = shorter;
        } else {
            i += 1;
        }
    }
    ops
}
