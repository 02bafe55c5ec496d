//! Brute-force reference answers for small instances.
//!
//! Nothing here looks at a diagram: constraints are explicit solution sets
//! and every question is answered by enumeration.

use std::collections::BTreeSet;

use crate::error::OracleError;
use crate::mdd::Value;

/// Largest Cartesian product the oracle agrees to enumerate.
pub const DEFAULT_CAP: u128 = 1_000_000;

/// A constraint given by its solutions over `scope`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleConstraint {
    pub scope: Vec<usize>,
    pub solutions: BTreeSet<Vec<Value>>,
}

pub fn product_size(domains: &[Vec<Value>]) -> u128 {
    domains.iter().map(|d| d.len() as u128).product()
}

fn check_cap(domains: &[Vec<Value>], cap: u128) -> Result<(), OracleError> {
    let size = domains
        .iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128));
    if size > cap {
        Err(OracleError::TooLarge { size, cap })
    } else {
        Ok(())
    }
}

/// Calls `f` on every assignment of `×domains` in lexicographic order until
/// it returns false.
pub fn for_each_assignment(domains: &[Vec<Value>], mut f: impl FnMut(&[Value]) -> bool) {
    if domains.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; domains.len()];
    let mut cur: Vec<Value> = domains.iter().map(|d| d[0]).collect();
    loop {
        if !f(&cur) {
            return;
        }
        let mut i = domains.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < domains[i].len() {
                cur[i] = domains[i][idx[i]];
                break;
            }
            idx[i] = 0;
            cur[i] = domains[i][0];
        }
    }
}

fn within(t: &[Value], domains: &[Vec<Value>]) -> bool {
    t.len() == domains.len() && t.iter().zip(domains).all(|(v, d)| d.contains(v))
}

/// For each variable, the values taken by some solution inside `domains`.
pub fn valid_domains(solutions: &BTreeSet<Vec<Value>>, domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out = vec![BTreeSet::new(); domains.len()];
    for t in solutions.iter().filter(|t| within(t, domains)) {
        for (i, &v) in t.iter().enumerate() {
            out[i].insert(v);
        }
    }
    out.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Solutions that lie inside `domains`.
pub fn restrict(solutions: &BTreeSet<Vec<Value>>, domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    solutions
        .iter()
        .filter(|t| within(t, domains))
        .cloned()
        .collect()
}

/// True when every assignment of `×domains` is a solution. Vacuously true
/// when a domain is empty.
pub fn entailed(
    solutions: &BTreeSet<Vec<Value>>,
    domains: &[Vec<Value>],
    cap: u128,
) -> Result<bool, OracleError> {
    check_cap(domains, cap)?;
    let mut all = true;
    for_each_assignment(domains, |a| {
        all = solutions.contains(a);
        all
    });
    Ok(all)
}

/// First assignment of `×domains`, in lexicographic order, that satisfies
/// every constraint.
pub fn solve(
    domains: &[Vec<Value>],
    constraints: &[TupleConstraint],
    cap: u128,
) -> Result<Option<Vec<Value>>, OracleError> {
    check_cap(domains, cap)?;
    let mut found = None;
    for_each_assignment(domains, |a| {
        let ok = constraints.iter().all(|c| {
            let proj: Vec<Value> = c.scope.iter().map(|&i| a[i]).collect();
            c.solutions.contains(&proj)
        });
        if ok {
            found = Some(a.to_vec());
        }
        !ok
    });
    Ok(found)
}
