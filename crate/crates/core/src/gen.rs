//! Random table constraints for property tests and the checker.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::mdd::{Mdd, Value};
use crate::oracle::for_each_assignment;

/// Shape of generated tables.
#[derive(Clone, Debug)]
pub struct TableShape {
    pub vars: RangeInclusive<usize>,
    pub domain_size: RangeInclusive<usize>,
    /// Each assignment is kept with a probability drawn from this range.
    pub density: RangeInclusive<f64>,
    /// Values are drawn from `0..=max_value`.
    pub max_value: Value,
}

impl Default for TableShape {
    fn default() -> Self {
        TableShape {
            vars: 2..=6,
            domain_size: 2..=5,
            density: 0.1..=0.9,
            max_value: 9,
        }
    }
}

/// A table constraint with its domains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableInstance {
    pub domains: Vec<Vec<Value>>,
    pub tuples: Vec<Vec<Value>>,
}

impl TableInstance {
    pub fn mdd(&self) -> Mdd {
        Mdd::from_tuples(self.domains.clone(), &self.tuples)
            .expect("generated tuples fit their domains")
    }

    pub fn solutions(&self) -> BTreeSet<Vec<Value>> {
        self.tuples.iter().cloned().collect()
    }
}

/// Draws a non-empty random table of the given shape.
pub fn random_table<R: Rng>(rng: &mut R, shape: &TableShape) -> TableInstance {
    let n = rng.gen_range(shape.vars.clone());
    let pool: Vec<Value> = (0..=shape.max_value).collect();
    let domains: Vec<Vec<Value>> = (0..n)
        .map(|_| {
            let d = rng.gen_range(shape.domain_size.clone()).min(pool.len());
            let mut values: Vec<Value> = pool.choose_multiple(rng, d).copied().collect();
            values.sort_unstable();
            values
        })
        .collect();
    let density = rng.gen_range(shape.density.clone());
    let mut tuples = Vec::new();
    for_each_assignment(&domains, |a| {
        if rng.gen_bool(density) {
            tuples.push(a.to_vec());
        }
        true
    });
    if tuples.is_empty() {
        tuples.push(domains.iter().map(|d| *d.choose(rng).unwrap()).collect());
    }
    TableInstance { domains, tuples }
}
