//! Small named constraints used by tests, examples and the CLI.

use crate::mdd::{Mdd, Value};

/// Domains of the two-variable example: `{1,2,3,4}` and `{1,2,3}`.
pub fn example_domains() -> Vec<Vec<Value>> {
    vec![vec![1, 2, 3, 4], vec![1, 2, 3]]
}

/// Solutions of the two-variable example constraint.
pub fn example_tuples() -> Vec<Vec<Value>> {
    vec![
        vec![1, 3],
        vec![2, 1],
        vec![3, 3],
        vec![4, 1],
        vec![4, 2],
        vec![4, 3],
    ]
}

/// The reduced two-variable example: four nodes, a long edge on value 4.
pub fn example() -> Mdd {
    Mdd::from_tuples(example_domains(), &example_tuples()).expect("fixture is well formed")
}

/// `x0 <= x1, x0 <= x2, ..., x0 <= x(j-1)` over `j` variables with domains
/// `1..=k`.
pub fn first_is_minimum(j: usize, k: Value) -> Mdd {
    assert!(j >= 1, "need at least one variable");
    let domains = vec![(1..=k).collect::<Vec<_>>(); j];
    let mut tuples = Vec::new();
    let mut cur = vec![1; j];
    loop {
        if cur[1..].iter().all(|&x| cur[0] <= x) {
            tuples.push(cur.clone());
        }
        let mut i = j;
        loop {
            if i == 0 {
                return Mdd::from_tuples(domains, &tuples).expect("fixture is well formed");
            }
            i -= 1;
            if cur[i] < k {
                cur[i] += 1;
                break;
            }
            cur[i] = 1;
        }
    }
}
