use crate::families::{example, example_domains, first_is_minimum};
use crate::{structural_equal, Mdd, PropagatorConfig, PropagatorState, Value};

fn config(full_reduce: bool) -> PropagatorConfig {
    PropagatorConfig {
        full_reduce,
        validate_invariants: true,
        ..PropagatorConfig::default()
    }
}

/// Root with edges to `a = {1,2}` and `b = {1,3}` over layer 1; `to_a`
/// lists the root values leading to `a`, the rest lead to `b`.
fn two_branches(to_a: &[Value]) -> Mdd {
    let root_edges = (1..=4)
        .map(|v| (v, if to_a.contains(&v) { 1 } else { 2 }))
        .collect();
    Mdd::from_parts(
        vec![vec![1, 2, 3, 4], vec![1, 2, 3]],
        vec![
            (0, root_edges),
            (1, vec![(1, 3), (2, 3)]),
            (1, vec![(1, 3), (3, 3)]),
            (2, vec![]),
        ],
        0,
        3,
    )
    .unwrap()
}

fn merged_survivor(to_a: &[Value]) -> usize {
    let mdd = two_branches(to_a);
    let mut p = PropagatorState::new(&mdd, mdd.domains(), config(false)).unwrap();
    assert_eq!(p.live_node_count(), 4);
    p.remove(&[(1, 2), (1, 3)]).unwrap();
    assert_eq!(p.stats().merges, 1);
    assert_eq!(p.live_node_count(), 3);
    let survivor = if p.is_live(1) { 1 } else { 2 };
    assert_eq!(p.parents(survivor).len(), 4);
    survivor
}

#[test]
fn larger_in_degree_survives() {
    assert_eq!(merged_survivor(&[1, 2, 3]), 1);
    assert_eq!(merged_survivor(&[1]), 2);
}

#[test]
fn tie_keeps_smaller_id() {
    assert_eq!(merged_survivor(&[1, 2]), 1);
    assert_eq!(merged_survivor(&[3, 4]), 1);
}

#[test]
fn merge_counts_redirects() {
    let mdd = two_branches(&[1, 2, 3]);
    let mut p = PropagatorState::new(&mdd, mdd.domains(), config(false)).unwrap();
    p.remove(&[(1, 2), (1, 3)]).unwrap();
    assert_eq!(p.stats().redirects, 1);
    assert_eq!(p.max_edge_redirects(), 1);
    assert_eq!(p.branch_reduce_work(), 2);
}

#[test]
fn backtrack_undoes_a_merge() {
    let mdd = two_branches(&[1, 2]);
    let mut p = PropagatorState::new(&mdd, mdd.domains(), config(false)).unwrap();
    let before = p.snapshot();
    p.push_phase();
    p.remove(&[(1, 2), (1, 3)]).unwrap();
    assert_eq!(p.stats().merges, 1);
    p.backtrack().unwrap();
    assert_eq!(p.snapshot(), before);
    assert!(p.is_live(1) && p.is_live(2));
    assert_eq!(p.max_edge_redirects(), 0);
}

#[test]
fn single_variable_collapses_to_terminal() {
    let d = vec![vec![1, 2, 3]];
    let mdd = Mdd::from_tuples(d.clone(), &[vec![1], vec![2]]).unwrap();
    assert_eq!(mdd.node_count(), 2);

    let mut p = PropagatorState::new(&mdd, &d, config(false)).unwrap();
    assert_eq!(p.valid_domains().unwrap(), vec![vec![1, 2]]);
    assert_eq!(p.live_node_count(), 2);
    assert!(p.is_domain_entailed().unwrap());
    p.remove(&[(0, 2)]).unwrap();
    assert!(p.is_domain_entailed().unwrap());

    let p = PropagatorState::new(&mdd, &d, config(true)).unwrap();
    assert_eq!(p.root(), Some(p.terminal()));
    assert_eq!(p.live_node_count(), 1);
    assert_eq!(p.stats().collapses, 1);
    assert!(p.is_domain_entailed().unwrap());
}

#[test]
fn collapse_after_external_removal() {
    let d = vec![vec![1, 2, 3], vec![1, 2]];
    // x0 in {1,2} with x1 free, or x0 = 3 with x1 = 1
    let tuples = vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2], vec![3, 1]];
    let mdd = Mdd::from_tuples(d.clone(), &tuples).unwrap();
    let mut p = PropagatorState::new(&mdd, &d, config(true)).unwrap();
    assert_eq!(p.live_node_count(), 3);
    let out = p.remove(&[(0, 3)]).unwrap();
    assert!(out.newly_removed().is_empty());
    assert_eq!(p.root(), Some(p.terminal()));
    assert!(p.is_domain_entailed().unwrap());
    assert_eq!(p.valid_domains().unwrap(), vec![vec![1, 2], vec![1, 2]]);
}

#[test]
fn assignment_collapses_example_to_terminal() {
    let mut p = PropagatorState::new(&example(), &example_domains(), config(true)).unwrap();
    assert!(!p.is_domain_entailed().unwrap());
    p.assign(0, 4).unwrap();
    assert_eq!(p.root(), Some(p.terminal()));
    assert!(p.is_domain_entailed().unwrap());
    assert!(p.is_path_shaped());
}

#[test]
fn entailment_without_collapse() {
    let mut p = PropagatorState::new(&example(), &example_domains(), config(false)).unwrap();
    assert!(!p.is_domain_entailed().unwrap());
    p.assign(0, 4).unwrap();
    assert_eq!(p.live_node_count(), 2);
    assert!(p.is_domain_entailed().unwrap());
}

#[test]
fn shrink_without_matching_node_leaves_graph() {
    let mut p = PropagatorState::new(&example(), &example_domains(), config(true)).unwrap();
    p.remove(&[(0, 2)]).unwrap();
    let before = (p.live_node_count(), p.stats().collapses, p.stats().merges);
    p.remove(&[(0, 1)]).unwrap();
    assert_eq!(before.1, p.stats().collapses);
    assert_eq!(before.2, p.stats().merges);
    assert!(p.live_node_count() <= before.0);
}

#[test]
fn first_is_minimum_merges_branches() {
    let mdd = first_is_minimum(3, 3);
    let mut p = PropagatorState::new(&mdd, mdd.domains(), config(true)).unwrap();
    let before = p.live_node_count();
    p.remove(&[(1, 1), (2, 1)]).unwrap();
    let after = p.live_node_count();
    assert!(after < before, "{before} -> {after}");
    let doms = p.valid_domains().unwrap();
    let sols: Vec<Vec<Value>> = mdd.enumerate_solutions(Some(&doms)).into_iter().collect();
    let rebuilt = Mdd::from_tuples(doms, &sols).unwrap();
    assert!(structural_equal(&p.live_mdd(), &rebuilt));
}
