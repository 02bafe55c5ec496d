use super::*;
use crate::families::{example, example_domains};
use crate::PropagatorError;

fn checked() -> PropagatorConfig {
    PropagatorConfig {
        validate_invariants: true,
        ..PropagatorConfig::default()
    }
}

fn example_state() -> PropagatorState {
    PropagatorState::new(&example(), &example_domains(), checked()).unwrap()
}

/// The layer-1 node whose only edge is value 3 to the terminal.
fn node_a(p: &PropagatorState) -> NodeId {
    let t = p.terminal();
    (0..p.nodes.len() - 1)
        .find(|&u| p.is_live(u) && p.layer(u) == 1 && p.children(u) == vec![(3, t)])
        .unwrap()
}

#[test]
fn initial_state_of_example() {
    let p = example_state();
    assert_eq!(
        p.valid_domains().unwrap(),
        vec![vec![1, 2, 3, 4], vec![1, 2, 3]]
    );
    assert_eq!(p.skipped_intervals(), vec![((1, 1), 1)]);
    assert!(!p.is_skipped(0));
    assert!(p.is_skipped(1));
    assert_eq!(p.live_node_count(), 4);
    assert_eq!(p.live_edge_count(), 6);
    assert_eq!(p.layer_counts(), vec![1, 2, 1]);
    assert_eq!(p.shadow_domain(1), vec![1, 3]);
}

#[test]
fn initial_domains_restrict() {
    let p = PropagatorState::new(&example(), &[vec![4], vec![1, 2, 3]], checked()).unwrap();
    assert_eq!(p.valid_domains().unwrap(), vec![vec![4], vec![1, 2, 3]]);
    assert!(p.is_domain_entailed().unwrap());
}

#[test]
fn empty_initial_domain_fails() {
    let mut p = PropagatorState::new(&example(), &[vec![1, 2, 3, 4], vec![]], checked()).unwrap();
    assert!(p.is_failed());
    assert_eq!(p.valid_domains(), Err(PropagatorError::Failed));
    assert_eq!(p.remove(&[(0, 1)]), Err(PropagatorError::Failed));
    assert_eq!(p.backtrack(), Err(PropagatorError::NoOpenPhase));
}

#[test]
fn foreign_initial_value_is_rejected() {
    let err = PropagatorState::new(&example(), &[vec![1, 9], vec![1]], checked()).unwrap_err();
    assert!(matches!(err, PropagatorError::BadDomains(_)));
    let err = PropagatorState::new(&example(), &[vec![1]], checked()).unwrap_err();
    assert!(matches!(err, PropagatorError::BadDomains(_)));
}

#[test]
fn removing_a_value_cascades_through_a_node() {
    let mut p = example_state();
    let out = p.remove(&[(1, 3)]).unwrap();
    assert_eq!(out, Propagation::Consistent(vec![(0, 1), (0, 3)]));
    assert_eq!(p.valid_domains().unwrap(), vec![vec![2, 4], vec![1, 2]]);
    assert!(p.is_skipped(1));
    assert_eq!(p.live_node_count(), 3);
}

#[test]
fn removing_the_long_edge_exposes_the_layer() {
    let mut p = example_state();
    let out = p.remove(&[(0, 4)]).unwrap();
    assert_eq!(out, Propagation::Consistent(vec![(1, 2)]));
    assert_eq!(p.skip_count(1, 1), 0);
    assert!(p.skipped_intervals().is_empty());
    assert!(!p.is_skipped(1));
    assert_eq!(p.valid_domains().unwrap(), vec![vec![1, 2, 3], vec![1, 3]]);
}

#[test]
fn empty_removal_changes_nothing() {
    let mut p = example_state();
    let before = p.snapshot();
    assert_eq!(p.remove(&[]).unwrap(), Propagation::Consistent(vec![]));
    assert_eq!(p.snapshot(), before);
}

#[test]
fn absent_values_are_ignored() {
    let mut p = example_state();
    p.remove(&[(1, 3)]).unwrap();
    let before = p.snapshot();
    assert_eq!(
        p.remove(&[(1, 3), (0, 1), (0, 99)]).unwrap(),
        Propagation::Consistent(vec![])
    );
    assert_eq!(p.snapshot(), before);
    assert_eq!(
        p.remove(&[(5, 1)]),
        Err(PropagatorError::VariableOutOfRange(5))
    );
}

#[test]
fn remove_edge_cascades_upwards() {
    let mut p = example_state();
    let a = node_a(&p);
    let root = p.root().unwrap();
    let t = p.terminal();
    let out = p.remove_edge(a, t, 3).unwrap();
    assert!(!p.is_live(a));
    assert_eq!(out, Propagation::Consistent(vec![(0, 1), (0, 3)]));
    assert_eq!(p.children(root).len(), 2);
    assert_eq!(p.valid_domains().unwrap(), vec![vec![2, 4], vec![1, 2, 3]]);
    assert_eq!(p.shadow_domain(1), vec![1]);
}

#[test]
fn remove_edge_drops_the_interval() {
    let mut p = example_state();
    let root = p.root().unwrap();
    let t = p.terminal();
    assert_eq!(p.skip_count(1, 1), 1);
    p.remove_edge(root, t, 4).unwrap();
    assert_eq!(p.skip_count(1, 1), 0);
    assert_eq!(p.valid_domains().unwrap(), vec![vec![1, 2, 3], vec![1, 3]]);
    let missing = p.remove_edge(root, t, 4).unwrap_err();
    assert!(matches!(missing, PropagatorError::NoSuchEdge { .. }));
}

#[test]
fn parallel_support_keeps_a_value() {
    let domains = vec![vec![1, 2, 3], vec![1, 2, 3]];
    let tuples = vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 3]];
    let mdd = Mdd::from_tuples(domains.clone(), &tuples).unwrap();
    let mut p = PropagatorState::new(&mdd, &domains, checked()).unwrap();
    let t = p.terminal();
    let root = p.root().unwrap();
    let (_, a) = p.children(root)[0];
    p.remove_edge(a, t, 1).unwrap();
    assert_eq!(p.shadow_domain(1), vec![1, 2, 3]);
    assert_eq!(p.valid_domains().unwrap(), vec![vec![1, 2], vec![1, 2, 3]]);
}

#[test]
fn assign_examples() {
    let mut p = example_state();
    p.assign(0, 4).unwrap();
    assert_eq!(p.valid_domains().unwrap(), vec![vec![4], vec![1, 2, 3]]);

    let mut p = example_state();
    let out = p.assign(1, 2).unwrap();
    assert_eq!(out.newly_removed(), &[(0, 1), (0, 2), (0, 3)]);
    assert_eq!(p.valid_domains().unwrap(), vec![vec![4], vec![2]]);

    let before = p.snapshot();
    assert_eq!(p.assign(1, 2).unwrap(), Propagation::Consistent(vec![]));
    assert_eq!(p.snapshot(), before);
    assert!(matches!(
        p.assign(1, 3),
        Err(PropagatorError::ValueNotInDomain { var: 1, value: 3 })
    ));
}

#[test]
fn wipe_out_is_reported_and_undone() {
    let mut p = example_state();
    let before = p.snapshot();
    p.push_phase();
    assert_eq!(
        p.remove(&[(1, 1), (1, 2), (1, 3)]).unwrap(),
        Propagation::Failed
    );
    assert!(p.is_failed());
    p.backtrack().unwrap();
    assert!(!p.is_failed());
    assert_eq!(p.snapshot(), before);
}

#[test]
fn backtrack_restores_exactly() {
    let mut p = example_state();
    let s0 = p.snapshot();
    let v0 = p.valid_domains().unwrap();
    p.push_phase();
    p.remove(&[(1, 3)]).unwrap();
    let s1 = p.snapshot();
    p.push_phase();
    p.assign(0, 4).unwrap();
    p.backtrack().unwrap();
    assert_eq!(p.snapshot(), s1);
    p.backtrack().unwrap();
    assert_eq!(p.snapshot(), s0);
    assert_eq!(p.valid_domains().unwrap(), v0);
    assert!(structural_equal(&p.live_mdd(), &example()));
    assert_eq!(p.backtrack(), Err(PropagatorError::NoOpenPhase));
}

#[test]
fn live_mdd_tracks_the_restriction() {
    let mut p = example_state();
    p.remove(&[(1, 3)]).unwrap();
    let live = p.live_mdd();
    let sols: Vec<Vec<Value>> = live.enumerate_solutions(None).into_iter().collect();
    assert_eq!(sols, vec![vec![2, 1], vec![4, 1], vec![4, 2]]);
}

#[test]
fn failed_diagram_gives_failed_state() {
    let mdd = Mdd::new_failed(vec![vec![1, 2]]);
    let p = PropagatorState::new(&mdd, &[vec![1, 2]], checked()).unwrap();
    assert!(p.is_failed());
    assert_eq!(p.root(), None);
}

#[test]
fn unreduced_input_is_reduced_first() {
    let d = vec![vec![1, 2], vec![1, 2]];
    // x0 free, x1 = 1, spelled out with two identical nodes
    let mdd = Mdd::from_parts(
        d.clone(),
        vec![
            (0, vec![(1, 1), (2, 2)]),
            (1, vec![(1, 3)]),
            (1, vec![(1, 3)]),
            (2, vec![]),
        ],
        0,
        3,
    )
    .unwrap();
    let p = PropagatorState::new(&mdd, &d, checked()).unwrap();
    assert_eq!(p.initial_node_count(), 2);
    assert_eq!(p.live_node_count(), 1);
    assert_eq!(p.valid_domains().unwrap(), vec![vec![1, 2], vec![1]]);
}

#[test]
fn redirect_bound_is_log_of_nodes() {
    assert_eq!(ceil_log2(1), 0);
    assert_eq!(ceil_log2(2), 1);
    assert_eq!(ceil_log2(4), 2);
    assert_eq!(ceil_log2(5), 3);
    assert_eq!(example_state().redirect_bound(), 2);
}
