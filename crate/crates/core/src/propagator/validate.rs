use std::collections::{BTreeSet, HashMap};

use super::domain::DomainStore;
use super::graph::{EdgeSlot, NodeSlot, NONE};
use super::skip::SkipTracker;
use super::PropagatorState;
use crate::dyn_reduce::{NodeHash, ReductionTables, TablesView};
use crate::error::PropagatorError;

/// Deep copy of every structure that backtracking must restore.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSnapshot {
    nodes: Vec<NodeSlot>,
    edges: Vec<EdgeSlot>,
    support_heads: Vec<u32>,
    skip: SkipTracker,
    dom: DomainStore,
    tables: TablesView,
    layer_counts: Vec<u32>,
    crowded_layers: u32,
    live_nodes: u32,
    live_edges: u32,
    failed: bool,
    branch_edge_removals: u64,
    branch_reduce_work: u64,
    trail_len: usize,
    phase_depth: usize,
}

impl PropagatorState {
    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            support_heads: self.support.heads.clone(),
            skip: self.skip.clone(),
            dom: self.dom.clone(),
            tables: self.tables.view(),
            layer_counts: self.layer_counts.clone(),
            crowded_layers: self.crowded_layers,
            live_nodes: self.live_nodes,
            live_edges: self.live_edges,
            failed: self.failed,
            branch_edge_removals: self.branch_edge_removals,
            branch_reduce_work: self.branch_reduce_work,
            trail_len: self.trail.len(),
            phase_depth: self.trail.depth(),
        }
    }

    /// Rescans every structure and compares it with what the incremental
    /// bookkeeping claims.
    pub fn check_invariants(&self) -> Result<(), PropagatorError> {
        self.check_all()
            .map_err(PropagatorError::InvariantViolation)
    }

    fn check_all(&self) -> Result<(), String> {
        self.check_adjacency()?;
        self.check_support()?;
        self.check_skips()?;
        self.check_signatures()?;
        self.check_domains()?;
        if !self.failed {
            self.check_reduced()?;
        }
        if self.dirty.iter().any(|b| !b.is_empty()) || self.in_dirty.iter().any(|&d| d) {
            return Err("dirty queue not drained".into());
        }
        Ok(())
    }

    fn check_adjacency(&self) -> Result<(), String> {
        let mut counts = vec![0u32; self.n + 1];
        let mut live_edges = 0;
        for (e, slot) in self.edges.iter().enumerate() {
            let e = e as u32;
            let listed_child = self.nodes[slot.src as usize]
                .children
                .get(slot.child_pos as usize)
                == Some(&e);
            let listed_parent = self.nodes[slot.dst as usize]
                .parents
                .get(slot.parent_pos as usize)
                == Some(&e);
            if !slot.live {
                if self.nodes[slot.src as usize].children.contains(&e)
                    || self.nodes[slot.dst as usize].parents.contains(&e)
                {
                    return Err(format!("dead edge {e} still listed"));
                }
                continue;
            }
            if !listed_child || !listed_parent {
                return Err(format!("edge {e} misplaced in adjacency lists"));
            }
            if !self.nodes[slot.src as usize].live || !self.nodes[slot.dst as usize].live {
                return Err(format!("live edge {e} touches a dead node"));
            }
            if slot.src != self.top {
                live_edges += 1;
                let sl = self.nodes[slot.src as usize].layer;
                if sl >= self.nodes[slot.dst as usize].layer {
                    return Err(format!("edge {e} does not go downwards"));
                }
                if !self.dom.contains(sl, slot.label) {
                    return Err(format!(
                        "edge {e} carries a value outside the current domain"
                    ));
                }
            }
        }
        if live_edges != self.live_edges {
            return Err("live edge counter is stale".into());
        }
        for (u, node) in self.nodes.iter().enumerate() {
            let u = u as u32;
            if !node.live || u == self.top {
                if u != self.top && (!node.children.is_empty() || !node.parents.is_empty()) {
                    return Err(format!("dead node {u} still has edges"));
                }
                continue;
            }
            counts[node.layer as usize] += 1;
            if u != self.terminal && node.children.is_empty() {
                return Err(format!("node {u} has no children"));
            }
            if node.parents.is_empty() && !(u == self.terminal && self.failed) {
                return Err(format!("node {u} has no parents"));
            }
            let labels: BTreeSet<u32> = node
                .children
                .iter()
                .map(|&e| self.edges[e as usize].label)
                .collect();
            if labels.len() != node.children.len() {
                return Err(format!("node {u} has two edges with one value"));
            }
        }
        if counts != self.layer_counts {
            return Err("layer counts are stale".into());
        }
        if self.live_nodes != counts.iter().sum::<u32>() {
            return Err("live node counter is stale".into());
        }
        if self.crowded_layers != counts.iter().filter(|&&c| c > 1).count() as u32 {
            return Err("crowded layer counter is stale".into());
        }
        Ok(())
    }

    fn check_support(&self) -> Result<(), String> {
        for layer in 0..self.n as u32 {
            for label in 0..self.domains[layer as usize].len() as u32 {
                let listed: BTreeSet<u32> = self.support.iter(&self.edges, layer, label).collect();
                let mut prev = NONE;
                for e in self.support.iter(&self.edges, layer, label) {
                    if self.edges[e as usize].sup_prev != prev {
                        return Err(format!(
                            "support list ({layer},{label}) has a broken back link"
                        ));
                    }
                    prev = e;
                }
                let expected: BTreeSet<u32> = self
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| {
                        s.live
                            && s.src != self.top
                            && s.label == label
                            && self.nodes[s.src as usize].layer == layer
                    })
                    .map(|(e, _)| e as u32)
                    .collect();
                if listed != expected {
                    return Err(format!(
                        "support list ({layer},{label}) disagrees with live edges"
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_skips(&self) -> Result<(), String> {
        let n = self.skip.n();
        let mut expected = vec![0u32; n * n];
        for s in self.edges.iter().filter(|s| s.live) {
            if let Some((start, end)) = self.skipped_by(s.src, s.dst) {
                expected[start as usize * n + end as usize] += 1;
            }
        }
        self.skip.check(&expected)
    }

    fn check_signatures(&self) -> Result<(), String> {
        let mut tables = ReductionTables::default();
        for (u, node) in self.nodes.iter().enumerate() {
            let u = u as u32;
            if !self.indexed(u) {
                continue;
            }
            let mut h = NodeHash::empty(&self.keys, node.layer);
            for &e in &node.children {
                let s = &self.edges[e as usize];
                h.add(&self.keys, node.layer, s.label, s.dst);
            }
            if h != node.hash {
                return Err(format!("signature of node {u} is stale"));
            }
            let dsts: BTreeSet<u32> = node
                .children
                .iter()
                .map(|&e| self.edges[e as usize].dst)
                .collect();
            if h.single_child() != (dsts.len() == 1) {
                return Err(format!("same-child flag of node {u} is wrong"));
            }
            tables.insert(u, node.layer, &h);
        }
        if tables.view() != self.tables.view() {
            return Err("reduction tables disagree with live nodes".into());
        }
        Ok(())
    }

    fn check_domains(&self) -> Result<(), String> {
        let fresh = DomainStore::full(
            &self.domains.iter().map(Vec::len).collect::<Vec<_>>(),
            &self.keys,
        );
        for layer in 0..self.n as u32 {
            let sig = self
                .dom
                .labels(layer)
                .fold(0u128, |acc, l| acc.wrapping_add(self.keys.value(layer, l)));
            if sig != self.dom.signature[layer as usize] || fresh.size(layer) < self.dom.size(layer)
            {
                return Err(format!("domain bookkeeping of variable {layer} is stale"));
            }
            if self.dom.labels(layer).count() != self.dom.size(layer) as usize {
                return Err(format!("domain size of variable {layer} is stale"));
            }
            if self.failed {
                continue;
            }
            if self.dom.size(layer) == 0 {
                return Err(format!("variable {layer} is empty in a live state"));
            }
            if !self.skip.is_skipped(layer as usize) {
                if let Some(l) = self
                    .dom
                    .labels(layer)
                    .find(|&l| !self.support.is_supported(layer, l))
                {
                    return Err(format!(
                        "value {l} of variable {layer} is reported without support"
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_reduced(&self) -> Result<(), String> {
        let mut seen: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
        for (u, node) in self.nodes.iter().enumerate() {
            let u = u as u32;
            if !self.indexed(u) {
                continue;
            }
            let mut set: Vec<(u32, u32)> = node
                .children
                .iter()
                .map(|&e| (self.edges[e as usize].label, self.edges[e as usize].dst))
                .collect();
            set.sort_unstable();
            if let Some(q) = seen.insert((node.layer, set), u) {
                return Err(format!("nodes {q} and {u} are duplicates"));
            }
            if self.config.full_reduce && self.collapsible(u) {
                return Err(format!("node {u} should have been collapsed"));
            }
        }
        if let Some(root) = self.root() {
            let walk = self.covers_all(root as u32);
            if self.config.full_reduce && walk != (root as u32 == self.terminal) {
                return Err("entailment flag disagrees with a full walk".into());
            }
        }
        Ok(())
    }
}
