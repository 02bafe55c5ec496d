//! In-place reduction of the diagram during search.
//!
//! Nodes whose outgoing edges changed are queued as dirty. After each
//! propagation the queue is drained from the deepest layer upwards: a dirty
//! node that duplicates another node of its layer is merged into it, and,
//! with full reduction on, a node sending the whole current domain of its
//! layer to one child is replaced by long edges to that child. Both steps
//! only touch the parents of the node, which sit on earlier layers, so one
//! bottom-up sweep reaches a fixpoint.
//!
//! Duplicates are found through a 128-bit additive signature of each node's
//! layer and `(value, child)` pairs, kept up to date edge by edge; a match is
//! always confirmed by comparing the edges themselves.

mod signature;
mod tables;

pub use signature::DEFAULT_HASH_SEED;
pub(crate) use signature::{NodeHash, SignatureKeys};
pub(crate) use tables::{ReductionTables, TablesView};

use crate::error::PropagatorError;
use crate::propagator::trail::Undo;
use crate::propagator::PropagatorState;

impl PropagatorState {
    pub(crate) fn mark_dirty(&mut self, u: u32) {
        if self.indexed(u) && !self.in_dirty[u as usize] {
            self.in_dirty[u as usize] = true;
            self.dirty[self.nodes[u as usize].layer as usize].push(u);
        }
    }

    /// Drains the dirty queue. `changed` flags the variables whose domain
    /// shrank during this propagation.
    pub(crate) fn reduce(&mut self, changed: &[bool]) {
        if self.config.full_reduce {
            for (layer, _) in changed.iter().enumerate().filter(|(_, &c)| c) {
                let layer = layer as u32;
                for u in self
                    .tables
                    .same_child(layer, self.dom.signature[layer as usize])
                {
                    self.mark_dirty(u);
                }
            }
        }
        for layer in (0..self.n).rev() {
            while let Some(u) = self.dirty[layer].pop() {
                self.in_dirty[u as usize] = false;
                if !self.nodes[u as usize].live {
                    continue;
                }
                if self.config.full_reduce && self.collapsible(u) {
                    self.collapse(u);
                } else {
                    let mut keep = u;
                    while let Some(q) = self.find_duplicate(keep) {
                        keep = self.merge_nodes(keep, q);
                    }
                }
            }
        }
    }

    /// True when every edge of `u` leads to the same child and the edge
    /// values are exactly the current domain of its layer.
    pub(crate) fn collapsible(&self, u: u32) -> bool {
        let node = &self.nodes[u as usize];
        let layer = node.layer;
        node.hash.single_child()
            && node.hash.degree == self.dom.size(layer)
            && node.hash.values == self.dom.signature[layer as usize]
            && node
                .children
                .iter()
                .all(|&e| self.dom.contains(layer, self.edges[e as usize].label))
    }

    /// Replaces `u` by long edges from each of its parents to its only child.
    pub(crate) fn collapse(&mut self, u: u32) {
        let child = self.edges[self.nodes[u as usize].children[0] as usize].dst;
        self.stats.collapses += 1;
        self.bump_reduce_work();
        while let Some(&e) = self.nodes[u as usize].parents.last() {
            let p = self.edges[e as usize].src;
            self.retarget(e, child);
            self.mark_dirty(p);
        }
        self.kill_node(u);
        while let Some(&e) = self.nodes[u as usize].children.last() {
            self.detach_edge(e);
        }
    }

    /// Another live node of the same layer with exactly the same edges.
    pub(crate) fn find_duplicate(&self, u: u32) -> Option<u32> {
        let node = &self.nodes[u as usize];
        let mut mine = self.edge_set(u);
        mine.sort_unstable();
        self.tables.matching(node.hash.sig).find(|&q| {
            if q == u
                || self.nodes[q as usize].layer != node.layer
                || self.nodes[q as usize].hash != node.hash
            {
                return false;
            }
            let mut theirs = self.edge_set(q);
            theirs.sort_unstable();
            mine == theirs
        })
    }

    fn edge_set(&self, u: u32) -> Vec<(u32, u32)> {
        self.nodes[u as usize]
            .children
            .iter()
            .map(|&e| (self.edges[e as usize].label, self.edges[e as usize].dst))
            .collect()
    }

    /// Merges two equivalent nodes. The one with more parents survives,
    /// the smaller id on a tie; the other's parents are redirected to it and
    /// its own edges dropped without further propagation. Returns the
    /// survivor.
    pub(crate) fn merge_nodes(&mut self, u: u32, q: u32) -> u32 {
        let (pu, pq) = (
            self.nodes[u as usize].parents.len(),
            self.nodes[q as usize].parents.len(),
        );
        let (keep, gone) = if pu > pq || (pu == pq && u < q) {
            (u, q)
        } else {
            (q, u)
        };
        self.stats.merges += 1;
        self.bump_reduce_work();
        while let Some(&e) = self.nodes[gone as usize].parents.last() {
            let p = self.edges[e as usize].src;
            self.retarget(e, keep);
            let slot = &mut self.edges[e as usize];
            slot.redirects += 1;
            let count = slot.redirects;
            self.trail.push(Undo::EdgeRedirected(e));
            self.stats.redirects += 1;
            self.stats.max_edge_redirects = self.stats.max_edge_redirects.max(count);
            if count > self.redirect_bound {
                self.stats.redirect_violations += 1;
            }
            self.bump_reduce_work();
            self.mark_dirty(p);
        }
        self.kill_node(gone);
        while let Some(&e) = self.nodes[gone as usize].children.last() {
            self.detach_edge(e);
        }
        keep
    }

    fn bump_reduce_work(&mut self) {
        self.branch_reduce_work += 1;
        self.trail.push(Undo::BranchReduceWork);
    }

    /// True when every assignment over the current domains satisfies the
    /// constraint.
    ///
    /// With full reduction the diagram of such a constraint is the terminal
    /// alone, which is a constant-time test. Without it, duplicate-free
    /// diagrams can still differ from the terminal, so the test walks the
    /// live graph once: a node covers its layer when every current value of
    /// the layer has an edge into a node that covers the rest.
    pub fn is_domain_entailed(&self) -> Result<bool, PropagatorError> {
        if self.failed {
            return Err(PropagatorError::Failed);
        }
        let root = self.root().expect("live constraint has a root") as u32;
        if self.config.full_reduce {
            return Ok(root == self.terminal);
        }
        Ok(self.covers_all(root))
    }

    pub(crate) fn covers_all(&self, root: u32) -> bool {
        let mut memo: Vec<Option<bool>> = vec![None; self.nodes.len()];
        memo[self.terminal as usize] = Some(true);
        let mut stack = vec![root];
        while let Some(&u) = stack.last() {
            if memo[u as usize].is_some() {
                stack.pop();
                continue;
            }
            let node = &self.nodes[u as usize];
            let pending: Vec<u32> = node
                .children
                .iter()
                .map(|&e| self.edges[e as usize].dst)
                .filter(|&c| memo[c as usize].is_none())
                .collect();
            if !pending.is_empty() {
                stack.extend(pending);
                continue;
            }
            let covered: usize = node
                .children
                .iter()
                .filter(|&&e| {
                    let slot = &self.edges[e as usize];
                    self.dom.contains(node.layer, slot.label)
                        && memo[slot.dst as usize] == Some(true)
                })
                .count();
            memo[u as usize] = Some(covered == self.dom.size(node.layer) as usize);
            stack.pop();
        }
        memo[root as usize] == Some(true)
    }

    /// True when no layer holds more than one live node, the shape the
    /// diagram of an entailed constraint takes once reduced.
    pub fn is_path_shaped(&self) -> bool {
        self.crowded_layers == 0
    }
}

#[cfg(test)]
mod tests;
