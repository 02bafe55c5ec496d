//! Mutable adjacency of the diagram under search, with trailed primitives.
//!
//! Child and parent lists are unordered vectors; every edge records its
//! position in both so removal is a swap-remove. Undoing a swap-remove puts
//! both the removed edge and the displaced one back where they were.

use super::trail::Undo;
use super::PropagatorState;
use crate::dyn_reduce::NodeHash;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct EdgeSlot {
    pub(crate) src: u32,
    pub(crate) dst: u32,
    /// Index into the compile-time domain of the source layer; `NONE` on the
    /// entry edge.
    pub(crate) label: u32,
    pub(crate) live: bool,
    pub(crate) sup_prev: u32,
    pub(crate) sup_next: u32,
    pub(crate) child_pos: u32,
    pub(crate) parent_pos: u32,
    pub(crate) redirects: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct NodeSlot {
    pub(crate) layer: u32,
    pub(crate) live: bool,
    pub(crate) children: Vec<u32>,
    pub(crate) parents: Vec<u32>,
    pub(crate) hash: NodeHash,
}

#[derive(Clone, Copy)]
enum Side {
    Child,
    Parent,
}

impl PropagatorState {
    /// Layers skipped by an edge from `src` to `dst`, if it is long. The
    /// entry node sits above layer 0, so its edge skips everything before
    /// the root.
    pub(crate) fn skipped_by(&self, src: u32, dst: u32) -> Option<(u32, u32)> {
        let start = if src == self.top {
            0
        } else {
            self.nodes[src as usize].layer + 1
        };
        let dl = self.nodes[dst as usize].layer;
        (dl > start).then(|| (start, dl - 1))
    }

    /// Nodes that take part in signature tables.
    #[inline]
    pub(crate) fn indexed(&self, u: u32) -> bool {
        u != self.top && u != self.terminal && self.nodes[u as usize].live
    }

    pub(crate) fn set_hash(&mut self, u: u32, hash: NodeHash) {
        let layer = self.nodes[u as usize].layer;
        let old = self.nodes[u as usize].hash;
        let indexed = self.indexed(u);
        if indexed {
            self.tables.remove(u, layer, &old);
        }
        self.trail.push(Undo::NodeHash { node: u, old });
        self.nodes[u as usize].hash = hash;
        if indexed {
            self.tables.insert(u, layer, &hash);
        }
    }

    fn detach(&mut self, side: Side, u: u32, e: u32) {
        let pos = match side {
            Side::Child => self.edges[e as usize].child_pos,
            Side::Parent => self.edges[e as usize].parent_pos,
        };
        let node = &mut self.nodes[u as usize];
        let list = match side {
            Side::Child => &mut node.children,
            Side::Parent => &mut node.parents,
        };
        debug_assert_eq!(list[pos as usize], e);
        list.swap_remove(pos as usize);
        if let Some(&moved) = list.get(pos as usize) {
            match side {
                Side::Child => self.edges[moved as usize].child_pos = pos,
                Side::Parent => self.edges[moved as usize].parent_pos = pos,
            }
        }
        self.trail.push(match side {
            Side::Child => Undo::ChildRemoved {
                node: u,
                edge: e,
                pos,
            },
            Side::Parent => Undo::ParentRemoved {
                node: u,
                edge: e,
                pos,
            },
        });
    }

    fn reattach(&mut self, side: Side, u: u32, e: u32, pos: u32) {
        let node = &mut self.nodes[u as usize];
        let list = match side {
            Side::Child => &mut node.children,
            Side::Parent => &mut node.parents,
        };
        if pos as usize == list.len() {
            list.push(e);
        } else {
            let moved = list[pos as usize];
            list.push(moved);
            list[pos as usize] = e;
            let end = (list.len() - 1) as u32;
            match side {
                Side::Child => self.edges[moved as usize].child_pos = end,
                Side::Parent => self.edges[moved as usize].parent_pos = end,
            }
        }
        match side {
            Side::Child => self.edges[e as usize].child_pos = pos,
            Side::Parent => self.edges[e as usize].parent_pos = pos,
        }
    }

    fn push_parent(&mut self, c: u32, e: u32) {
        let parents = &mut self.nodes[c as usize].parents;
        parents.push(e);
        self.edges[e as usize].parent_pos = (parents.len() - 1) as u32;
        self.trail.push(Undo::ParentPushed { node: c });
    }

    /// Removes a live edge from every structure: its support list, both
    /// adjacency lists, the skip counters and the source signature. Returns
    /// true when the edge was the last support of its `(layer, value)`.
    pub(crate) fn detach_edge(&mut self, e: u32) -> bool {
        let EdgeSlot {
            src, dst, label, ..
        } = self.edges[e as usize];
        let mut emptied = false;
        if src != self.top {
            let layer = self.nodes[src as usize].layer;
            emptied = self.support.unlink(&mut self.edges, e, layer);
            self.trail.push(Undo::SupportUnlinked(e));
        }
        self.detach(Side::Child, src, e);
        self.detach(Side::Parent, dst, e);
        if let Some((start, end)) = self.skipped_by(src, dst) {
            self.skip.decrement(start, end, &mut self.trail);
        }
        self.edges[e as usize].live = false;
        if src != self.top {
            self.live_edges -= 1;
        }
        self.trail.push(Undo::EdgeKilled(e));
        if src != self.top {
            let layer = self.nodes[src as usize].layer;
            let mut h = self.nodes[src as usize].hash;
            h.remove(&self.keys, layer, label, dst);
            self.set_hash(src, h);
        }
        emptied
    }

    /// Points edge `e` at a new destination, keeping its source, value and
    /// support-list cell. Skip counters follow the change in span.
    pub(crate) fn retarget(&mut self, e: u32, to: u32) {
        let EdgeSlot {
            src,
            dst: from,
            label,
            ..
        } = self.edges[e as usize];
        let same_span = self.nodes[from as usize].layer == self.nodes[to as usize].layer;
        if !same_span {
            if let Some((start, end)) = self.skipped_by(src, from) {
                self.skip.decrement(start, end, &mut self.trail);
            }
        }
        self.detach(Side::Parent, from, e);
        self.edges[e as usize].dst = to;
        self.trail.push(Undo::EdgeRetargeted { edge: e, old: from });
        self.push_parent(to, e);
        if !same_span {
            if let Some((start, end)) = self.skipped_by(src, to) {
                self.skip.increment(start, end, &mut self.trail);
            }
        }
        if src != self.top {
            let layer = self.nodes[src as usize].layer;
            let mut h = self.nodes[src as usize].hash;
            h.remove(&self.keys, layer, label, from);
            h.add(&self.keys, layer, label, to);
            self.set_hash(src, h);
        }
    }

    pub(crate) fn kill_node(&mut self, u: u32) {
        debug_assert!(self.nodes[u as usize].live);
        let layer = self.nodes[u as usize].layer;
        if self.indexed(u) {
            let h = self.nodes[u as usize].hash;
            self.tables.remove(u, layer, &h);
        }
        self.nodes[u as usize].live = false;
        self.adjust_layer_count(layer, -1);
        self.trail.push(Undo::NodeKilled(u));
    }

    fn adjust_layer_count(&mut self, layer: u32, delta: i32) {
        let count = &mut self.layer_counts[layer as usize];
        let before = *count;
        *count = (*count as i64 + delta as i64) as u32;
        self.live_nodes = (self.live_nodes as i64 + delta as i64) as u32;
        match (before > 1, *count > 1) {
            (true, false) => self.crowded_layers -= 1,
            (false, true) => self.crowded_layers += 1,
            _ => {}
        }
    }

    pub(crate) fn undo(&mut self, undo: Undo) {
        match undo {
            Undo::SupportUnlinked(e) => {
                let layer = self.nodes[self.edges[e as usize].src as usize].layer;
                self.support.relink(&mut self.edges, e, layer);
            }
            Undo::ChildRemoved { node, edge, pos } => self.reattach(Side::Child, node, edge, pos),
            Undo::ParentRemoved { node, edge, pos } => self.reattach(Side::Parent, node, edge, pos),
            Undo::ParentPushed { node } => {
                self.nodes[node as usize].parents.pop();
            }
            Undo::EdgeKilled(e) => {
                self.edges[e as usize].live = true;
                if self.edges[e as usize].src != self.top {
                    self.live_edges += 1;
                }
            }
            Undo::EdgeRetargeted { edge, old } => self.edges[edge as usize].dst = old,
            Undo::EdgeRedirected(e) => self.edges[e as usize].redirects -= 1,
            Undo::NodeKilled(u) => {
                let layer = self.nodes[u as usize].layer;
                self.nodes[u as usize].live = true;
                self.adjust_layer_count(layer, 1);
                if self.indexed(u) {
                    let h = self.nodes[u as usize].hash;
                    self.tables.insert(u, layer, &h);
                }
            }
            Undo::NodeHash { node, old } => {
                let layer = self.nodes[node as usize].layer;
                let indexed = self.indexed(node);
                if indexed {
                    let cur = self.nodes[node as usize].hash;
                    self.tables.remove(node, layer, &cur);
                }
                self.nodes[node as usize].hash = old;
                if indexed {
                    self.tables.insert(node, layer, &old);
                }
            }
            Undo::SkipCount { .. }
            | Undo::HeapPushed { .. }
            | Undo::HeapPopped { .. }
            | Undo::HeapSwapped { .. }
            | Undo::Skipped { .. } => self.skip.undo(undo),
            Undo::DomainRemoved { var, label } => self.dom.restore(var, label, &self.keys),
            Undo::Failed => self.failed = false,
            Undo::BranchEdgeRemoval => self.branch_edge_removals -= 1,
            Undo::BranchReduceWork => self.branch_reduce_work -= 1,
        }
    }
}
