//! Layered multi-valued decision diagrams.
//!
//! Variables are indexed from 0. Variable `i` is decided at layer `i` and the
//! terminal lives at layer `n`. An edge from layer `s` to layer `d > s + 1` is
//! a long edge: it accepts every domain value of the layers it skips. A root
//! placed below layer 0 likewise leaves the earlier variables unconstrained.
//!
//! Edge labels are stored as indices into the sorted compile-time domain of
//! the source layer.

mod build;
mod conjoin;
mod reduce;
mod solutions;
mod text;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::MddError;

pub use build::at_least_once;

pub type Value = i64;
pub type NodeId = usize;

/// A node of a compiled diagram. Outgoing edges are sorted by label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    layer: usize,
    edges: Vec<(u32, NodeId)>,
}

impl Node {
    pub fn layer(&self) -> usize {
        self.layer
    }

    /// Outgoing edges as `(label index, child)`, ordered by label.
    pub fn edges(&self) -> &[(u32, NodeId)] {
        &self.edges
    }
}

/// A labelled edge with its resolved value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: NodeId,
    pub destination: NodeId,
    pub value: Value,
    pub source_layer: usize,
    pub destination_layer: usize,
}

impl Edge {
    pub fn is_long(&self) -> bool {
        self.destination_layer > self.source_layer + 1
    }
}

/// An ordered multi-valued decision diagram over fixed compile-time domains.
///
/// A diagram whose constraint has no solution carries no root; it is the
/// failed diagram rather than an empty graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdd {
    domains: Vec<Vec<Value>>,
    nodes: Vec<Node>,
    root: Option<NodeId>,
    terminal: NodeId,
}

impl Mdd {
    /// The constant-true diagram: a lone terminal.
    pub fn new_true(domains: Vec<Vec<Value>>) -> Self {
        let domains = normalize_domains(domains);
        let n = domains.len();
        Mdd {
            domains,
            nodes: vec![Node {
                layer: n,
                edges: Vec::new(),
            }],
            root: Some(0),
            terminal: 0,
        }
    }

    /// The failed diagram for an unsatisfiable constraint.
    pub fn new_failed(domains: Vec<Vec<Value>>) -> Self {
        let mut mdd = Mdd::new_true(domains);
        mdd.root = None;
        mdd
    }

    /// Assembles a diagram from raw parts and checks its structure.
    ///
    /// `nodes` holds `(layer, edges)` where edges are `(value, child)`.
    pub fn from_parts(
        domains: Vec<Vec<Value>>,
        nodes: Vec<(usize, Vec<(Value, NodeId)>)>,
        root: NodeId,
        terminal: NodeId,
    ) -> Result<Self, MddError> {
        let domains = normalize_domains(domains);
        let mut built = Vec::with_capacity(nodes.len());
        for (id, (layer, edges)) in nodes.into_iter().enumerate() {
            let dom = domains.get(layer);
            let mut labelled = Vec::with_capacity(edges.len());
            for (value, child) in edges {
                let index = dom
                    .and_then(|d| d.binary_search(&value).ok())
                    .ok_or_else(|| {
                        MddError::Invalid(format!(
                            "node {id}: value {value} is not in the domain of layer {layer}"
                        ))
                    })?;
                labelled.push((index as u32, child));
            }
            labelled.sort_unstable();
            built.push(Node {
                layer,
                edges: labelled,
            });
        }
        let mdd = Mdd {
            domains,
            nodes: built,
            root: Some(root),
            terminal,
        };
        mdd.validate()?;
        Ok(mdd)
    }

    pub(crate) fn from_raw(
        domains: Vec<Vec<Value>>,
        nodes: Vec<Node>,
        root: Option<NodeId>,
        terminal: NodeId,
    ) -> Self {
        Mdd {
            domains,
            nodes,
            root,
            terminal,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Vec<Value>] {
        &self.domains
    }

    pub fn domain(&self, var: usize) -> &[Value] {
        &self.domains[var]
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn terminal(&self) -> NodeId {
        self.terminal
    }

    pub fn is_failed(&self) -> bool {
        self.root.is_none()
    }

    /// True for the constant-true diagram (root is the terminal).
    pub fn is_true(&self) -> bool {
        self.root == Some(self.terminal)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Value carried by label `index` on an edge leaving `layer`.
    pub fn value_at(&self, layer: usize, index: u32) -> Value {
        self.domains[layer][index as usize]
    }

    /// Number of nodes; the failed diagram has none.
    pub fn node_count(&self) -> usize {
        if self.is_failed() {
            0
        } else {
            self.nodes.len()
        }
    }

    /// Number of labelled edges. Each edge carries a single value.
    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    /// Number of distinct source/destination pairs, i.e. edges as drawn when
    /// parallel edges are shown as one arc with several labels.
    pub fn arc_count(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| {
                n.edges
                    .iter()
                    .map(|&(_, c)| c)
                    .collect::<BTreeSet<_>>()
                    .len()
            })
            .sum()
    }

    pub fn long_edge_count(&self) -> usize {
        self.edges().filter(Edge::is_long).count()
    }

    /// Live nodes per layer, terminal layer included (`n + 1` entries).
    pub fn layer_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_vars() + 1];
        if !self.is_failed() {
            for node in &self.nodes {
                counts[node.layer] += 1;
            }
        }
        counts
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.nodes.iter().enumerate().flat_map(move |(id, node)| {
            node.edges.iter().map(move |&(label, child)| Edge {
                source: id,
                destination: child,
                value: self.domains[node.layer][label as usize],
                source_layer: node.layer,
                destination_layer: self.nodes[child].layer,
            })
        })
    }

    /// Incoming edges of every node as `(parent, value)`.
    pub fn parents(&self) -> Vec<Vec<(NodeId, Value)>> {
        let mut parents = vec![Vec::new(); self.nodes.len()];
        for e in self.edges() {
            parents[e.destination].push((e.source, e.value));
        }
        parents
    }

    /// Membership test for a full assignment.
    pub fn contains(&self, assignment: &[Value]) -> bool {
        if assignment.len() != self.num_vars() {
            return false;
        }
        let Some(mut cur) = self.root else {
            return false;
        };
        let in_domain = |layer: usize| {
            self.domains[layer]
                .binary_search(&assignment[layer])
                .is_ok()
        };
        if !(0..self.nodes[cur].layer).all(in_domain) {
            return false;
        }
        while cur != self.terminal {
            let node = &self.nodes[cur];
            let Ok(label) = self.domains[node.layer].binary_search(&assignment[node.layer]) else {
                return false;
            };
            let Some(&(_, child)) = node.edges.iter().find(|&&(l, _)| l as usize == label) else {
                return false;
            };
            if !(node.layer + 1..self.nodes[child].layer).all(in_domain) {
                return false;
            }
            cur = child;
        }
        true
    }

    /// Checks every structural invariant of a diagram.
    pub fn validate(&self) -> Result<(), MddError> {
        let n = self.num_vars();
        let bad = |msg: String| Err(MddError::Invalid(msg));
        if self.terminal >= self.nodes.len() {
            return bad("terminal id out of range".into());
        }
        if self.nodes[self.terminal].layer != n {
            return bad(format!("terminal must sit at layer {n}"));
        }
        let Some(root) = self.root else {
            return Ok(());
        };
        if root >= self.nodes.len() {
            return bad("root id out of range".into());
        }
        let mut has_parent = vec![false; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if node.layer > n {
                return bad(format!("node {id} has layer {} beyond {n}", node.layer));
            }
            if node.layer == n && id != self.terminal {
                return bad(format!("node {id} is a second terminal"));
            }
            if id != self.terminal && node.edges.is_empty() {
                return bad(format!("node {id} has no outgoing edge"));
            }
            let mut prev: Option<u32> = None;
            for &(label, child) in &node.edges {
                if child >= self.nodes.len() {
                    return bad(format!("node {id} points at missing node {child}"));
                }
                if label as usize >= self.domains[node.layer].len() {
                    return bad(format!("node {id} has an out-of-domain label"));
                }
                if prev.is_some_and(|p| p >= label) {
                    return bad(format!("node {id} repeats or misorders a label"));
                }
                prev = Some(label);
                if self.nodes[child].layer <= node.layer {
                    return bad(format!("edge {id} -> {child} does not go downward"));
                }
                has_parent[child] = true;
            }
        }
        let root_layer = self.nodes[root].layer;
        for (id, node) in self.nodes.iter().enumerate() {
            if id == root {
                continue;
            }
            if node.layer <= root_layer {
                return bad(format!("node {id} is not below the root"));
            }
            if !has_parent[id] {
                return bad(format!("node {id} has no incoming edge"));
            }
        }
        Ok(())
    }

    /// Relabels reachable nodes in breadth-first order from the root, visiting
    /// edges by label. Deterministic diagrams that are isomorphic end up with
    /// identical node vectors.
    pub(crate) fn canonical_order(&self) -> Mdd {
        let Some(root) = self.root else {
            return Mdd::new_failed(self.domains.clone());
        };
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        let mut order = vec![root];
        new_id[root] = 0;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(_, c) in &self.nodes[u].edges {
                if new_id[c] == usize::MAX {
                    new_id[c] = order.len();
                    order.push(c);
                }
            }
        }
        let nodes = order
            .iter()
            .map(|&u| Node {
                layer: self.nodes[u].layer,
                edges: self.nodes[u]
                    .edges
                    .iter()
                    .map(|&(l, c)| (l, new_id[c]))
                    .collect(),
            })
            .collect();
        let terminal = if new_id[self.terminal] == usize::MAX {
            // unreachable terminal only happens for malformed input
            self.terminal
        } else {
            new_id[self.terminal]
        };
        Mdd {
            domains: self.domains.clone(),
            nodes,
            root: Some(0),
            terminal,
        }
    }
}

/// True iff both diagrams have the same shape: same layers, same edge values,
/// same root and terminal, up to renaming of nodes. Domains themselves are not
/// compared, only the values that appear on edges.
pub fn structural_equal(a: &Mdd, b: &Mdd) -> bool {
    if a.num_vars() != b.num_vars() || a.is_failed() != b.is_failed() {
        return false;
    }
    if a.is_failed() {
        return true;
    }
    let ca = a.canonical_order();
    let cb = b.canonical_order();
    if ca.nodes.len() != cb.nodes.len() || ca.terminal != cb.terminal {
        return false;
    }
    ca.nodes.iter().zip(&cb.nodes).all(|(x, y)| {
        x.layer == y.layer
            && x.edges.len() == y.edges.len()
            && x.edges.iter().zip(&y.edges).all(|(&(lx, cx), &(ly, cy))| {
                cx == cy && ca.value_at(x.layer, lx) == cb.value_at(y.layer, ly)
            })
    })
}

impl fmt::Display for Mdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn normalize_domains(mut domains: Vec<Vec<Value>>) -> Vec<Vec<Value>> {
    for d in &mut domains {
        d.sort_unstable();
        d.dedup();
    }
    domains
}
