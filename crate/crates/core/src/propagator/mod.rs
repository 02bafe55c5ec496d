//! Incremental generalized arc consistency over one diagram.
//!
//! A [`PropagatorState`] owns a mutable copy of a compiled [`Mdd`]. Removing
//! values deletes the edges that carry them, cascades through nodes that lose
//! all children or all parents, tracks which layers are still jumped over by
//! long edges and reports the values that lost their last support. After each
//! propagation the diagram is reduced again in place (see
//! [`crate::dyn_reduce`]). Every change is logged so that [`backtrack`]
//! restores the exact state at the matching [`push_phase`].
//!
//! [`backtrack`]: PropagatorState::backtrack
//! [`push_phase`]: PropagatorState::push_phase

mod domain;
pub(crate) mod graph;
mod skip;
mod support;
pub(crate) mod trail;
mod validate;

use std::collections::VecDeque;

use crate::dyn_reduce::{NodeHash, ReductionTables, SignatureKeys, DEFAULT_HASH_SEED};
use crate::error::PropagatorError;
use crate::mdd::{structural_equal, Mdd, NodeId, Value};
use domain::DomainStore;
use graph::{EdgeSlot, NodeSlot, NONE};
use skip::SkipTracker;
use support::SupportIndex;
use trail::{Trail, Undo};

pub use validate::StateSnapshot;

/// Behaviour switches of a propagator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PropagatorConfig {
    /// Collapse nodes whose edges cover the whole current domain of their
    /// layer into long edges, on top of merging duplicates.
    pub full_reduce: bool,
    /// Rescan every structure after each operation.
    pub validate_invariants: bool,
    /// Seed of the random signature keys.
    pub hash_seed: u64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            full_reduce: true,
            validate_invariants: false,
            hash_seed: DEFAULT_HASH_SEED,
        }
    }
}

/// Result of one propagation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Values pruned by the diagram beyond the ones requested.
    Consistent(Vec<(usize, Value)>),
    Failed,
}

impl Propagation {
    pub fn is_failed(&self) -> bool {
        matches!(self, Propagation::Failed)
    }

    pub fn newly_removed(&self) -> &[(usize, Value)] {
        match self {
            Propagation::Consistent(v) => v,
            Propagation::Failed => &[],
        }
    }
}

/// Counters accumulated over the lifetime of a propagator. They are not
/// rolled back by backtracking.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropagatorStats {
    pub propagations: u64,
    pub remove_edge_calls: u64,
    pub merges: u64,
    pub redirects: u64,
    pub collapses: u64,
    /// Redirects that pushed an edge past [`PropagatorState::redirect_bound`].
    pub redirect_violations: u64,
    /// Largest per-edge redirect count seen on any branch.
    pub max_edge_redirects: u32,
    /// Largest amount of reduction work seen on any branch.
    pub max_branch_reduce_work: u64,
}

/// Propagation state for one diagram constraint.
#[derive(Clone, Debug)]
pub struct PropagatorState {
    pub(crate) config: PropagatorConfig,
    pub(crate) n: usize,
    pub(crate) domains: Vec<Vec<Value>>,
    pub(crate) top: u32,
    pub(crate) terminal: u32,
    pub(crate) entry: u32,
    pub(crate) nodes: Vec<NodeSlot>,
    pub(crate) edges: Vec<EdgeSlot>,
    pub(crate) support: SupportIndex,
    pub(crate) skip: SkipTracker,
    pub(crate) keys: SignatureKeys,
    pub(crate) tables: ReductionTables,
    pub(crate) dom: DomainStore,
    pub(crate) trail: Trail,
    pub(crate) layer_counts: Vec<u32>,
    pub(crate) crowded_layers: u32,
    pub(crate) live_nodes: u32,
    pub(crate) live_edges: u32,
    pub(crate) failed: bool,
    pub(crate) branch_edge_removals: u64,
    pub(crate) branch_reduce_work: u64,
    pub(crate) dirty: Vec<Vec<u32>>,
    pub(crate) in_dirty: Vec<bool>,
    pub(crate) stats: PropagatorStats,
    pub(crate) redirect_bound: u32,
    initial_nodes: usize,
    initial_edges: usize,
}

fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

impl PropagatorState {
    /// Builds the state for `mdd` and propagates the given current domains.
    ///
    /// A wipe-out during this first propagation is not an error: the state
    /// is created failed and stays failed.
    pub fn new(
        mdd: &Mdd,
        domains: &[Vec<Value>],
        config: PropagatorConfig,
    ) -> Result<Self, PropagatorError> {
        let n = mdd.num_vars();
        if domains.len() != n {
            return Err(PropagatorError::BadDomains(format!(
                "expected {n} domains, got {}",
                domains.len()
            )));
        }
        let reduced = mdd.reduce_full();
        let mdd = if reduced.nodes().len() == mdd.nodes().len() && structural_equal(mdd, &reduced) {
            mdd.clone()
        } else {
            reduced
        };
        let compiled: Vec<Vec<Value>> = mdd.domains().to_vec();
        let mut absent = Vec::new();
        for (var, given) in domains.iter().enumerate() {
            if let Some(v) = given
                .iter()
                .find(|v| compiled[var].binary_search(v).is_err())
            {
                return Err(PropagatorError::BadDomains(format!(
                    "value {v} of variable {var} is outside the compiled domain"
                )));
            }
            for (label, v) in compiled[var].iter().enumerate() {
                if !given.contains(v) {
                    absent.push((var as u32, label as u32));
                }
            }
        }

        let sizes: Vec<usize> = compiled.iter().map(Vec::len).collect();
        let m = mdd.nodes().len();
        let keys = SignatureKeys::new(config.hash_seed, &sizes, m + 1);
        let top = m as u32;
        let terminal = mdd.terminal() as u32;
        let live = !mdd.is_failed();
        let mut nodes: Vec<NodeSlot> = mdd
            .nodes()
            .iter()
            .map(|node| NodeSlot {
                layer: node.layer() as u32,
                live,
                children: Vec::new(),
                parents: Vec::new(),
                hash: NodeHash::empty(&keys, node.layer() as u32),
            })
            .collect();
        nodes.push(NodeSlot {
            layer: 0,
            live: true,
            children: Vec::new(),
            parents: Vec::new(),
            hash: NodeHash::default(),
        });
        let mut edges = Vec::with_capacity(mdd.edge_count() + 1);
        let mut support = SupportIndex::new(sizes.iter().copied());
        let mut skip = SkipTracker::new(n);
        let mut layer_counts = vec![0u32; n + 1];
        let mut entry = NONE;
        if let Some(root) = mdd.root() {
            for (u, node) in mdd.nodes().iter().enumerate() {
                let layer = node.layer() as u32;
                layer_counts[layer as usize] += 1;
                for &(label, child) in node.edges() {
                    let e = edges.len() as u32;
                    edges.push(EdgeSlot {
                        src: u as u32,
                        dst: child as u32,
                        label,
                        live: true,
                        sup_prev: NONE,
                        sup_next: NONE,
                        child_pos: nodes[u].children.len() as u32,
                        parent_pos: nodes[child].parents.len() as u32,
                        redirects: 0,
                    });
                    nodes[u].children.push(e);
                    nodes[child].parents.push(e);
                    support.link_front(&mut edges, e, layer);
                    let dl = nodes[child].layer;
                    if dl > layer + 1 {
                        skip.seed(layer + 1, dl - 1);
                    }
                    nodes[u].hash.add(&keys, layer, label, child as u32);
                }
            }
            entry = edges.len() as u32;
            edges.push(EdgeSlot {
                src: top,
                dst: root as u32,
                label: NONE,
                live: true,
                sup_prev: NONE,
                sup_next: NONE,
                child_pos: 0,
                parent_pos: nodes[root].parents.len() as u32,
                redirects: 0,
            });
            nodes[top as usize].children.push(entry);
            nodes[root].parents.push(entry);
            let rl = nodes[root].layer;
            if rl > 0 {
                skip.seed(0, rl - 1);
            }
        }
        let mut tables = ReductionTables::default();
        for (u, node) in nodes.iter().enumerate() {
            if node.live && u as u32 != top && u as u32 != terminal {
                tables.insert(u as u32, node.layer, &node.hash);
            }
        }
        let dom = DomainStore::full(&sizes, &keys);
        let live_nodes = layer_counts.iter().sum();
        let crowded_layers = layer_counts.iter().filter(|&&c| c > 1).count() as u32;
        let initial_nodes = mdd.node_count();
        let initial_edges = mdd.edge_count();
        let mut state = PropagatorState {
            config,
            n,
            domains: compiled,
            top,
            terminal,
            entry,
            nodes,
            edges,
            support,
            skip,
            keys,
            tables,
            dom,
            trail: Trail::default(),
            layer_counts,
            crowded_layers,
            live_nodes,
            live_edges: initial_edges as u32,
            failed: false,
            branch_edge_removals: 0,
            branch_reduce_work: 0,
            dirty: vec![Vec::new(); n + 1],
            in_dirty: vec![false; m + 1],
            stats: PropagatorStats::default(),
            redirect_bound: ceil_log2(initial_nodes),
            initial_nodes,
            initial_edges,
        };
        if mdd.is_failed() {
            state.failed = true;
            state.skip.refresh_union(&mut state.trail);
            for d in 0..n as u32 {
                for label in 0..sizes[d as usize] as u32 {
                    state.dom.remove(d, label, &state.keys, &mut state.trail);
                }
            }
        } else {
            state.run(&absent, None);
        }
        state.trail.clear();
        if state.config.validate_invariants {
            state.check_invariants()?;
        }
        Ok(state)
    }

    /// Removes `(variable, value)` pairs from the current domains and
    /// propagates. Pairs whose value is already absent are ignored.
    pub fn remove(&mut self, removals: &[(usize, Value)]) -> Result<Propagation, PropagatorError> {
        self.ensure_open()?;
        let mut labels = Vec::with_capacity(removals.len());
        for &(var, value) in removals {
            self.check_var(var)?;
            if let Ok(label) = self.domains[var].binary_search(&value) {
                labels.push((var as u32, label as u32));
            }
        }
        let out = self.run(&labels, None);
        self.after_operation()?;
        Ok(out)
    }

    /// Restricts `var` to the single value `value`.
    pub fn assign(&mut self, var: usize, value: Value) -> Result<Propagation, PropagatorError> {
        self.ensure_open()?;
        self.check_var(var)?;
        let label = self.domains[var]
            .binary_search(&value)
            .ok()
            .filter(|&l| self.dom.contains(var as u32, l as u32))
            .ok_or(PropagatorError::ValueNotInDomain { var, value })?;
        let labels: Vec<(u32, u32)> = self
            .dom
            .labels(var as u32)
            .filter(|&l| l as usize != label)
            .map(|l| (var as u32, l))
            .collect();
        let out = self.run(&labels, None);
        self.after_operation()?;
        Ok(out)
    }

    /// Deletes one live edge and propagates the consequences.
    pub fn remove_edge(
        &mut self,
        src: NodeId,
        dst: NodeId,
        value: Value,
    ) -> Result<Propagation, PropagatorError> {
        self.ensure_open()?;
        let missing = PropagatorError::NoSuchEdge { src, dst, value };
        if src >= self.top as usize || !self.nodes[src].live {
            return Err(missing);
        }
        let layer = self.nodes[src].layer as usize;
        let label = self
            .domains
            .get(layer)
            .and_then(|d| d.binary_search(&value).ok());
        let e = self.nodes[src]
            .children
            .iter()
            .copied()
            .find(|&e| {
                let slot = &self.edges[e as usize];
                slot.dst as usize == dst && Some(slot.label as usize) == label
            })
            .ok_or(missing)?;
        let out = self.run(&[], Some(e));
        self.after_operation()?;
        Ok(out)
    }

    /// Opens a phase; the next [`backtrack`](Self::backtrack) returns here.
    pub fn push_phase(&mut self) {
        self.trail.mark();
    }

    /// Undoes everything since the most recent [`push_phase`](Self::push_phase).
    pub fn backtrack(&mut self) -> Result<(), PropagatorError> {
        let records = self.trail.pop_phase().ok_or(PropagatorError::NoOpenPhase)?;
        for undo in records {
            self.undo(undo);
        }
        if self.config.validate_invariants {
            self.check_invariants()?;
        }
        Ok(())
    }

    pub fn phase_depth(&self) -> usize {
        self.trail.depth()
    }

    /// Values of every variable that take part in a solution within the
    /// current domains.
    pub fn valid_domains(&self) -> Result<Vec<Vec<Value>>, PropagatorError> {
        if self.failed {
            return Err(PropagatorError::Failed);
        }
        Ok((0..self.n).map(|i| self.current_domain(i)).collect())
    }

    /// Current domain of `var`, including after a failure.
    pub fn current_domain(&self, var: usize) -> Vec<Value> {
        self.dom
            .labels(var as u32)
            .map(|l| self.domains[var][l as usize])
            .collect()
    }

    /// Values of `var` that still head at least one edge.
    pub fn shadow_domain(&self, var: usize) -> Vec<Value> {
        (0..self.domains[var].len() as u32)
            .filter(|&l| self.support.is_supported(var as u32, l))
            .map(|l| self.domains[var][l as usize])
            .collect()
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> &PropagatorConfig {
        &self.config
    }

    /// Compile-time domains.
    pub fn domains(&self) -> &[Vec<Value>] {
        &self.domains
    }

    /// True when some live long edge jumps over `layer`.
    pub fn is_skipped(&self, layer: usize) -> bool {
        self.skip.is_skipped(layer)
    }

    /// Number of live long edges skipping exactly `start..=end`.
    pub fn skip_count(&self, start: usize, end: usize) -> u32 {
        self.skip.count(start as u32, end as u32)
    }

    /// Distinct skipped intervals with their multiplicities.
    pub fn skipped_intervals(&self) -> Vec<((usize, usize), u32)> {
        let mut out = Vec::new();
        for s in 0..self.n {
            for e in s..self.n {
                let c = self.skip.count(s as u32, e as u32);
                if c > 0 {
                    out.push(((s, e), c));
                }
            }
        }
        out
    }

    pub fn root(&self) -> Option<NodeId> {
        (self.entry != NONE && self.edges[self.entry as usize].live)
            .then(|| self.edges[self.entry as usize].dst as NodeId)
    }

    pub fn terminal(&self) -> NodeId {
        self.terminal as NodeId
    }

    pub fn is_live(&self, u: NodeId) -> bool {
        u < self.top as usize && self.nodes[u].live
    }

    pub fn layer(&self, u: NodeId) -> usize {
        self.nodes[u].layer as usize
    }

    /// Outgoing edges of `u` as `(value, child)`, sorted.
    pub fn children(&self, u: NodeId) -> Vec<(Value, NodeId)> {
        let layer = self.nodes[u].layer as usize;
        let mut out: Vec<_> = self.nodes[u]
            .children
            .iter()
            .map(|&e| {
                let s = &self.edges[e as usize];
                (self.domains[layer][s.label as usize], s.dst as NodeId)
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Incoming edges of `u` as `(parent, value)`, sorted. The virtual entry
    /// edge of the root is not listed.
    pub fn parents(&self, u: NodeId) -> Vec<(NodeId, Value)> {
        let mut out: Vec<_> = self.nodes[u]
            .parents
            .iter()
            .map(|&e| &self.edges[e as usize])
            .filter(|s| s.src != self.top)
            .map(|s| {
                let layer = self.nodes[s.src as usize].layer as usize;
                (s.src as NodeId, self.domains[layer][s.label as usize])
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Live nodes per layer, terminal layer included.
    pub fn layer_counts(&self) -> Vec<usize> {
        self.layer_counts.iter().map(|&c| c as usize).collect()
    }

    pub fn live_node_count(&self) -> usize {
        self.live_nodes as usize
    }

    pub fn live_edge_count(&self) -> usize {
        self.live_edges as usize
    }

    pub fn initial_node_count(&self) -> usize {
        self.initial_nodes
    }

    pub fn initial_edge_count(&self) -> usize {
        self.initial_edges
    }

    /// Largest number of times a single edge may be redirected by merges on
    /// one branch: `ceil(log2 |V|)` for the initial node count.
    pub fn redirect_bound(&self) -> u32 {
        self.redirect_bound
    }

    /// Edge removals by propagation on the current branch.
    pub fn branch_edge_removals(&self) -> u64 {
        self.branch_edge_removals
    }

    /// Merges, redirects and collapses on the current branch.
    pub fn branch_reduce_work(&self) -> u64 {
        self.branch_reduce_work
    }

    /// `4 |E| log2 |V|` for the initial diagram.
    pub fn reduce_work_bound(&self) -> u64 {
        4 * self.initial_edges as u64 * ceil_log2(self.initial_nodes.max(2)) as u64
    }

    pub fn stats(&self) -> &PropagatorStats {
        &self.stats
    }

    /// Largest redirect count of any live edge on the current branch.
    pub fn max_edge_redirects(&self) -> u32 {
        self.edges.iter().map(|e| e.redirects).max().unwrap_or(0)
    }

    /// The live diagram as a standalone [`Mdd`] over the current domains.
    pub fn live_mdd(&self) -> Mdd {
        let current: Vec<Vec<Value>> = (0..self.n).map(|i| self.current_domain(i)).collect();
        let Some(root) = self.root().filter(|_| !self.failed) else {
            return Mdd::new_failed(current);
        };
        let mut ids = vec![usize::MAX; self.nodes.len()];
        let mut order = vec![root];
        ids[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.nodes[u].children {
                let c = self.edges[e as usize].dst as usize;
                if ids[c] == usize::MAX {
                    ids[c] = order.len();
                    order.push(c);
                    queue.push_back(c);
                }
            }
        }
        let parts = order
            .iter()
            .map(|&u| {
                let layer = self.nodes[u].layer as usize;
                let edges = self.nodes[u]
                    .children
                    .iter()
                    .map(|&e| {
                        let s = &self.edges[e as usize];
                        (self.domains[layer][s.label as usize], ids[s.dst as usize])
                    })
                    .collect();
                (layer, edges)
            })
            .collect();
        Mdd::from_parts(current, parts, 0, ids[self.terminal as usize])
            .expect("live graph is a valid diagram")
    }

    fn ensure_open(&self) -> Result<(), PropagatorError> {
        if self.failed {
            Err(PropagatorError::Failed)
        } else {
            Ok(())
        }
    }

    fn check_var(&self, var: usize) -> Result<(), PropagatorError> {
        if var < self.n {
            Ok(())
        } else {
            Err(PropagatorError::VariableOutOfRange(var))
        }
    }

    fn after_operation(&mut self) -> Result<(), PropagatorError> {
        self.stats.max_branch_reduce_work = self
            .stats
            .max_branch_reduce_work
            .max(self.branch_reduce_work);
        if self.config.validate_invariants {
            self.check_invariants()?;
        }
        Ok(())
    }

    /// One propagation: drop the given labels from the domains, delete their
    /// edges (plus `edge`, if any) with every edge that becomes useless,
    /// prune unsupported values and reduce.
    pub(crate) fn run(&mut self, removals: &[(u32, u32)], edge: Option<u32>) -> Propagation {
        self.stats.propagations += 1;
        let mut changed = vec![false; self.n];
        let mut removed = Vec::with_capacity(removals.len());
        for &(var, label) in removals {
            if self.dom.contains(var, label) {
                self.dom.remove(var, label, &self.keys, &mut self.trail);
                changed[var as usize] = true;
                removed.push((var, label));
            }
        }
        let mut lost = Vec::new();
        if let Some(e) = edge {
            self.remove_edge_cascade(e, &mut lost);
        }
        for &(var, label) in &removed {
            loop {
                let e = self.support.head(var, label);
                if e == NONE {
                    break;
                }
                self.remove_edge_cascade(e, &mut lost);
            }
        }

        let (left, _) = self.skip.refresh_union(&mut self.trail);
        let mut newly = Vec::new();
        for (layer, label) in lost {
            if !self.skip.is_skipped(layer as usize) && self.dom.contains(layer, label) {
                self.dom.remove(layer, label, &self.keys, &mut self.trail);
                changed[layer as usize] = true;
                newly.push((layer, label));
            }
        }
        for layer in left {
            let layer = layer as u32;
            let unsupported: Vec<u32> = self
                .dom
                .labels(layer)
                .filter(|&l| !self.support.is_supported(layer, l))
                .collect();
            for label in unsupported {
                self.dom.remove(layer, label, &self.keys, &mut self.trail);
                changed[layer as usize] = true;
                newly.push((layer, label));
            }
        }

        if (0..self.n as u32).any(|i| self.dom.size(i) == 0) {
            if !self.failed {
                self.failed = true;
                self.trail.push(Undo::Failed);
            }
            for bucket in &mut self.dirty {
                for u in bucket.drain(..) {
                    self.in_dirty[u as usize] = false;
                }
            }
            return Propagation::Failed;
        }

        self.reduce(&changed);
        self.skip.refresh_union(&mut self.trail);
        newly.sort_unstable();
        Propagation::Consistent(
            newly
                .into_iter()
                .map(|(var, label)| (var as usize, self.domains[var as usize][label as usize]))
                .collect(),
        )
    }

    /// Deletes `e` and everything that loses its last path through it.
    /// Nodes left without children take their incoming edges with them;
    /// nodes left without parents take their outgoing edges. `lost` collects
    /// the `(layer, label)` pairs whose last edge went away.
    fn remove_edge_cascade(&mut self, e: u32, lost: &mut Vec<(u32, u32)>) {
        let mut stack = vec![e];
        while let Some(e) = stack.pop() {
            if !self.edges[e as usize].live {
                continue;
            }
            let EdgeSlot {
                src, dst, label, ..
            } = self.edges[e as usize];
            if src != self.top {
                self.stats.remove_edge_calls += 1;
                self.branch_edge_removals += 1;
                self.trail.push(Undo::BranchEdgeRemoval);
            }
            if self.detach_edge(e) {
                lost.push((self.nodes[src as usize].layer, label));
            }
            if src != self.top && self.nodes[src as usize].live {
                if self.nodes[src as usize].children.is_empty() {
                    self.kill_node(src);
                    stack.extend(self.nodes[src as usize].parents.iter().copied());
                } else {
                    self.mark_dirty(src);
                }
            }
            if dst != self.terminal
                && self.nodes[dst as usize].live
                && self.nodes[dst as usize].parents.is_empty()
            {
                self.kill_node(dst);
                stack.extend(self.nodes[dst as usize].children.iter().copied());
            }
        }
    }
}

#[cfg(test)]
mod tests;
