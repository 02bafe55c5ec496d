use std::collections::HashMap;

use super::{normalize_domains, Mdd, Node, NodeId, Value};
use crate::error::MddError;

impl Mdd {
    /// Compiles an explicit table of full assignments.
    ///
    /// The tuples are laid out as a layered trie and then fully reduced, so
    /// the result is canonical for the set of tuples. An empty table yields
    /// the failed diagram.
    pub fn from_tuples(domains: Vec<Vec<Value>>, tuples: &[Vec<Value>]) -> Result<Mdd, MddError> {
        let domains = normalize_domains(domains);
        let n = domains.len();
        let mut labelled = Vec::with_capacity(tuples.len());
        for (index, tuple) in tuples.iter().enumerate() {
            if tuple.len() != n {
                return Err(MddError::TupleArity {
                    index,
                    expected: n,
                    found: tuple.len(),
                });
            }
            let mut row = Vec::with_capacity(n);
            for (var, &value) in tuple.iter().enumerate() {
                match domains[var].binary_search(&value) {
                    Ok(pos) => row.push(pos as u32),
                    Err(_) => return Err(MddError::ValueOutOfDomain { index, var, value }),
                }
            }
            labelled.push(row);
        }
        if labelled.is_empty() {
            return Ok(Mdd::new_failed(domains));
        }

        // node 0 is the terminal, node 1 the trie root
        let mut nodes = vec![
            Node {
                layer: n,
                edges: Vec::new(),
            },
            Node {
                layer: 0,
                edges: Vec::new(),
            },
        ];
        let root = if n == 0 { 0 } else { 1 };
        if n == 0 {
            nodes.truncate(1);
        }
        let mut child_of: HashMap<(NodeId, u32), NodeId> = HashMap::new();
        for row in &labelled {
            let mut cur = root;
            for (layer, &label) in row.iter().enumerate() {
                let next = match child_of.get(&(cur, label)) {
                    Some(&c) => c,
                    None => {
                        let c = if layer + 1 == n {
                            0
                        } else {
                            nodes.push(Node {
                                layer: layer + 1,
                                edges: Vec::new(),
                            });
                            nodes.len() - 1
                        };
                        nodes[cur].edges.push((label, c));
                        child_of.insert((cur, label), c);
                        c
                    }
                };
                cur = next;
            }
        }
        for node in &mut nodes {
            node.edges.sort_unstable();
        }
        Ok(Mdd::from_raw(domains, nodes, Some(root), 0).reduce_full())
    }

    /// Rewrites every long edge (and a root below layer 0) through explicit
    /// pass-through nodes, so that every edge spans exactly one layer. The
    /// result accepts the same assignments and is uniqueness reduced.
    pub fn expand_long_edges(&self) -> Mdd {
        let Some(root) = self.root else {
            return self.clone();
        };
        let n = self.num_vars();
        let mut nodes = self.nodes.clone();
        // pass-through node at `layer` whose whole domain leads to `target`
        let mut pass: HashMap<(usize, NodeId), NodeId> = HashMap::new();
        let mut bridge = |nodes: &mut Vec<Node>, from_layer: usize, target: NodeId| -> NodeId {
            let mut cur = target;
            let target_layer = nodes[target].layer;
            for layer in (from_layer..target_layer).rev() {
                cur = *pass.entry((layer, cur)).or_insert_with(|| {
                    let edges = (0..self.domains[layer].len() as u32)
                        .map(|l| (l, cur))
                        .collect();
                    nodes.push(Node { layer, edges });
                    nodes.len() - 1
                });
            }
            cur
        };
        for u in 0..self.nodes.len() {
            let layer = self.nodes[u].layer;
            for k in 0..self.nodes[u].edges.len() {
                let (label, c) = nodes[u].edges[k];
                if nodes[c].layer > layer + 1 {
                    let via = bridge(&mut nodes, layer + 1, c);
                    nodes[u].edges[k] = (label, via);
                }
            }
        }
        let root = bridge(&mut nodes, 0, root);
        debug_assert!(nodes.iter().all(|x| x.layer <= n));
        Mdd::from_raw(self.domains.clone(), nodes, Some(root), self.terminal).reduce_uniqueness()
    }

    /// Embeds a diagram over `scope` (strictly increasing global variable
    /// indices) into a diagram over `domains.len()` variables. Variables
    /// outside the scope are left unconstrained.
    pub fn lift(&self, domains: &[Vec<Value>], scope: &[usize]) -> Result<Mdd, MddError> {
        let domains = normalize_domains(domains.to_vec());
        if scope.len() != self.num_vars() || scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MddError::Invalid(
                "scope must be strictly increasing and match arity".into(),
            ));
        }
        if scope.last().is_some_and(|&s| s >= domains.len()) {
            return Err(MddError::DomainMismatch);
        }
        for (local, &global) in scope.iter().enumerate() {
            if domains[global] != self.domains[local] {
                return Err(MddError::DomainMismatch);
            }
        }
        let Some(root) = self.root else {
            return Ok(Mdd::new_failed(domains));
        };
        let layer_of = |local: usize| {
            if local == self.num_vars() {
                domains.len()
            } else {
                scope[local]
            }
        };
        let nodes = self
            .nodes
            .iter()
            .map(|node| Node {
                layer: layer_of(node.layer),
                edges: node.edges.clone(),
            })
            .collect();
        Ok(Mdd::from_raw(domains, nodes, Some(root), self.terminal).reduce_full())
    }
}

/// The constraint "value `target` occurs at least once among `n` variables"
/// with every variable ranging over `domain`. Built directly layer by layer
/// and returned fully reduced.
pub fn at_least_once(n: usize, domain: &[Value], target: Value) -> Mdd {
    let domains = normalize_domains(vec![domain.to_vec(); n]);
    let Some(domain) = domains.first() else {
        return Mdd::new_failed(domains);
    };
    let Ok(hit) = domain.binary_search(&target) else {
        return Mdd::new_failed(domains);
    };
    let hit = hit as u32;
    // node 0 terminal, node i + 1 means "not seen yet, deciding variable i"
    let mut nodes = vec![Node {
        layer: n,
        edges: Vec::new(),
    }];
    for layer in 0..n {
        let edges = (0..domain.len() as u32)
            .filter_map(|l| {
                if l == hit {
                    Some((l, 0))
                } else if layer + 1 < n {
                    Some((l, layer + 2))
                } else {
                    None
                }
            })
            .collect();
        nodes.push(Node { layer, edges });
    }
    Mdd::from_raw(domains, nodes, Some(1), 0).reduce_full()
}
