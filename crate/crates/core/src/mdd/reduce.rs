use std::collections::HashMap;

use super::{Mdd, Node, NodeId};

impl Mdd {
    /// Canonical fully reduced form: duplicate nodes merged, dead nodes
    /// dropped and every node that sends its whole layer domain to a single
    /// child replaced by a long edge to that child.
    pub fn reduce_full(&self) -> Mdd {
        self.reduce_with(true)
    }

    /// Uniqueness reduction only: no collapse into long edges.
    pub fn reduce_uniqueness(&self) -> Mdd {
        self.reduce_with(false)
    }

    pub fn is_reduced(&self) -> bool {
        super::structural_equal(self, &self.reduce_full())
    }

    fn reduce_with(&self, collapse: bool) -> Mdd {
        let Some(root) = self.root else {
            return Mdd::new_failed(self.domains.clone());
        };
        let reachable = self.reachable_from(root);
        let mut by_layer: Vec<Vec<NodeId>> = vec![Vec::new(); self.num_vars() + 1];
        for (id, node) in self.nodes.iter().enumerate() {
            if reachable[id] {
                by_layer[node.layer].push(id);
            }
        }

        let mut nodes: Vec<Node> = Vec::new();
        let mut rep: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        let mut unique: HashMap<(usize, Vec<(u32, NodeId)>), NodeId> = HashMap::new();
        let terminal = 0;
        nodes.push(Node {
            layer: self.num_vars(),
            edges: Vec::new(),
        });
        if reachable[self.terminal] {
            rep[self.terminal] = Some(terminal);
        }

        for layer in (0..self.num_vars()).rev() {
            for &u in &by_layer[layer] {
                let edges: Vec<(u32, NodeId)> = self.nodes[u]
                    .edges
                    .iter()
                    .filter_map(|&(l, c)| rep[c].map(|r| (l, r)))
                    .collect();
                if edges.is_empty() {
                    continue;
                }
                let first = edges[0].1;
                if collapse
                    && edges.len() == self.domains[layer].len()
                    && edges.iter().all(|&(_, c)| c == first)
                {
                    rep[u] = Some(first);
                    continue;
                }
                let id = *unique
                    .entry((layer, edges))
                    .or_insert_with_key(|(layer, edges)| {
                        nodes.push(Node {
                            layer: *layer,
                            edges: edges.clone(),
                        });
                        nodes.len() - 1
                    });
                rep[u] = Some(id);
            }
        }

        match rep[root] {
            None => Mdd::new_failed(self.domains.clone()),
            Some(r) => Mdd {
                domains: self.domains.clone(),
                nodes,
                root: Some(r),
                terminal,
            }
            .canonical_order(),
        }
    }

    pub(crate) fn reachable_from(&self, root: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            for &(_, c) in &self.nodes[u].edges {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }
}
