use std::collections::BTreeSet;

use super::{Mdd, NodeId, Value};

impl Mdd {
    /// Every full assignment accepted by the diagram, optionally restricted to
    /// `current` domains. Long edges expand over every allowed value of the
    /// layers they skip. Meant for test-sized diagrams.
    pub fn enumerate_solutions(&self, current: Option<&[Vec<Value>]>) -> BTreeSet<Vec<Value>> {
        let mut out = BTreeSet::new();
        let Some(root) = self.root else {
            return out;
        };
        let allowed: Vec<Vec<(u32, Value)>> = self
            .domains
            .iter()
            .enumerate()
            .map(|(i, dom)| {
                dom.iter()
                    .enumerate()
                    .filter(|(_, v)| {
                        current.is_none_or(|c| c.get(i).is_some_and(|d| d.contains(v)))
                    })
                    .map(|(l, &v)| (l as u32, v))
                    .collect()
            })
            .collect();
        let mut prefix = Vec::with_capacity(self.num_vars());
        self.expand_free(
            0,
            self.nodes[root].layer,
            root,
            &allowed,
            &mut prefix,
            &mut out,
        );
        out
    }

    fn expand_free(
        &self,
        layer: usize,
        until: usize,
        next: NodeId,
        allowed: &[Vec<(u32, Value)>],
        prefix: &mut Vec<Value>,
        out: &mut BTreeSet<Vec<Value>>,
    ) {
        if layer == until {
            self.walk(next, allowed, prefix, out);
            return;
        }
        for &(_, v) in &allowed[layer] {
            prefix.push(v);
            self.expand_free(layer + 1, until, next, allowed, prefix, out);
            prefix.pop();
        }
    }

    fn walk(
        &self,
        u: NodeId,
        allowed: &[Vec<(u32, Value)>],
        prefix: &mut Vec<Value>,
        out: &mut BTreeSet<Vec<Value>>,
    ) {
        if u == self.terminal {
            out.insert(prefix.clone());
            return;
        }
        let node = &self.nodes[u];
        for &(label, c) in &node.edges {
            let Some(&(_, v)) = allowed[node.layer].iter().find(|&&(l, _)| l == label) else {
                continue;
            };
            prefix.push(v);
            self.expand_free(node.layer + 1, self.nodes[c].layer, c, allowed, prefix, out);
            prefix.pop();
        }
    }

    /// Number of accepted full assignments, by dynamic programming over the
    /// layers. A long edge contributes the product of the sizes of the
    /// domains it skips.
    pub fn count_solutions(&self) -> u128 {
        let Some(root) = self.root else {
            return 0;
        };
        let span = |from: usize, to: usize| -> u128 {
            self.domains[from..to]
                .iter()
                .map(|d| d.len() as u128)
                .product()
        };
        let mut order: Vec<NodeId> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&u| std::cmp::Reverse(self.nodes[u].layer));
        let mut count = vec![0u128; self.nodes.len()];
        count[self.terminal] = 1;
        for u in order {
            if u == self.terminal {
                continue;
            }
            let node = &self.nodes[u];
            count[u] = node
                .edges
                .iter()
                .map(|&(_, c)| count[c] * span(node.layer + 1, self.nodes[c].layer))
                .sum();
        }
        count[root] * span(0, self.nodes[root].layer)
    }
}
