use std::collections::HashMap;

use super::{Mdd, Node, NodeId};
use crate::error::MddError;

struct Product<'a> {
    a: &'a Mdd,
    b: &'a Mdd,
    nodes: Vec<Node>,
    memo: HashMap<(NodeId, NodeId), Option<NodeId>>,
    edges: usize,
    limit: Option<usize>,
}

impl Product<'_> {
    fn visit(&mut self, u: NodeId, w: NodeId) -> Result<Option<NodeId>, MddError> {
        if u == self.a.terminal && w == self.b.terminal {
            return Ok(Some(0));
        }
        if let Some(&hit) = self.memo.get(&(u, w)) {
            return Ok(hit);
        }
        let (nu, nw) = (&self.a.nodes[u], &self.b.nodes[w]);
        let layer = nu.layer.min(nw.layer);
        let mut edges = Vec::new();
        if nu.layer == nw.layer {
            let (mut i, mut j) = (0, 0);
            while i < nu.edges.len() && j < nw.edges.len() {
                let (lu, cu) = self.a.nodes[u].edges[i];
                let (lw, cw) = self.b.nodes[w].edges[j];
                if lu < lw {
                    i += 1;
                } else if lw < lu {
                    j += 1;
                } else {
                    if let Some(c) = self.visit(cu, cw)? {
                        edges.push((lu, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        } else if nu.layer < nw.layer {
            for k in 0..nu.edges.len() {
                let (l, c) = self.a.nodes[u].edges[k];
                if let Some(c) = self.visit(c, w)? {
                    edges.push((l, c));
                }
            }
        } else {
            for k in 0..nw.edges.len() {
                let (l, c) = self.b.nodes[w].edges[k];
                if let Some(c) = self.visit(u, c)? {
                    edges.push((l, c));
                }
            }
        }
        let result = if edges.is_empty() {
            None
        } else {
            self.edges += edges.len();
            if let Some(limit) = self.limit {
                if self.edges > limit {
                    return Err(MddError::EdgeLimit { limit });
                }
            }
            self.nodes.push(Node { layer, edges });
            Some(self.nodes.len() - 1)
        };
        self.memo.insert((u, w), result);
        Ok(result)
    }
}

impl Mdd {
    /// Intersection of two diagrams over the same variables and domains.
    pub fn conjoin(&self, other: &Mdd) -> Result<Mdd, MddError> {
        self.conjoin_limited(other, None)
    }

    /// As [`Mdd::conjoin`], aborting once the intermediate product holds more
    /// than `limit` edges.
    pub fn conjoin_limited(&self, other: &Mdd, limit: Option<usize>) -> Result<Mdd, MddError> {
        if self.domains != other.domains {
            return Err(MddError::DomainMismatch);
        }
        let (Some(ra), Some(rb)) = (self.root, other.root) else {
            return Ok(Mdd::new_failed(self.domains.clone()));
        };
        let mut product = Product {
            a: self,
            b: other,
            nodes: vec![Node {
                layer: self.num_vars(),
                edges: Vec::new(),
            }],
            memo: HashMap::new(),
            edges: 0,
            limit,
        };
        let root = product.visit(ra, rb)?;
        let nodes = product.nodes;
        Ok(match root {
            None => Mdd::new_failed(self.domains.clone()),
            Some(r) => Mdd::from_raw(self.domains.clone(), nodes, Some(r), 0).reduce_full(),
        })
    }
}
