use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default seed for the signature key tables.
pub const DEFAULT_HASH_SEED: u64 = 0x6d64_645f_7369_6773;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random key tables for additive signatures.
///
/// A node signature is the layer key plus one term per outgoing edge, where
/// the term mixes the key of the child with the key of the `(layer, value)`
/// label. Sums are taken modulo 2^128, so any edge change is one subtraction
/// and one addition.
#[derive(Clone, Debug)]
pub(crate) struct SignatureKeys {
    layer: Vec<u128>,
    value_offsets: Vec<usize>,
    value: Vec<u128>,
    node: Vec<u128>,
}

impl SignatureKeys {
    pub(crate) fn new(seed: u64, domain_sizes: &[usize], nodes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut value_offsets = vec![0];
        for &d in domain_sizes {
            value_offsets.push(value_offsets.last().unwrap() + d);
        }
        SignatureKeys {
            layer: (0..=domain_sizes.len()).map(|_| rng.gen()).collect(),
            value: (0..*value_offsets.last().unwrap())
                .map(|_| rng.gen())
                .collect(),
            value_offsets,
            node: (0..nodes).map(|_| rng.gen()).collect(),
        }
    }

    #[inline]
    pub(crate) fn layer(&self, layer: u32) -> u128 {
        self.layer[layer as usize]
    }

    #[inline]
    pub(crate) fn value(&self, layer: u32, label: u32) -> u128 {
        self.value[self.value_offsets[layer as usize] + label as usize]
    }

    #[inline]
    fn term(&self, layer: u32, label: u32, child: u32) -> u128 {
        let v = self.value(layer, label);
        let c = self.node[child as usize];
        let hi = finalize((v >> 64) as u64 ^ (c >> 64) as u64);
        let lo = finalize((v as u64).wrapping_add(c as u64).rotate_left(23));
        ((hi as u128) << 64) | lo as u128
    }
}

/// Incrementally maintained summary of a node's outgoing edges.
///
/// `sig` covers the layer and every `(value, child)` pair, `values` covers
/// the labels only. `child_sum` and `child_sq` are exact sums of child ids
/// and of their squares: all edges share one child exactly when
/// `child_sum^2 == degree * child_sq`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct NodeHash {
    pub(crate) sig: u128,
    pub(crate) values: u128,
    pub(crate) child_sum: u64,
    pub(crate) child_sq: u128,
    pub(crate) degree: u32,
}

impl NodeHash {
    pub(crate) fn empty(keys: &SignatureKeys, layer: u32) -> Self {
        NodeHash {
            sig: keys.layer(layer),
            ..NodeHash::default()
        }
    }

    pub(crate) fn add(&mut self, keys: &SignatureKeys, layer: u32, label: u32, child: u32) {
        self.sig = self.sig.wrapping_add(keys.term(layer, label, child));
        self.values = self.values.wrapping_add(keys.value(layer, label));
        self.child_sum += child as u64;
        self.child_sq += (child as u128) * (child as u128);
        self.degree += 1;
    }

    pub(crate) fn remove(&mut self, keys: &SignatureKeys, layer: u32, label: u32, child: u32) {
        self.sig = self.sig.wrapping_sub(keys.term(layer, label, child));
        self.values = self.values.wrapping_sub(keys.value(layer, label));
        self.child_sum -= child as u64;
        self.child_sq -= (child as u128) * (child as u128);
        self.degree -= 1;
    }

    /// True when the node has edges and they all lead to the same child.
    pub(crate) fn single_child(&self) -> bool {
        let s = self.child_sum as u128;
        self.degree > 0 && s * s == self.degree as u128 * self.child_sq
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incremental_matches_scratch() {
        let keys = SignatureKeys::new(7, &[3, 3], 10);
        let mut h = NodeHash::empty(&keys, 0);
        h.add(&keys, 0, 0, 4);
        h.add(&keys, 0, 1, 5);
        h.add(&keys, 0, 2, 4);
        h.remove(&keys, 0, 1, 5);
        h.add(&keys, 0, 1, 4);
        let mut fresh = NodeHash::empty(&keys, 0);
        for l in [1, 0, 2] {
            fresh.add(&keys, 0, l, 4);
        }
        assert_eq!(h, fresh);
        assert!(h.single_child());
        h.remove(&keys, 0, 2, 4);
        h.add(&keys, 0, 2, 6);
        assert!(!h.single_child());
    }

    #[test]
    fn cauchy_schwarz_detects_spread() {
        let keys = SignatureKeys::new(1, &[4], 100);
        let mut h = NodeHash::empty(&keys, 0);
        // 2 + 6 == 4 + 4 in sum, but squares differ
        h.add(&keys, 0, 0, 2);
        h.add(&keys, 0, 1, 6);
        assert!(!h.single_child());
        let mut g = NodeHash::empty(&keys, 0);
        g.add(&keys, 0, 0, 4);
        g.add(&keys, 0, 1, 4);
        assert!(g.single_child());
        assert_ne!(g.sig, h.sig);
        assert_eq!(g.values, h.values);
    }
}
