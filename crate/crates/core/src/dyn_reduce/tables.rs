use std::collections::HashMap;

use super::NodeHash;

/// Sorted contents of both tables.
pub(crate) type TablesView = (Vec<(u128, u32)>, Vec<(u32, u128, u32)>);

/// Persistent lookup tables over live inner nodes.
///
/// `unique` buckets nodes by the low 64 bits of their signature and keeps the
/// full 128-bit signature next to each id, so edge-by-edge comparison only
/// happens on a full match. `same_child` holds the nodes whose edges all
/// share one child, keyed by layer and the signature of their value set.
#[derive(Clone, Debug, Default)]
pub(crate) struct ReductionTables {
    unique: HashMap<u64, Vec<(u128, u32)>>,
    same_child: HashMap<(u32, u128), Vec<u32>>,
}

fn drop_from<T: PartialEq>(bucket: &mut Vec<T>, item: &T) {
    let pos = bucket
        .iter()
        .position(|x| x == item)
        .expect("entry present in table");
    bucket.swap_remove(pos);
}

impl ReductionTables {
    pub(crate) fn insert(&mut self, node: u32, layer: u32, hash: &NodeHash) {
        self.unique
            .entry(hash.sig as u64)
            .or_default()
            .push((hash.sig, node));
        if hash.single_child() {
            self.same_child
                .entry((layer, hash.values))
                .or_default()
                .push(node);
        }
    }

    pub(crate) fn remove(&mut self, node: u32, layer: u32, hash: &NodeHash) {
        let key = hash.sig as u64;
        let bucket = self.unique.get_mut(&key).expect("bucket present");
        drop_from(bucket, &(hash.sig, node));
        if bucket.is_empty() {
            self.unique.remove(&key);
        }
        if hash.single_child() {
            let key = (layer, hash.values);
            let bucket = self.same_child.get_mut(&key).expect("bucket present");
            drop_from(bucket, &node);
            if bucket.is_empty() {
                self.same_child.remove(&key);
            }
        }
    }

    /// Nodes whose full signature equals `sig`.
    pub(crate) fn matching(&self, sig: u128) -> impl Iterator<Item = u32> + '_ {
        self.unique
            .get(&(sig as u64))
            .into_iter()
            .flatten()
            .filter(move |&&(full, _)| full == sig)
            .map(|&(_, u)| u)
    }

    /// Single-child nodes of `layer` whose value set hashes to `values`.
    pub(crate) fn same_child(&self, layer: u32, values: u128) -> Vec<u32> {
        self.same_child
            .get(&(layer, values))
            .cloned()
            .unwrap_or_default()
    }

    /// Order-independent view used to compare states.
    pub(crate) fn view(&self) -> TablesView {
        let mut unique: Vec<_> = self.unique.values().flatten().copied().collect();
        unique.sort_unstable();
        let mut same: Vec<_> = self
            .same_child
            .iter()
            .flat_map(|(&(l, v), nodes)| nodes.iter().map(move |&u| (l, v, u)))
            .collect();
        same.sort_unstable();
        (unique, same)
    }
}
