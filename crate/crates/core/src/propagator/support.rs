use super::graph::{EdgeSlot, NONE};

/// Intrusive doubly linked support lists, one per `(layer, value)`.
///
/// The links live in the edges themselves, so an edge unlinks in constant
/// time and relinks exactly when records are replayed newest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SupportIndex {
    offsets: Vec<usize>,
    pub(crate) heads: Vec<u32>,
}

impl SupportIndex {
    pub(crate) fn new(domain_sizes: impl Iterator<Item = usize>) -> Self {
        let mut offsets = vec![0];
        for d in domain_sizes {
            offsets.push(offsets.last().unwrap() + d);
        }
        let heads = vec![NONE; *offsets.last().unwrap()];
        SupportIndex { offsets, heads }
    }

    #[inline]
    fn slot(&self, layer: u32, label: u32) -> usize {
        self.offsets[layer as usize] + label as usize
    }

    #[inline]
    pub(crate) fn is_supported(&self, layer: u32, label: u32) -> bool {
        self.heads[self.slot(layer, label)] != NONE
    }

    pub(crate) fn head(&self, layer: u32, label: u32) -> u32 {
        self.heads[self.slot(layer, label)]
    }

    /// Pushes `e` at the front of its list; used only while building.
    pub(crate) fn link_front(&mut self, edges: &mut [EdgeSlot], e: u32, layer: u32) {
        let slot = self.slot(layer, edges[e as usize].label);
        let old = self.heads[slot];
        edges[e as usize].sup_prev = NONE;
        edges[e as usize].sup_next = old;
        if old != NONE {
            edges[old as usize].sup_prev = e;
        }
        self.heads[slot] = e;
    }

    /// Unlinks `e`, leaving its own links untouched. Returns true when the
    /// list became empty.
    pub(crate) fn unlink(&mut self, edges: &mut [EdgeSlot], e: u32, layer: u32) -> bool {
        let slot = self.slot(layer, edges[e as usize].label);
        let (prev, next) = (edges[e as usize].sup_prev, edges[e as usize].sup_next);
        if prev == NONE {
            self.heads[slot] = next;
        } else {
            edges[prev as usize].sup_next = next;
        }
        if next != NONE {
            edges[next as usize].sup_prev = prev;
        }
        self.heads[slot] == NONE
    }

    pub(crate) fn relink(&mut self, edges: &mut [EdgeSlot], e: u32, layer: u32) {
        let slot = self.slot(layer, edges[e as usize].label);
        let (prev, next) = (edges[e as usize].sup_prev, edges[e as usize].sup_next);
        if prev == NONE {
            self.heads[slot] = e;
        } else {
            edges[prev as usize].sup_next = e;
        }
        if next != NONE {
            edges[next as usize].sup_prev = e;
        }
    }

    /// Walks the list for `(layer, label)`.
    pub(crate) fn iter<'a>(
        &self,
        edges: &'a [EdgeSlot],
        layer: u32,
        label: u32,
    ) -> impl Iterator<Item = u32> + 'a {
        let mut cur = self.head(layer, label);
        std::iter::from_fn(move || {
            if cur == NONE {
                return None;
            }
            let e = cur;
            cur = edges[e as usize].sup_next;
            Some(e)
        })
    }
}
