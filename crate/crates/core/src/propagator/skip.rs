use super::trail::{Trail, Undo};

/// Bookkeeping for layers skipped by live long edges.
///
/// `counts[start][end]` is the number of live long edges skipping exactly the
/// layers `start..=end`. Each start layer keeps a binary max-heap of the end
/// layers of its distinct intervals; entries whose count fell to zero stay in
/// the heap until they surface at the top and are popped. Every heap write is
/// logged so a backtrack restores the arrays slot for slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SkipTracker {
    n: usize,
    counts: Vec<u32>,
    in_heap: Vec<bool>,
    heaps: Vec<Vec<u32>>,
    /// Cached union of all live intervals.
    skipped: Vec<bool>,
}

impl SkipTracker {
    pub(crate) fn new(n: usize) -> Self {
        SkipTracker {
            n,
            counts: vec![0; n * n],
            in_heap: vec![false; n * n],
            heaps: vec![Vec::new(); n],
            skipped: vec![true; n],
        }
    }

    #[inline]
    fn at(&self, start: u32, end: u32) -> usize {
        start as usize * self.n + end as usize
    }

    pub(crate) fn count(&self, start: u32, end: u32) -> u32 {
        self.counts[self.at(start, end)]
    }

    pub(crate) fn is_skipped(&self, layer: usize) -> bool {
        self.skipped[layer]
    }

    pub(crate) fn increment(&mut self, start: u32, end: u32, trail: &mut Trail) {
        let k = self.at(start, end);
        self.counts[k] += 1;
        trail.push(Undo::SkipCount {
            start,
            end,
            delta: 1,
        });
        if !self.in_heap[k] {
            self.heap_push(start, end, trail);
        }
    }

    pub(crate) fn decrement(&mut self, start: u32, end: u32, trail: &mut Trail) {
        let k = self.at(start, end);
        debug_assert!(self.counts[k] > 0);
        self.counts[k] -= 1;
        trail.push(Undo::SkipCount {
            start,
            end,
            delta: -1,
        });
    }

    /// Untrailed increment used while building the initial state.
    pub(crate) fn seed(&mut self, start: u32, end: u32) {
        let k = self.at(start, end);
        self.counts[k] += 1;
        if !self.in_heap[k] {
            let mut scratch = Trail::default();
            self.heap_push(start, end, &mut scratch);
        }
    }

    /// Largest live end layer among intervals starting at `start`.
    fn top(&mut self, start: u32, trail: &mut Trail) -> Option<u32> {
        loop {
            let &end = self.heaps[start as usize].first()?;
            if self.count(start, end) > 0 {
                return Some(end);
            }
            self.heap_pop(start, trail);
        }
    }

    /// Recomputes the union from the heap tops. Returns the layers that
    /// stopped being skipped and the ones that started being skipped.
    pub(crate) fn refresh_union(&mut self, trail: &mut Trail) -> (Vec<usize>, Vec<usize>) {
        let mut left = Vec::new();
        let mut entered = Vec::new();
        let mut reach: i64 = -1;
        for layer in 0..self.n {
            if let Some(end) = self.top(layer as u32, trail) {
                reach = reach.max(end as i64);
            }
            let now = reach >= layer as i64;
            let was = self.skipped[layer];
            if now != was {
                trail.push(Undo::Skipped {
                    layer: layer as u32,
                    was,
                });
                self.skipped[layer] = now;
                if was {
                    left.push(layer);
                } else {
                    entered.push(layer);
                }
            }
        }
        (left, entered)
    }

    pub(crate) fn undo(&mut self, undo: Undo) {
        match undo {
            Undo::SkipCount { start, end, delta } => {
                let k = self.at(start, end);
                self.counts[k] = (self.counts[k] as i64 - delta as i64) as u32;
            }
            Undo::HeapPushed { layer } => {
                let end = self.heaps[layer as usize].pop().expect("heap push to undo");
                let k = self.at(layer, end);
                self.in_heap[k] = false;
            }
            Undo::HeapPopped { layer, end } => {
                self.heaps[layer as usize].push(end);
                let k = self.at(layer, end);
                self.in_heap[k] = true;
            }
            Undo::HeapSwapped { layer, a, b } => {
                self.heaps[layer as usize].swap(a as usize, b as usize)
            }
            Undo::Skipped { layer, was } => self.skipped[layer as usize] = was,
            _ => unreachable!("not a skip record"),
        }
    }

    fn heap_push(&mut self, layer: u32, end: u32, trail: &mut Trail) {
        let k = self.at(layer, end);
        self.in_heap[k] = true;
        let heap = &mut self.heaps[layer as usize];
        heap.push(end);
        trail.push(Undo::HeapPushed { layer });
        let mut i = heap.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 2;
            if heap[parent] >= heap[i] {
                break;
            }
            heap.swap(parent, i);
            trail.push(Undo::HeapSwapped {
                layer,
                a: parent as u32,
                b: i as u32,
            });
            i = parent;
        }
    }

    fn heap_pop(&mut self, layer: u32, trail: &mut Trail) {
        let heap = &mut self.heaps[layer as usize];
        let last = heap.len() - 1;
        if last > 0 {
            heap.swap(0, last);
            trail.push(Undo::HeapSwapped {
                layer,
                a: 0,
                b: last as u32,
            });
        }
        let end = heap.pop().expect("non-empty heap");
        trail.push(Undo::HeapPopped { layer, end });
        let mut i = 0;
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut big = i;
            if l < heap.len() && heap[l] > heap[big] {
                big = l;
            }
            if r < heap.len() && heap[r] > heap[big] {
                big = r;
            }
            if big == i {
                break;
            }
            heap.swap(i, big);
            trail.push(Undo::HeapSwapped {
                layer,
                a: i as u32,
                b: big as u32,
            });
            i = big;
        }
        let k = self.at(layer, end);
        self.in_heap[k] = false;
    }

    /// Full rescan check of the heaps and counters against `expected`
    /// interval counts.
    pub(crate) fn check(&self, expected: &[u32]) -> Result<(), String> {
        if expected != self.counts.as_slice() {
            return Err("skip counters disagree with live long edges".into());
        }
        for (start, heap) in self.heaps.iter().enumerate() {
            for i in 1..heap.len() {
                if heap[(i - 1) / 2] < heap[i] {
                    return Err(format!("heap {start} violates the heap order"));
                }
            }
            for end in 0..self.n {
                let k = start * self.n + end;
                let present = heap.iter().filter(|&&j| j as usize == end).count();
                if present != usize::from(self.in_heap[k]) {
                    return Err(format!("heap {start} membership flag wrong for {end}"));
                }
                if self.counts[k] > 0 && !self.in_heap[k] {
                    return Err(format!(
                        "live interval [{start},{end}] missing from its heap"
                    ));
                }
            }
        }
        let mut union = vec![false; self.n];
        for start in 0..self.n {
            for end in start..self.n {
                if self.counts[start * self.n + end] > 0 {
                    union[start..=end].iter_mut().for_each(|x| *x = true);
                }
            }
        }
        if union != self.skipped {
            return Err("cached union of skipped layers is stale".into());
        }
        Ok(())
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }
}
