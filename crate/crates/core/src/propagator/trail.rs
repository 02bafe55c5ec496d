use crate::dyn_reduce::NodeHash;

/// One inverse record. Replaying records newest first restores the exact
/// previous state of every structure they touch.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Undo {
    SupportUnlinked(u32),
    ChildRemoved { node: u32, edge: u32, pos: u32 },
    ParentRemoved { node: u32, edge: u32, pos: u32 },
    ParentPushed { node: u32 },
    EdgeKilled(u32),
    EdgeRetargeted { edge: u32, old: u32 },
    EdgeRedirected(u32),
    NodeKilled(u32),
    NodeHash { node: u32, old: NodeHash },
    SkipCount { start: u32, end: u32, delta: i32 },
    HeapPushed { layer: u32 },
    HeapPopped { layer: u32, end: u32 },
    HeapSwapped { layer: u32, a: u32, b: u32 },
    Skipped { layer: u32, was: bool },
    DomainRemoved { var: u32, label: u32 },
    Failed,
    BranchEdgeRemoval,
    BranchReduceWork,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Trail {
    entries: Vec<Undo>,
    marks: Vec<usize>,
}

impl Trail {
    #[inline]
    pub(crate) fn push(&mut self, undo: Undo) {
        self.entries.push(undo);
    }

    pub(crate) fn mark(&mut self) {
        self.marks.push(self.entries.len());
    }

    pub(crate) fn depth(&self) -> usize {
        self.marks.len()
    }

    pub(crate) fn len(&self) -> usize {
        self.entries.len()
    }

    /// Removes the newest mark and returns the records logged since, newest
    /// first. `None` when there is no mark.
    pub(crate) fn pop_phase(&mut self) -> Option<Vec<Undo>> {
        let mark = self.marks.pop()?;
        let mut tail = self.entries.split_off(mark);
        tail.reverse();
        Some(tail)
    }

    pub(crate) fn clear(&mut self) {
        self.entries.clear();
        self.marks.clear();
    }
}
