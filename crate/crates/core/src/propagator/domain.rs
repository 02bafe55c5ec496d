use super::trail::{Trail, Undo};
use crate::dyn_reduce::SignatureKeys;

/// Current domains as membership flags over compile-time label indices,
/// with a running value-set signature per variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct DomainStore {
    present: Vec<Vec<bool>>,
    size: Vec<u32>,
    pub(crate) signature: Vec<u128>,
}

impl DomainStore {
    pub(crate) fn full(sizes: &[usize], keys: &SignatureKeys) -> Self {
        let signature = sizes
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                (0..d as u32).fold(0u128, |acc, l| acc.wrapping_add(keys.value(i as u32, l)))
            })
            .collect();
        DomainStore {
            present: sizes.iter().map(|&d| vec![true; d]).collect(),
            size: sizes.iter().map(|&d| d as u32).collect(),
            signature,
        }
    }

    #[inline]
    pub(crate) fn contains(&self, var: u32, label: u32) -> bool {
        self.present[var as usize][label as usize]
    }

    #[inline]
    pub(crate) fn size(&self, var: u32) -> u32 {
        self.size[var as usize]
    }

    pub(crate) fn labels(&self, var: u32) -> impl Iterator<Item = u32> + '_ {
        self.present[var as usize]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(l, _)| l as u32)
    }

    pub(crate) fn remove(&mut self, var: u32, label: u32, keys: &SignatureKeys, trail: &mut Trail) {
        debug_assert!(self.contains(var, label));
        self.present[var as usize][label as usize] = false;
        self.size[var as usize] -= 1;
        let sig = &mut self.signature[var as usize];
        *sig = sig.wrapping_sub(keys.value(var, label));
        trail.push(Undo::DomainRemoved { var, label });
    }

    pub(crate) fn restore(&mut self, var: u32, label: u32, keys: &SignatureKeys) {
        self.present[var as usize][label as usize] = true;
        self.size[var as usize] += 1;
        let sig = &mut self.signature[var as usize];
        *sig = sig.wrapping_add(keys.value(var, label));
    }
}
