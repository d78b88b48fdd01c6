//! Compact set types for candidates and voters.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported candidate count.
pub const MAX_CANDIDATES: usize = 128;

/// A set of candidate ids in `[0, 128)`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct CandidateSet(u128);

impl CandidateSet {
    pub const EMPTY: CandidateSet = CandidateSet(0);

    pub fn full(m: usize) -> Self {
        debug_assert!(m <= MAX_CANDIDATES);
        if m == MAX_CANDIDATES {
            CandidateSet(u128::MAX)
        } else {
            CandidateSet((1u128 << m) - 1)
        }
    }

    pub fn singleton(c: usize) -> Self {
        CandidateSet(1u128 << c)
    }

    #[inline]
    pub fn bits(self) -> u128 {
        self.0
    }

    #[inline]
    pub fn contains(self, c: usize) -> bool {
        c < MAX_CANDIDATES && self.0 >> c & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, c: usize) {
        self.0 |= 1u128 << c;
    }

    #[inline]
    pub fn remove(&mut self, c: usize) {
        self.0 &= !(1u128 << c);
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        CandidateSet(self.0 & other.0)
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        CandidateSet(self.0 | other.0)
    }

    #[inline]
    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    /// Largest member plus one, or 0 for the empty set.
    pub fn bound(self) -> usize {
        MAX_CANDIDATES - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let c = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(c)
            }
        })
    }
}

impl FromIterator<usize> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = CandidateSet::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

impl From<Vec<usize>> for CandidateSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl From<CandidateSet> for Vec<usize> {
    fn from(s: CandidateSet) -> Self {
        s.iter().collect()
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Fixed-capacity bitset over voter ids.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VoterSet {
    words: Vec<u64>,
}

impl VoterSet {
    pub fn empty(n: usize) -> Self {
        VoterSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `|self ∩ other|` without materialising the intersection.
    #[inline]
    pub fn intersection_len(&self, other: &VoterSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Overwrite `self` with `a ∩ b`.
    #[inline]
    pub fn assign_intersection(&mut self, a: &VoterSet, b: &VoterSet) {
        for ((o, x), y) in self.words.iter_mut().zip(&a.words).zip(&b.words) {
            *o = x & y;
        }
    }

    /// `self \ other` in place.
    #[inline]
    pub fn subtract(&mut self, other: &VoterSet) {
        for (o, x) in self.words.iter_mut().zip(&other.words) {
            *o &= !x;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

impl fmt::Debug for VoterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_set_ops() {
        let a: CandidateSet = [0, 3, 127].into_iter().collect();
        assert_eq!(a.len(), 3);
        assert!(a.contains(127));
        assert!(!a.contains(1));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 3, 127]);
        assert_eq!(a.bound(), 128);
        assert_eq!(CandidateSet::full(5).len(), 5);
        assert_eq!(CandidateSet::full(128).len(), 128);
        assert!(CandidateSet::singleton(3).is_subset(a));
    }

    #[test]
    fn voter_set_ops() {
        let mut a = VoterSet::empty(130);
        a.insert(0);
        a.insert(64);
        a.insert(129);
        let mut b = VoterSet::full(130);
        assert_eq!(b.len(), 130);
        assert_eq!(a.intersection_len(&b), 3);
        b.subtract(&a);
        assert_eq!(b.len(), 127);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
    }
}
