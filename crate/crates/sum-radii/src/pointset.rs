//! A small fixed-universe bitset over point ids, used for balls and coverage.

/// Set of point ids drawn from a fixed universe `0..universe`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    universe: usize,
    bits: Vec<u64>,
}

impl PointSet {
    /// Empty set over `0..universe`.
    pub fn new(universe: usize) -> Self {
        PointSet { universe, bits: vec![0; universe.div_ceil(64)] }
    }

    /// Set containing all of `0..universe`.
    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for p in 0..universe {
            s.insert(p);
        }
        s
    }

    /// Universe size this set was created with.
    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Adds a point.
    pub fn insert(&mut self, p: usize) {
        debug_assert!(p < self.universe);
        self.bits[p / 64] |= 1 << (p % 64);
    }

    /// Removes a point.
    pub fn remove(&mut self, p: usize) {
        debug_assert!(p < self.universe);
        self.bits[p / 64] &= !(1 << (p % 64));
    }

    /// Membership test.
    pub fn contains(&self, p: usize) -> bool {
        debug_assert!(p < self.universe);
        self.bits[p / 64] & (1 << (p % 64)) != 0
    }

    /// Number of points in the set.
    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True iff empty.
    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    /// True iff the sets share at least one point.
    pub fn intersects(&self, other: &PointSet) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    /// Number of shared points.
    pub fn intersection_len(&self, other: &PointSet) -> usize {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// True iff `self` is a subset of `other`.
    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Adds every point of `other`.
    pub fn union_with(&mut self, other: &PointSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    /// Removes every point of `other`.
    pub fn subtract(&mut self, other: &PointSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    /// Keeps only points also in `other`.
    pub fn intersect_with(&mut self, other: &PointSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    /// Iterates member ids in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |p| self.contains(*p))
    }
}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for PointSet {
    /// Collects points; the universe is sized to the largest member + 1.
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let items: Vec<usize> = iter.into_iter().collect();
        let universe = items.iter().max().map_or(0, |m| m + 1);
        let mut s = PointSet::new(universe);
        for p in items {
            s.insert(p);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_algebra() {
        let mut a = PointSet::new(130);
        a.insert(0);
        a.insert(64);
        a.insert(129);
        assert_eq!(a.len(), 3);
        assert!(a.contains(64) && !a.contains(63));

        let mut b = PointSet::new(130);
        b.insert(64);
        assert!(a.intersects(&b));
        assert!(b.is_subset(&a));
        assert_eq!(a.intersection_len(&b), 1);

        a.subtract(&b);
        assert!(!a.contains(64));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 129]);

        a.union_with(&b);
        assert_eq!(a.len(), 3);
        a.intersect_with(&b);
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn full_and_empty() {
        let f = PointSet::full(70);
        assert_eq!(f.len(), 70);
        assert!(!f.is_empty());
        assert!(PointSet::new(70).is_empty());
    }
}
