use std::cmp::Ordering;

/// A strictly increasing multi-index over coordinates 0..=n, stored as a
/// bitmask. Ordering is lexicographic on the increasing index tuple, which is
/// the canonical basis order used everywhere (including sign conventions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex(u32);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_mask(mask: u32) -> Self {
        MultiIndex(mask)
    }

    /// Builds from a slice of distinct indices (any order).
    pub fn from_indices(indices: &[usize]) -> Self {
        let mut mask = 0u32;
        for &i in indices {
            debug_assert!(i < 32 && mask & (1 << i) == 0);
            mask |= 1 << i;
        }
        MultiIndex(mask)
    }

    pub fn mask(&self) -> u32 {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// Number of indices in this multi-index lying in `mask`.
    pub fn count_in(&self, mask: u32) -> usize {
        (self.0 & mask).count_ones() as usize
    }

    /// Appends index `j` to the wedge e_J /\ e_j: returns the merged index
    /// and the sign of sorting j into place, or None if j is already present.
    pub fn wedge_with(&self, j: usize) -> Option<(MultiIndex, i8)> {
        if self.contains(j) {
            return None;
        }
        let greater = (self.0 >> (j + 1)).count_ones();
        let sign = if greater % 2 == 0 { 1 } else { -1 };
        Some((MultiIndex(self.0 | (1 << j)), sign))
    }

    /// Removes index `j` (which must be present); the sign is that of moving
    /// e_j to the front of the wedge.
    pub fn remove(&self, j: usize) -> (MultiIndex, i8) {
        debug_assert!(self.contains(j));
        let below = (self.0 & ((1u32 << j) - 1)).count_ones();
        let sign = if below % 2 == 0 { 1 } else { -1 };
        (MultiIndex(self.0 & !(1 << j)), sign)
    }

    /// All multi-indices of length k over 0..dim, in lexicographic order.
    pub fn all(dim: usize, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        fn rec(dim: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if current.len() == k {
                out.push(MultiIndex::from_indices(current));
                return;
            }
            for i in start..dim {
                current.push(i);
                rec(dim, k, i + 1, current, out);
                current.pop();
            }
        }
        rec(dim, k, 0, &mut current, &mut out);
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        // Lexicographic on the increasing tuples: compare the lowest set bits
        // first. Equal-length indices with equal masks are equal.
        let mut a = self.0;
        let mut b = other.0;
        loop {
            match (a == 0, b == 0) {
                (true, true) => return Ordering::Equal,
                (true, false) => return Ordering::Less,
                (false, true) => return Ordering::Greater,
                _ => {}
            }
            let la = a.trailing_zeros();
            let lb = b.trailing_zeros();
            match la.cmp(&lb) {
                Ordering::Equal => {
                    a &= a - 1;
                    b &= b - 1;
                }
                other => return other,
            }
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e_{{")?;
        for (pos, i) in self.indices().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
