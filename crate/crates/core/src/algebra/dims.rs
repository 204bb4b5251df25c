use crate::error::{Error, Result};

/// Ambient parameters: lattices live in R^{n+1}, affine subspaces have
/// dimension d with 1 <= d < n. Coordinates 0..=d span the block acted on by
/// the SL_{d+1} factor; coordinates d+1..=n span the trivial block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    n: usize,
    d: usize,
}

impl Dims {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d >= 1 && d < n {
            Ok(Dims { n, d })
        } else {
            Err(Error::BadDims { n, d })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Ambient dimension n+1.
    pub fn ambient(&self) -> usize {
        self.n + 1
    }

    /// Bitmask of the coordinates 0..=d (the standard SL_{d+1} block).
    pub fn perp_mask(&self) -> u32 {
        (1u32 << (self.d + 1)) - 1
    }

    /// Legal band of the block index i for grade k:
    /// max(0, k+d-n) <= i <= min(d+1, k).
    pub fn block_range(&self, k: usize) -> (usize, usize) {
        let lo = k.saturating_sub(self.n - self.d);
        let hi = (self.d + 1).min(k);
        (lo, hi)
    }
}
