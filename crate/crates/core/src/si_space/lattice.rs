//! Finite boxes of lattice points in Z^n, n in {1, 2}.

use serde::{Deserialize, Serialize};

/// Lattice point; the second coordinate is 0 when n = 1.
pub type Lattice = [i64; 2];

/// Axis-aligned box `lo[a] ..= lo[a] + len[a] - 1` in Z^n, row-major with axis 0 outermost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub n: usize,
    pub lo: Lattice,
    pub len: [usize; 2],
}

impl Window {
    /// `[lo, hi]^n`.
    pub fn cube(n: usize, lo: i64, hi: i64) -> Self {
        assert!(n == 1 || n == 2, "dimension must be 1 or 2");
        let l = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
        if n == 1 {
            Self { n, lo: [lo, 0], len: [l, 1] }
        } else {
            Self { n, lo: [lo, lo], len: [l, l] }
        }
    }

    /// `[-k, k]^n`.
    pub fn centered(n: usize, k: i64) -> Self {
        Self::cube(n, -k, k)
    }

    pub fn from_bounds(n: usize, lo: Lattice, hi: Lattice) -> Self {
        let len0 = if hi[0] >= lo[0] { (hi[0] - lo[0] + 1) as usize } else { 0 };
        if n == 1 {
            return Self { n, lo: [lo[0], 0], len: [len0, 1] };
        }
        let len1 = if hi[1] >= lo[1] { (hi[1] - lo[1] + 1) as usize } else { 0 };
        Self { n, lo, len: [len0, len1] }
    }

    pub fn size(&self) -> usize {
        self.len[0] * self.len[1]
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    pub fn hi(&self, axis: usize) -> i64 {
        self.lo[axis] + self.len[axis] as i64 - 1
    }

    pub fn index(&self, k: Lattice) -> Option<usize> {
        let d0 = k[0] - self.lo[0];
        let d1 = k[1] - self.lo[1];
        if d0 < 0 || d1 < 0 || d0 as usize >= self.len[0] || d1 as usize >= self.len[1] {
            return None;
        }
        Some(d0 as usize * self.len[1] + d1 as usize)
    }

    pub fn point(&self, idx: usize) -> Lattice {
        let d0 = idx / self.len[1];
        let d1 = idx % self.len[1];
        [self.lo[0] + d0 as i64, self.lo[1] + d1 as i64]
    }

    pub fn points(&self) -> impl Iterator<Item = Lattice> + '_ {
        (0..self.size()).map(move |i| self.point(i))
    }

    /// Smallest window containing both.
    pub fn union(&self, other: &Window) -> Window {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = [self.lo[0].min(other.lo[0]), self.lo[1].min(other.lo[1])];
        let hi = [self.hi(0).max(other.hi(0)), self.hi(1).max(other.hi(1))];
        Window::from_bounds(self.n, lo, hi)
    }

    /// Sup-norm distance of `k` to the window's outer layer is zero.
    pub fn on_boundary(&self, k: Lattice) -> bool {
        (0..self.n).any(|a| k[a] == self.lo[a] || k[a] == self.hi(a))
    }
}

/// Sup norm of a lattice point.
pub fn sup_norm(n: usize, k: Lattice) -> i64 {
    if n == 1 {
        k[0].abs()
    } else {
        k[0].abs().max(k[1].abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let w = Window::from_bounds(2, [-2, 3], [1, 5]);
        assert_eq!(w.size(), 12);
        for i in 0..w.size() {
            assert_eq!(w.index(w.point(i)), Some(i));
        }
        assert_eq!(w.index([2, 3]), None);
    }

    #[test]
    fn one_dimensional_second_axis_is_zero() {
        let w = Window::centered(1, 3);
        assert_eq!(w.size(), 7);
        assert_eq!(w.point(0), [-3, 0]);
        assert_eq!(w.index([0, 1]), None);
    }
}
