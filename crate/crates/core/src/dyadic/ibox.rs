use serde::{Deserialize, Serialize};

/// Closed axis-aligned box with integer corners on an implicit grid.
///
/// An axis with `lo == hi` is degenerate; the relative interior is open on
/// every other axis. Dyadic faces at a common grid level are `IBox`es.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl IBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        debug_assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b));
        IBox { lo, hi }
    }

    pub fn point(p: Vec<i64>) -> Self {
        IBox {
            hi: p.clone(),
            lo: p,
        }
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    /// Number of non-degenerate axes.
    pub fn dim(&self) -> usize {
        self.lo.iter().zip(&self.hi).filter(|(a, b)| a < b).count()
    }

    pub fn free_mask(&self) -> u32 {
        let mut m = 0;
        for i in 0..self.n() {
            if self.lo[i] < self.hi[i] {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn contains(&self, other: &IBox) -> bool {
        (0..self.n()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn contains_point(&self, p: &[i64]) -> bool {
        (0..self.n()).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }

    pub fn intersects(&self, other: &IBox) -> bool {
        (0..self.n()).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i])
    }

    pub fn intersection(&self, other: &IBox) -> Option<IBox> {
        if !self.intersects(other) {
            return None;
        }
        let lo = (0..self.n()).map(|i| self.lo[i].max(other.lo[i])).collect();
        let hi = (0..self.n()).map(|i| self.hi[i].min(other.hi[i])).collect();
        Some(IBox { lo, hi })
    }

    /// Whether `other` meets the relative interior of `self`.
    pub fn meets_relint(&self, other: &IBox) -> bool {
        (0..self.n()).all(|i| {
            if self.lo[i] < self.hi[i] {
                other.lo[i] < self.hi[i] && other.hi[i] > self.lo[i]
            } else {
                other.lo[i] <= self.lo[i] && self.lo[i] <= other.hi[i]
            }
        })
    }

    /// Whether the open boxes (interiors in the ambient space) intersect.
    pub fn interiors_meet(&self, other: &IBox) -> bool {
        (0..self.n()).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i])
    }

    /// Exact ℓ∞ gap between two boxes, in grid units.
    pub fn linf_gap(&self, other: &IBox) -> i64 {
        (0..self.n())
            .map(|i| {
                (other.lo[i] - self.hi[i])
                    .max(self.lo[i] - other.hi[i])
                    .max(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Expands every axis by `by` grid units on both sides.
    pub fn expand(&self, by: i64) -> IBox {
        IBox {
            lo: self.lo.iter().map(|v| v - by).collect(),
            hi: self.hi.iter().map(|v| v + by).collect(),
        }
    }

    /// Rescales to a finer grid, `shift` levels down.
    pub fn refine(&self, shift: u32) -> IBox {
        IBox {
            lo: self.lo.iter().map(|v| v << shift).collect(),
            hi: self.hi.iter().map(|v| v << shift).collect(),
        }
    }

    /// The facets in the box's own affine span: for each free axis, the two
    /// boxes obtained by collapsing it to its low or high end.
    pub fn facets(&self) -> Vec<IBox> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            if self.lo[i] < self.hi[i] {
                let mut a = self.clone();
                a.hi[i] = a.lo[i];
                out.push(a);
                let mut b = self.clone();
                b.lo[i] = b.hi[i];
                out.push(b);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relint_of_edge() {
        let edge = IBox::new(vec![0, 0], vec![2, 0]);
        let mid = IBox::point(vec![1, 0]);
        let end = IBox::point(vec![2, 0]);
        assert!(edge.meets_relint(&mid));
        assert!(!edge.meets_relint(&end));
        assert_eq!(edge.dim(), 1);
        assert_eq!(edge.facets().len(), 2);
    }

    #[test]
    fn gaps() {
        let a = IBox::new(vec![0, 0], vec![1, 1]);
        let b = IBox::new(vec![5, 0], vec![6, 1]);
        assert_eq!(a.linf_gap(&b), 4);
        assert_eq!(a.linf_gap(&a), 0);
    }
}
