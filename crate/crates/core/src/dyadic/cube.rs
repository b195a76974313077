use serde::{Deserialize, Serialize};

use super::{DyadicScalar, IBox};
use crate::scalar::Real;

/// Closed dyadic cube `∏ [aᵢ·2^level, (aᵢ+1)·2^level]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub anchor: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: i32, anchor: Vec<i64>) -> Self {
        DyadicCube { level, anchor }
    }

    pub fn n(&self) -> usize {
        self.anchor.len()
    }

    /// Side length, which is also the ℓ∞ diameter.
    pub fn size(&self) -> DyadicScalar {
        DyadicScalar::pow2(self.level)
    }

    /// `(size/2)^m`, the cost of this cube in a content cover.
    pub fn cost<T: Real>(&self, m: T) -> T {
        T::pow2(T::lit((self.level - 1) as f64) * m)
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.n();
        (0..1u32 << n)
            .map(|bits| {
                let anchor = (0..n)
                    .map(|i| 2 * self.anchor[i] + ((bits >> i) & 1) as i64)
                    .collect();
                DyadicCube::new(self.level - 1, anchor)
            })
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        self.ancestor(self.level + 1)
    }

    /// The ancestor at `level` (which must be ≥ self.level).
    pub fn ancestor(&self, level: i32) -> DyadicCube {
        assert!(level >= self.level);
        let shift = (level - self.level) as u32;
        let anchor = self
            .anchor
            .iter()
            .map(|a| if shift >= 63 { a.signum().min(0) } else { a >> shift })
            .collect();
        DyadicCube::new(level, anchor)
    }

    /// The cube as an integer box on the grid of `grid_level` ≤ level.
    pub fn ibox(&self, grid_level: i32) -> IBox {
        let shift = (self.level - grid_level) as u32;
        assert!(self.level >= grid_level, "grid coarser than cube");
        IBox {
            lo: self.anchor.iter().map(|a| a << shift).collect(),
            hi: self.anchor.iter().map(|a| (a + 1) << shift).collect(),
        }
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level <= self.level && other.ancestor(self.level) == *self
    }

    pub fn interiors_disjoint(&self, other: &DyadicCube) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    pub fn lower_corner(&self) -> Vec<DyadicScalar> {
        self.anchor
            .iter()
            .map(|a| DyadicScalar::new(*a, self.level))
            .collect()
    }

    pub fn center<T: Real>(&self) -> Vec<T> {
        let s = T::pow2(T::lit(self.level as f64));
        self.anchor
            .iter()
            .map(|a| (T::lit(*a as f64) + T::lit(0.5)) * s)
            .collect()
    }

    /// Lower and upper corner coordinates as floats.
    pub fn bounds<T: Real>(&self) -> (Vec<T>, Vec<T>) {
        let s = T::pow2(T::lit(self.level as f64));
        let lo = self.anchor.iter().map(|a| T::lit(*a as f64) * s).collect();
        let hi = self
            .anchor
            .iter()
            .map(|a| T::lit((*a + 1) as f64) * s)
            .collect();
        (lo, hi)
    }
}

/// The `2^n` children of `q`, halving its size.
pub fn cube_children(q: &DyadicCube) -> Vec<DyadicCube> {
    q.children()
}
