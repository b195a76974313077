use serde::{Deserialize, Serialize};

use super::{DyadicCube, DyadicScalar};
use crate::scalar::Real;

/// Closed ℓ∞ ball: the axis-parallel cube of half-side `radius` at `center`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinfBall {
    pub center: Vec<DyadicScalar>,
    pub radius: DyadicScalar,
}

impl LinfBall {
    pub fn new(center: Vec<DyadicScalar>, radius: DyadicScalar) -> Self {
        assert!(radius >= DyadicScalar::ZERO, "negative radius");
        LinfBall { center, radius }
    }

    pub fn from_cube(q: &DyadicCube) -> Self {
        let half = q.size().half();
        LinfBall {
            center: q.lower_corner().into_iter().map(|c| c + half).collect(),
            radius: half,
        }
    }

    pub fn n(&self) -> usize {
        self.center.len()
    }

    pub fn diameter(&self) -> DyadicScalar {
        self.radius.mul_pow2(1)
    }

    pub fn lo(&self, i: usize) -> DyadicScalar {
        self.center[i] - self.radius
    }

    pub fn hi(&self, i: usize) -> DyadicScalar {
        self.center[i] + self.radius
    }

    pub fn contains_point(&self, p: &[DyadicScalar]) -> bool {
        (0..self.n()).all(|i| (p[i] - self.center[i]).abs() <= self.radius)
    }

    pub fn contains_ball(&self, other: &LinfBall) -> bool {
        (0..self.n()).all(|i| self.lo(i) <= other.lo(i) && other.hi(i) <= self.hi(i))
    }

    pub fn contains_cube(&self, q: &DyadicCube) -> bool {
        let lo = q.lower_corner();
        let s = q.size();
        (0..self.n()).all(|i| self.lo(i) <= lo[i] && lo[i] + s <= self.hi(i))
    }

    pub fn intersects(&self, other: &LinfBall) -> bool {
        (0..self.n()).all(|i| self.lo(i) <= other.hi(i) && other.lo(i) <= self.hi(i))
    }

    /// The dyadic cube with exactly this extent, if there is one.
    pub fn as_dyadic_cube(&self) -> Option<DyadicCube> {
        if self.radius.is_zero() {
            return None;
        }
        let s = self.diameter();
        let level = s.level();
        if s.numerator() != 1 {
            return None;
        }
        let anchor: Option<Vec<i64>> = (0..self.n()).map(|i| self.lo(i).to_grid(level)).collect();
        anchor.map(|a| DyadicCube::new(level, a))
    }

    pub fn center_real<T: Real>(&self) -> Vec<T> {
        self.center.iter().map(|c| c.to_real()).collect()
    }

    pub fn radius_real<T: Real>(&self) -> T {
        self.radius.to_real()
    }
}
