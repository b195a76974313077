use serde::{Deserialize, Serialize};

use crate::dyadic::VoxelSet;
use crate::scalar::Real;

/// Closed axis-aligned box with real corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> RBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Self {
        RBox { lo, hi }
    }

    /// The closed ℓ∞ ball `B(x, r)`.
    pub fn ball(x: &[T], r: T) -> Self {
        RBox {
            lo: x.iter().map(|c| *c - r).collect(),
            hi: x.iter().map(|c| *c + r).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn intersect(&self, other: &RBox<T>) -> Option<RBox<T>> {
        let mut lo = Vec::with_capacity(self.n());
        let mut hi = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let a = self.lo[i].max(other.lo[i]);
            let b = self.hi[i].min(other.hi[i]);
            if a > b {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        Some(RBox { lo, hi })
    }

    pub fn contains_point(&self, p: &[T]) -> bool {
        (0..self.n()).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }
}

/// ℓ∞ distance between two points.
pub fn linf<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), T::max)
}

/// A set given as closed boxes together with isolated points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub n: usize,
    pub boxes: Vec<RBox<T>>,
    pub points: Vec<Vec<T>>,
}

impl<T: Real> Region<T> {
    pub fn empty(n: usize) -> Self {
        Region {
            n,
            boxes: Vec::new(),
            points: Vec::new(),
        }
    }

    pub fn from_points(n: usize, points: Vec<Vec<T>>) -> Self {
        Region {
            n,
            boxes: Vec::new(),
            points,
        }
    }

    pub fn from_voxels(x: &VoxelSet) -> Self {
        let boxes = x
            .cubes()
            .map(|c| {
                let (lo, hi) = c.bounds();
                RBox { lo, hi }
            })
            .collect();
        Region {
            n: x.n(),
            boxes,
            points: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty() && self.points.is_empty()
    }

    /// Intersection with the union of `clip` boxes.
    pub fn clip(&self, clip: &[RBox<T>]) -> Region<T> {
        let mut boxes = Vec::new();
        for b in &self.boxes {
            for c in clip {
                if let Some(i) = b.intersect(c) {
                    boxes.push(i);
                }
            }
        }
        let points = self
            .points
            .iter()
            .filter(|p| clip.iter().any(|c| c.contains_point(p)))
            .cloned()
            .collect();
        Region {
            n: self.n,
            boxes,
            points,
        }
    }

    /// The part inside the closed ball `B(x, r)`.
    pub fn in_ball(&self, x: &[T], r: T) -> Region<T> {
        self.clip(&[RBox::ball(x, r)])
    }

    /// The part on the sphere `S(x, r)`, the boundary of the ℓ∞ ball.
    pub fn on_sphere(&self, x: &[T], r: T) -> Region<T> {
        let mut facets = Vec::with_capacity(2 * self.n);
        for i in 0..self.n {
            for sign in [-T::one(), T::one()] {
                let mut f = RBox::ball(x, r);
                let c = x[i] + sign * r;
                f.lo[i] = c;
                f.hi[i] = c;
                facets.push(f);
            }
        }
        let mut out = self.clip(&facets);
        // points are kept by exact distance so rounding in x ± r cannot drop them
        out.points = self
            .points
            .iter()
            .filter(|p| linf(p, x) == r)
            .cloned()
            .collect();
        out
    }

    /// The part in the closed annulus `r1 ≤ d(x, ·) ≤ r2`.
    pub fn in_annulus(&self, x: &[T], r1: T, r2: T) -> Region<T> {
        let mut slabs = Vec::with_capacity(2 * self.n);
        for i in 0..self.n {
            let mut lower = RBox::ball(x, r2);
            lower.hi[i] = x[i] - r1;
            let mut upper = RBox::ball(x, r2);
            upper.lo[i] = x[i] + r1;
            slabs.push(lower);
            slabs.push(upper);
        }
        let mut out = self.clip(&slabs);
        out.points = self
            .points
            .iter()
            .filter(|p| {
                let d = linf(p, x);
                r1 <= d && d <= r2
            })
            .cloned()
            .collect();
        out
    }

    /// Points outside every open-complement ball `B(cᵢ, rᵢ)`; boxes are
    /// replaced by the closure of their remainder.
    pub fn outside_balls(&self, balls: &[(Vec<T>, T)]) -> Region<T> {
        let points = self
            .points
            .iter()
            .filter(|p| balls.iter().all(|(c, r)| linf(p, c) > *r))
            .cloned()
            .collect();
        let mut boxes = self.boxes.clone();
        for (c, r) in balls {
            let inner = RBox::ball(c, *r);
            let mut next = Vec::new();
            for b in boxes {
                if b.intersect(&inner).is_none() {
                    next.push(b);
                    continue;
                }
                // closed slabs of b outside the open ball
                for i in 0..self.n {
                    let mut lower = b.clone();
                    lower.hi[i] = lower.hi[i].min(inner.lo[i]);
                    if lower.lo[i] <= lower.hi[i] && lower.hi[i] <= inner.lo[i] {
                        next.push(lower);
                    }
                    let mut upper = b.clone();
                    upper.lo[i] = upper.lo[i].max(inner.hi[i]);
                    if upper.lo[i] <= upper.hi[i] && upper.lo[i] >= inner.hi[i] {
                        next.push(upper);
                    }
                }
            }
            boxes = next;
        }
        Region {
            n: self.n,
            boxes,
            points,
        }
    }

    /// Critical distances from `x`: where box faces or points sit.
    pub fn distances_from(&self, x: &[T]) -> Vec<T> {
        let mut out: Vec<T> = self.points.iter().map(|p| linf(p, x)).collect();
        for b in &self.boxes {
            for i in 0..self.n {
                out.push((b.lo[i] - x[i]).abs());
                out.push((b.hi[i] - x[i]).abs());
            }
        }
        out
    }
}
