use serde::{Deserialize, Serialize};

use super::{DyadicCube, DyadicScalar, IBox};

/// A closed face of a dyadic cube.
///
/// `free_axes` has a bit per axis along which the face extends; on every
/// other axis, `fixed_sides` selects the upper (bit set) or lower endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicFace {
    pub cube: DyadicCube,
    pub free_axes: u32,
    pub fixed_sides: u32,
}

/// Outcome of [`face_relation`], read as "Q … Qp".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceRelation {
    /// Q ⊋ Qp with Qp inside the relative boundary of Q.
    Covers,
    CoveredBy,
    Equal,
    /// Qp meets the relative interior of Q without covering it.
    InteriorOverlapSmaller,
    BoundaryTouch,
    Disjoint,
}

impl DyadicFace {
    pub fn new(cube: DyadicCube, free_axes: u32, fixed_sides: u32) -> Self {
        let n = cube.n();
        let full = if n >= 32 { u32::MAX } else { (1u32 << n) - 1 };
        DyadicFace {
            cube,
            free_axes: free_axes & full,
            fixed_sides: fixed_sides & !free_axes & full,
        }
    }

    /// The cube as its own `n`-dimensional face.
    pub fn full(cube: DyadicCube) -> Self {
        let n = cube.n();
        DyadicFace::new(cube, (1u32 << n) - 1, 0)
    }

    pub fn n(&self) -> usize {
        self.cube.n()
    }

    pub fn dim(&self) -> usize {
        self.free_axes.count_ones() as usize
    }

    /// Diameter: the carrying cube's side for dimension ≥ 1, zero for vertices.
    pub fn size(&self) -> DyadicScalar {
        if self.dim() == 0 {
            DyadicScalar::ZERO
        } else {
            self.cube.size()
        }
    }

    pub fn ibox(&self, grid_level: i32) -> IBox {
        let mut b = self.cube.ibox(grid_level);
        for i in 0..self.n() {
            if self.free_axes >> i & 1 == 0 {
                if self.fixed_sides >> i & 1 == 1 {
                    b.lo[i] = b.hi[i];
                } else {
                    b.hi[i] = b.lo[i];
                }
            }
        }
        b
    }

    /// The same closed set, written with every fixed side at the lower end
    /// of a (possibly neighbouring) carrying cube.
    pub fn canonical(&self) -> DyadicFace {
        let mut anchor = self.cube.anchor.clone();
        for (i, a) in anchor.iter_mut().enumerate() {
            if self.fixed_sides >> i & 1 == 1 {
                *a += 1;
            }
        }
        DyadicFace {
            cube: DyadicCube::new(self.cube.level, anchor),
            free_axes: self.free_axes,
            fixed_sides: 0,
        }
    }

    /// Codimension-one faces within this face's span.
    pub fn facets(&self) -> Vec<DyadicFace> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            if self.free_axes >> i & 1 == 1 {
                for side in 0..2u32 {
                    out.push(DyadicFace::new(
                        self.cube.clone(),
                        self.free_axes & !(1 << i),
                        self.fixed_sides | (side << i),
                    ));
                }
            }
        }
        out
    }

    /// Lower corner and upper corner as exact dyadic points.
    pub fn bounds(&self) -> (Vec<DyadicScalar>, Vec<DyadicScalar>) {
        let l = self.cube.level;
        let b = self.ibox(l);
        (
            b.lo.iter().map(|v| DyadicScalar::new(*v, l)).collect(),
            b.hi.iter().map(|v| DyadicScalar::new(*v, l)).collect(),
        )
    }
}

/// All `d`-dimensional closed faces of `q`, `2^(n−d)·C(n,d)` of them.
pub fn enumerate_faces(q: &DyadicCube, d: usize) -> Vec<DyadicFace> {
    let n = q.n();
    assert!(d <= n, "face dimension exceeds ambient dimension");
    let mut out = Vec::new();
    for free in 0..1u32 << n {
        if free.count_ones() as usize != d {
            continue;
        }
        let fixed = ((1u32 << n) - 1) & !free;
        // iterate over all subsets of the fixed axes
        let mut sides = fixed;
        loop {
            out.push(DyadicFace::new(q.clone(), free, sides));
            if sides == 0 {
                break;
            }
            sides = (sides - 1) & fixed;
        }
    }
    out.sort();
    out
}

/// Exact classification of the pair `(q, qp)`.
///
/// Checks run in priority order: equal, q ⊆ qp, qp meets relint q,
/// qp ⊆ q, closed sets touch, disjoint. With this order every pair where
/// qp meets the relative interior of q without covering it is reported as
/// `InteriorOverlapSmaller`; for dyadic faces this forces qp to be strictly
/// smaller than q.
pub fn face_relation(q: &DyadicFace, qp: &DyadicFace) -> FaceRelation {
    assert_eq!(q.n(), qp.n(), "ambient dimensions differ");
    let g = q.cube.level.min(qp.cube.level);
    let a = q.ibox(g);
    let b = qp.ibox(g);
    if a == b {
        FaceRelation::Equal
    } else if b.contains(&a) {
        FaceRelation::CoveredBy
    } else if a.meets_relint(&b) {
        FaceRelation::InteriorOverlapSmaller
    } else if a.contains(&b) {
        FaceRelation::Covers
    } else if a.intersects(&b) {
        FaceRelation::BoundaryTouch
    } else {
        FaceRelation::Disjoint
    }
}

/// A closed set that [`linf_distance`] can measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Point(Vec<DyadicScalar>),
    Face(DyadicFace),
}

impl Shape {
    fn intervals(&self) -> Vec<(DyadicScalar, DyadicScalar)> {
        match self {
            Shape::Point(p) => p.iter().map(|v| (*v, *v)).collect(),
            Shape::Face(f) => {
                let (lo, hi) = f.bounds();
                lo.into_iter().zip(hi).collect()
            }
        }
    }
}

impl From<DyadicFace> for Shape {
    fn from(f: DyadicFace) -> Self {
        Shape::Face(f)
    }
}

impl From<DyadicCube> for Shape {
    fn from(c: DyadicCube) -> Self {
        Shape::Face(DyadicFace::full(c))
    }
}

/// Exact ℓ∞ distance between two closed sets; zero iff they intersect.
pub fn linf_distance(a: &Shape, b: &Shape) -> DyadicScalar {
    let ia = a.intervals();
    let ib = b.intervals();
    assert_eq!(ia.len(), ib.len(), "ambient dimensions differ");
    ia.iter()
        .zip(&ib)
        .map(|(&(alo, ahi), &(blo, bhi))| (blo - ahi).max(alo - bhi).max(DyadicScalar::ZERO))
        .max()
        .unwrap_or(DyadicScalar::ZERO)
}
