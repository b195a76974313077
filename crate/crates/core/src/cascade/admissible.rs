use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{faces_from, grid_box};
use crate::content::ContentParams;
use crate::cover::CoverFamily;
use crate::dyadic::{DyadicFace, DyadicScalar, IBox};
use crate::scalar::Real;

/// Faces that can feed material into a target face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSet {
    pub target: DyadicFace,
    pub members: Vec<DyadicFace>,
    pub c_adm_observed: usize,
    /// Every member has size in `[s/2, s]`.
    pub sizes_hold: bool,
    /// Every member is within `1.5·s` of the target.
    pub distance_holds: bool,
    pub smallest_ratio: f64,
    pub largest_distance_ratio: f64,
}

/// The faces of a cover that the cascade can ever activate, with the
/// "material can flow from F into G" relation between them.
#[derive(Clone, Debug)]
pub struct FacePool {
    pub faces: Vec<DyadicFace>,
    boxes: Vec<IBox>,
    grid: i32,
    index: BTreeMap<DyadicFace, usize>,
    /// `preds[g]`: faces `f` with an edge `f → g`.
    preds: Vec<Vec<usize>>,
}

/// `face` is a face of `cube` as sets.
fn is_face_of(face: &IBox, cube: &IBox) -> bool {
    (0..face.n()).all(|i| {
        if face.lo[i] < face.hi[i] {
            face.lo[i] == cube.lo[i] && face.hi[i] == cube.hi[i]
        } else {
            face.lo[i] == cube.lo[i] || face.lo[i] == cube.hi[i]
        }
    })
}

impl FacePool {
    /// Faces of dimension at least `⌈m⌉` of the cover cubes, keeping only
    /// those that are a face of every cover cube containing them.
    pub fn build<T: Real>(cover: &CoverFamily, params: &ContentParams<T>) -> FacePool {
        let cubes = cover.cubes();
        let grid = cubes.iter().map(|c| c.level).min().unwrap_or(0);
        let cube_boxes: Vec<IBox> = cubes.iter().map(|c| c.ibox(grid)).collect();
        let mut set = BTreeSet::new();
        for c in &cubes {
            for f in faces_from(c, params.ceil_m()) {
                set.insert(f);
            }
        }
        let mut faces = Vec::new();
        for f in set {
            let b = grid_box(&f, grid);
            let ok = cube_boxes
                .iter()
                .filter(|cb| cb.contains(&b))
                .all(|cb| is_face_of(&b, cb));
            if ok {
                faces.push(f);
            }
        }
        let boxes: Vec<IBox> = faces.iter().map(|f| grid_box(f, grid)).collect();
        let facets: Vec<Vec<IBox>> = boxes.iter().map(|b| b.facets()).collect();
        let mut preds = vec![Vec::new(); faces.len()];
        for (fi, f) in faces.iter().enumerate() {
            for (gi, g) in faces.iter().enumerate() {
                if fi == gi || f.size() > g.size() || !boxes[fi].intersects(&boxes[gi]) {
                    continue;
                }
                if facets[fi].iter().any(|e| boxes[gi].meets_relint(e)) {
                    preds[gi].push(fi);
                }
            }
        }
        let index = faces.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        FacePool {
            faces,
            boxes,
            grid,
            index,
            preds,
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn position(&self, f: &DyadicFace) -> Option<usize> {
        self.index.get(&f.canonical()).copied()
    }

    pub fn grid(&self) -> i32 {
        self.grid
    }

    pub fn ibox(&self, i: usize) -> &IBox {
        &self.boxes[i]
    }

    /// Indices of every face with an admissible path into `target`.
    pub fn admissible_indices(&self, target: usize) -> Vec<usize> {
        let mut seen = BTreeSet::from([target]);
        let mut queue = VecDeque::from([target]);
        while let Some(g) = queue.pop_front() {
            for &f in &self.preds[g] {
                if seen.insert(f) {
                    queue.push_back(f);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn admissible(&self, target: &DyadicFace) -> Option<AdmissibleSet> {
        let t = self.position(target)?;
        let idx = self.admissible_indices(t);
        let s = self.faces[t].size();
        let unit = DyadicScalar::pow2(self.grid);
        let mut smallest = 1.0f64;
        let mut farthest = 0.0f64;
        for &i in &idx {
            let ratio = self.faces[i].size().to_f64() / s.to_f64();
            smallest = smallest.min(ratio);
            let gap = unit.mul_int(self.boxes[i].linf_gap(&self.boxes[t])).to_f64();
            farthest = farthest.max(gap / s.to_f64());
        }
        Some(AdmissibleSet {
            target: self.faces[t].clone(),
            members: idx.iter().map(|&i| self.faces[i].clone()).collect(),
            c_adm_observed: idx.len(),
            sizes_hold: smallest >= 0.5 && idx.iter().all(|&i| self.faces[i].size() <= s),
            distance_holds: farthest <= 1.5,
            smallest_ratio: smallest,
            largest_distance_ratio: farthest,
        })
    }
}

/// Admissible set of `q` within the faces of `cover`; `None` when `q` is
/// not one of the cover's activatable faces.
pub fn admissible_set<T: Real>(
    q: &DyadicFace,
    cover: &CoverFamily,
    params: &ContentParams<T>,
) -> Option<AdmissibleSet> {
    FacePool::build(cover, params).admissible(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::CoverTag;
    use crate::dyadic::DyadicCube;

    #[test]
    fn lone_cube() {
        let cover = CoverFamily::from_cubes(vec![DyadicCube::new(1, vec![0, 0])], CoverTag::Qp);
        let p = ContentParams::new(1.5, 2).unwrap();
        let q = DyadicFace::full(DyadicCube::new(1, vec![0, 0]));
        let a = admissible_set(&q, &cover, &p).unwrap();
        assert_eq!(a.members, vec![q]);
        assert!(a.sizes_hold && a.distance_holds);
    }

    #[test]
    fn smaller_neighbour_feeds_larger() {
        let big = DyadicCube::new(1, vec![1, 0]);
        let small = DyadicCube::new(0, vec![1, 0]);
        let cover = CoverFamily::from_cubes(vec![big.clone(), small.clone()], CoverTag::Qp);
        let p = ContentParams::new(0.5, 2).unwrap();
        let pool = FacePool::build(&cover, &p);
        let a = pool.admissible(&DyadicFace::full(big)).unwrap();
        // the small cube's right edge lies inside the big cube's left edge and
        // is not activatable; its other faces touch the big cube's edge
        assert!(a.members.iter().all(|f| f.size() <= DyadicScalar::from_int(2)));
        assert!(a.distance_holds);
        let b = pool.admissible(&DyadicFace::full(small)).unwrap();
        assert_eq!(b.members.len(), 1);
    }
}
