use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{DyadicCube, IBox};
use crate::error::{Error, Result};

/// Largest ambient dimension accepted anywhere in the engine.
pub const MAX_DIM: usize = 6;

/// A compact set given as a finite union of closed base-level cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVoxels", into = "RawVoxels")]
pub struct VoxelSet {
    n: usize,
    base_level: i32,
    cells: BTreeSet<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct RawVoxels {
    n: usize,
    base_level: i32,
    cells: Vec<Vec<i64>>,
}

impl TryFrom<RawVoxels> for VoxelSet {
    type Error = Error;
    fn try_from(r: RawVoxels) -> Result<Self> {
        VoxelSet::new(r.n, r.base_level, r.cells)
    }
}

impl From<VoxelSet> for RawVoxels {
    fn from(v: VoxelSet) -> Self {
        RawVoxels {
            n: v.n,
            base_level: v.base_level,
            cells: v.cells.into_iter().collect(),
        }
    }
}

impl VoxelSet {
    pub fn new(n: usize, base_level: i32, cells: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Input(format!(
                "dimension {n} outside 1..={MAX_DIM}"
            )));
        }
        let mut set = BTreeSet::new();
        for c in cells {
            if c.len() != n {
                return Err(Error::Input(format!(
                    "cell {c:?} has {} coordinates, expected {n}",
                    c.len()
                )));
            }
            if c.iter().any(|v| v.unsigned_abs() > 1 << 40) {
                return Err(Error::Input(format!("cell {c:?} out of range")));
            }
            set.insert(c);
        }
        Ok(VoxelSet {
            n,
            base_level,
            cells: set,
        })
    }

    pub fn empty(n: usize, base_level: i32) -> Self {
        VoxelSet::new(n, base_level, Vec::new()).expect("valid dimension")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base_level(&self) -> i32 {
        self.base_level
    }

    pub fn cells(&self) -> &BTreeSet<Vec<i64>> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains_cell(&self, c: &[i64]) -> bool {
        self.cells.contains(c)
    }

    pub fn cell_cube(&self, c: &[i64]) -> DyadicCube {
        DyadicCube::new(self.base_level, c.to_vec())
    }

    pub fn cubes(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        self.cells.iter().map(|c| self.cell_cube(c))
    }

    pub fn insert(&mut self, c: Vec<i64>) -> bool {
        assert_eq!(c.len(), self.n);
        self.cells.insert(c)
    }

    /// Bounding box in cell units: `lo` inclusive, `hi` exclusive.
    pub fn bbox(&self) -> Option<IBox> {
        let mut it = self.cells.iter();
        let first = it.next()?;
        let mut lo = first.clone();
        let mut hi: Vec<i64> = first.iter().map(|v| v + 1).collect();
        for c in it {
            for i in 0..self.n {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i] + 1);
            }
        }
        Some(IBox::new(lo, hi))
    }

    /// The cells of this set lying inside `q`.
    pub fn cells_in(&self, q: &DyadicCube) -> Vec<Vec<i64>> {
        if q.level < self.base_level {
            return Vec::new();
        }
        let b = q.ibox(self.base_level);
        let volume: u128 = (0..self.n)
            .map(|i| (b.hi[i] - b.lo[i]) as u128)
            .product();
        if volume <= self.cells.len() as u128 {
            let mut out = Vec::new();
            let mut cur = b.lo.clone();
            loop {
                if self.cells.contains(&cur) {
                    out.push(cur.clone());
                }
                let mut i = 0;
                loop {
                    if i == self.n {
                        return out;
                    }
                    cur[i] += 1;
                    if cur[i] < b.hi[i] {
                        break;
                    }
                    cur[i] = b.lo[i];
                    i += 1;
                }
            }
        } else {
            self.cells
                .iter()
                .filter(|c| (0..self.n).all(|i| b.lo[i] <= c[i] && c[i] < b.hi[i]))
                .cloned()
                .collect()
        }
    }

    /// Same cells with every length multiplied by `2^k`.
    pub fn scaled(&self, k: i32) -> VoxelSet {
        VoxelSet {
            n: self.n,
            base_level: self.base_level + k,
            cells: self.cells.clone(),
        }
    }

    /// Re-express the same set on the finer grid `level` ≤ base_level.
    pub fn refined(&self, level: i32) -> VoxelSet {
        assert!(level <= self.base_level);
        let mut out = VoxelSet::empty(self.n, level);
        for c in &self.cells {
            let b = DyadicCube::new(self.base_level, c.clone()).ibox(level);
            let mut cur = b.lo.clone();
            'outer: loop {
                out.cells.insert(cur.clone());
                let mut i = 0;
                loop {
                    if i == self.n {
                        break 'outer;
                    }
                    cur[i] += 1;
                    if cur[i] < b.hi[i] {
                        break;
                    }
                    cur[i] = b.lo[i];
                    i += 1;
                }
            }
        }
        out
    }

    pub fn translated(&self, by: &[i64]) -> VoxelSet {
        VoxelSet {
            n: self.n,
            base_level: self.base_level,
            cells: self
                .cells
                .iter()
                .map(|c| c.iter().zip(by).map(|(a, b)| a + b).collect())
                .collect(),
        }
    }

    pub fn union(&self, other: &VoxelSet) -> Result<VoxelSet> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.cells.extend(other.cells.iter().cloned());
        Ok(out)
    }

    pub fn is_subset(&self, other: &VoxelSet) -> bool {
        self.n == other.n
            && self.base_level == other.base_level
            && self.cells.is_subset(&other.cells)
    }

    fn check_compatible(&self, other: &VoxelSet) -> Result<()> {
        if self.n != other.n || self.base_level != other.base_level {
            return Err(Error::Input(
                "voxel sets differ in dimension or base level".into(),
            ));
        }
        Ok(())
    }

    /// Connected components; `closed` counts corner and edge contact as
    /// adjacency, otherwise only shared facets do.
    pub fn components(&self, closed: bool) -> Vec<VoxelSet> {
        let offsets = neighbour_offsets(self.n, closed);
        let mut seen: HashSet<&Vec<i64>> = HashSet::new();
        let mut out = Vec::new();
        for start in &self.cells {
            if seen.contains(start) {
                continue;
            }
            seen.insert(start);
            let mut comp = VoxelSet::empty(self.n, self.base_level);
            let mut queue = VecDeque::from([start.clone()]);
            while let Some(c) = queue.pop_front() {
                for off in &offsets {
                    let nb: Vec<i64> = c.iter().zip(off).map(|(a, b)| a + b).collect();
                    if let Some(found) = self.cells.get(&nb) {
                        if seen.insert(found) {
                            queue.push_back(nb);
                        }
                    }
                }
                comp.cells.insert(c);
            }
            out.push(comp);
        }
        out
    }

    /// Whether the cells form one facet-connected piece.
    pub fn is_face_connected(&self) -> bool {
        self.components(false).len() <= 1
    }

    /// Cells with at least one facet neighbour outside the set.
    pub fn boundary_layer(&self) -> VoxelSet {
        let offsets = neighbour_offsets(self.n, false);
        let mut out = VoxelSet::empty(self.n, self.base_level);
        for c in &self.cells {
            let exposed = offsets.iter().any(|off| {
                let nb: Vec<i64> = c.iter().zip(off).map(|(a, b)| a + b).collect();
                !self.cells.contains(&nb)
            });
            if exposed {
                out.cells.insert(c.clone());
            }
        }
        out
    }
}

fn neighbour_offsets(n: usize, closed: bool) -> Vec<Vec<i64>> {
    if closed {
        let mut out = Vec::new();
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let off: Vec<i64> = (0..n)
                .map(|_| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    d
                })
                .collect();
            if off.iter().any(|v| *v != 0) {
                out.push(off);
            }
        }
        out
    } else {
        let mut out = Vec::new();
        for i in 0..n {
            for d in [-1, 1] {
                let mut off = vec![0; n];
                off[i] = d;
                out.push(off);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let s = r#"{"n": 2, "base_level": 0, "cells": [[0,0],[1,0],[1,1]]}"#;
        let v: VoxelSet = serde_json::from_str(s).unwrap();
        assert_eq!(v.len(), 3);
        let back = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<VoxelSet>(&back).unwrap(), v);
    }

    #[test]
    fn rejects_ragged_cells() {
        let s = r#"{"n": 2, "base_level": 0, "cells": [[0,0,1]]}"#;
        assert!(serde_json::from_str::<VoxelSet>(s).is_err());
    }

    #[test]
    fn components_and_boundary() {
        let v = VoxelSet::new(2, 0, vec![vec![0, 0], vec![1, 1], vec![5, 5]]).unwrap();
        assert_eq!(v.components(true).len(), 2);
        assert_eq!(v.components(false).len(), 3);
        let block = VoxelSet::new(
            2,
            0,
            (0..3).flat_map(|x| (0..3).map(move |y| vec![x, y])),
        )
        .unwrap();
        assert_eq!(block.boundary_layer().len(), 8);
    }

    #[test]
    fn cells_in_cube() {
        let v = VoxelSet::new(2, 0, vec![vec![0, 0], vec![1, 1], vec![5, 5]]).unwrap();
        assert_eq!(v.cells_in(&DyadicCube::new(1, vec![0, 0])).len(), 2);
        assert_eq!(v.cells_in(&DyadicCube::new(3, vec![0, 0])).len(), 3);
    }

    #[test]
    fn refine_multiplies_cells() {
        let v = VoxelSet::new(2, 0, vec![vec![0, 0]]).unwrap();
        assert_eq!(v.refined(-1).len(), 4);
    }
}
