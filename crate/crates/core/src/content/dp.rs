use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ContentParams;
use crate::dyadic::{DyadicCube, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Value of a dyadic content computation with a cover attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentResult<T> {
    pub value: T,
    pub witness_cover: Vec<DyadicCube>,
}

#[derive(Clone, Copy, Debug)]
struct Node<T> {
    cost: T,
    take_self: bool,
    /// The node is a member of the input family (covered in full).
    full: bool,
}

/// Per-node optimal costs of the dyadic tree over a union of cubes.
///
/// `content_of(q)` answers the dyadic content of the part of the union
/// lying inside `q` for any cube at or above the base level.
#[derive(Clone, Debug)]
pub struct ContentTree<T> {
    n: usize,
    base_level: i32,
    m: T,
    levels: BTreeMap<i32, BTreeMap<Vec<i64>, Node<T>>>,
    /// One root per occupied orthant: cubes on both sides of a coordinate
    /// hyperplane through the origin have no common dyadic ancestor.
    roots: Vec<DyadicCube>,
}

/// `min((2^L/2)^m, 2^n · full(L−1))` unrolled down to the base level.
fn full_cost<T: Real>(level: i32, base_level: i32, n: usize, m: T) -> (T, bool) {
    let mut cost = T::pow2(T::lit((base_level - 1) as f64) * m);
    let mut take_self = true;
    let fan = T::lit((1u64 << n) as f64);
    for l in base_level + 1..=level {
        let own = T::pow2(T::lit((l - 1) as f64) * m);
        let split = fan * cost;
        if own <= split {
            cost = own;
            take_self = true;
        } else {
            cost = split;
            take_self = false;
        }
    }
    (cost, take_self)
}

impl<T: Real> ContentTree<T> {
    /// Builds the tree over `cubes`, none finer than `base_level`.
    pub fn build(n: usize, base_level: i32, cubes: &[DyadicCube], m: T) -> Result<Self> {
        let mut members: BTreeMap<i32, BTreeMap<Vec<i64>, ()>> = BTreeMap::new();
        for c in cubes {
            if c.n() != n {
                return Err(Error::Input("cube dimension mismatch".into()));
            }
            if c.level < base_level {
                return Err(Error::Resolution(format!(
                    "cube at level {} below base level {base_level}",
                    c.level
                )));
            }
            members.entry(c.level).or_default().insert(c.anchor.clone(), ());
        }
        // keep an antichain: drop cubes inside another member
        let snapshot = members.clone();
        for (&l, ms) in &snapshot {
            for a in ms.keys() {
                let c = DyadicCube::new(l, a.clone());
                let covered = snapshot
                    .range(l + 1..)
                    .any(|(&l2, ms2)| ms2.contains_key(&c.ancestor(l2).anchor));
                if covered {
                    members.get_mut(&l).unwrap().remove(a);
                }
            }
        }
        members.retain(|_, ms| !ms.is_empty());
        let mut tree = ContentTree {
            n,
            base_level,
            m,
            levels: BTreeMap::new(),
            roots: Vec::new(),
        };
        let Some(&lowest) = members.keys().next() else {
            return Ok(tree);
        };
        let fan_sum_order = |children: &Vec<T>| -> T {
            children.iter().fold(T::zero(), |acc, c| acc + *c)
        };
        let mut current: BTreeMap<Vec<i64>, Node<T>> = BTreeMap::new();
        let mut level = lowest;
        loop {
            // members at this level are full nodes; drop any partial node they swallow
            if let Some(ms) = members.get(&level) {
                for a in ms.keys() {
                    let (cost, take_self) = full_cost(level, base_level, n, m);
                    current.insert(
                        a.clone(),
                        Node {
                            cost,
                            take_self,
                            full: true,
                        },
                    );
                }
            }
            let top = members.range(level + 1..).next().is_none();
            let settled = current.len() == 1 || current.keys().all(|a| a.iter().all(|v| *v == 0 || *v == -1));
            tree.levels.insert(level, current.clone());
            if top && settled {
                tree.roots = current.keys().map(|a| DyadicCube::new(level, a.clone())).collect();
                break;
            }
            // group into parents
            let mut groups: BTreeMap<Vec<i64>, Vec<T>> = BTreeMap::new();
            for (a, node) in &current {
                let p: Vec<i64> = a.iter().map(|v| v >> 1).collect();
                groups.entry(p).or_default().push(node.cost);
            }
            let parent_level = level + 1;
            let own = T::pow2(T::lit((parent_level - 1) as f64) * m);
            let mut next = BTreeMap::new();
            for (p, kids) in groups {
                let split = fan_sum_order(&kids);
                let node = if own <= split {
                    Node {
                        cost: own,
                        take_self: true,
                        full: false,
                    }
                } else {
                    Node {
                        cost: split,
                        take_self: false,
                        full: false,
                    }
                };
                next.insert(p, node);
            }
            current = next;
            level = parent_level;
        }
        Ok(tree)
    }

    pub fn from_voxels(x: &VoxelSet, m: T) -> Self {
        let cubes: Vec<DyadicCube> = x.cubes().collect();
        Self::build(x.n(), x.base_level(), &cubes, m).expect("cells sit at the base level")
    }

    /// The single root, when the union lies in one orthant.
    pub fn root(&self) -> Option<&DyadicCube> {
        match self.roots.as_slice() {
            [r] => Some(r),
            _ => None,
        }
    }

    pub fn roots(&self) -> &[DyadicCube] {
        &self.roots
    }

    fn cost_at(&self, r: &DyadicCube) -> T {
        self.levels[&r.level][&r.anchor].cost
    }

    pub fn total(&self) -> T {
        self.roots.iter().fold(T::zero(), |acc, r| acc + self.cost_at(r))
    }

    /// Dyadic content of the union's part inside `q`.
    ///
    /// Ancestors of the root never improve on it: their own cost exceeds the
    /// root's, which is itself at most the root's own cost.
    pub fn content_of(&self, q: &DyadicCube) -> Result<T> {
        if q.level < self.base_level {
            return Err(Error::Resolution(format!(
                "cube level {} below base level {}",
                q.level, self.base_level
            )));
        }
        let Some(root) = self.roots.first() else {
            return Ok(T::zero());
        };
        if q.level >= root.level {
            return Ok(self
                .roots
                .iter()
                .filter(|r| q.contains(r))
                .fold(T::zero(), |acc, r| acc + self.cost_at(r)));
        }
        if let Some(node) = self.levels.get(&q.level).and_then(|l| l.get(&q.anchor)) {
            return Ok(node.cost);
        }
        // Inside a full member the content equals a full cube's cost.
        for (&l, nodes) in self.levels.range(q.level + 1..) {
            let anc = q.ancestor(l);
            if let Some(node) = nodes.get(&anc.anchor) {
                if node.full {
                    return Ok(full_cost(q.level, self.base_level, self.n, self.m).0);
                }
                return Ok(T::zero());
            }
        }
        Ok(T::zero())
    }

    /// Optimal cover read off the argmin cut.
    pub fn witness(&self) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        for r in &self.roots {
            self.collect(r.level, &r.anchor, false, &mut out);
        }
        out.sort();
        out
    }

    fn collect(&self, level: i32, anchor: &[i64], inside_full: bool, out: &mut Vec<DyadicCube>) {
        let (take_self, full) = if inside_full {
            (full_cost(level, self.base_level, self.n, self.m).1, true)
        } else {
            let node = self.levels[&level][anchor];
            (node.take_self, node.full)
        };
        if take_self {
            out.push(DyadicCube::new(level, anchor.to_vec()));
            return;
        }
        let q = DyadicCube::new(level, anchor.to_vec());
        for child in q.children() {
            if full {
                self.collect(level - 1, &child.anchor, true, out);
            } else if self
                .levels
                .get(&(level - 1))
                .is_some_and(|l| l.contains_key(&child.anchor))
            {
                self.collect(level - 1, &child.anchor, false, out);
            }
        }
    }
}

/// Dyadic content of a union of dyadic cubes, exact up to float rounding.
pub fn hc_cubes<T: Real>(
    n: usize,
    base_level: i32,
    cubes: &[DyadicCube],
    m: T,
) -> Result<ContentResult<T>> {
    let tree = ContentTree::build(n, base_level, cubes, m)?;
    Ok(ContentResult {
        value: tree.total(),
        witness_cover: tree.witness(),
    })
}

/// Minimum of Σ (size/2)^m over covers of `x` by dyadic cubes.
pub fn hc_dyadic<T: Real>(x: &VoxelSet, params: &ContentParams<T>) -> ContentResult<T> {
    let tree = ContentTree::from_voxels(x, params.m);
    ContentResult {
        value: tree.total(),
        witness_cover: tree.witness(),
    }
}

/// Certified interval `(hc^d / (4^n·2^m), hc^d)` around the true content.
pub fn hc_sandwich<T: Real>(x: &VoxelSet, params: &ContentParams<T>) -> (T, T) {
    let upper = hc_dyadic(x, params).value;
    let factor = T::lit(4f64.powi(params.n as i32)) * T::pow2(params.m);
    (upper / factor, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(cells: &[[i64; 2]]) -> VoxelSet {
        VoxelSet::new(2, 0, cells.iter().map(|c| c.to_vec())).unwrap()
    }

    fn p(m: f64) -> ContentParams<f64> {
        ContentParams::new(m, 2).unwrap()
    }

    #[test]
    fn single_cell() {
        let r = hc_dyadic(&set(&[[0, 0]]), &p(2.0));
        assert_eq!(r.value, 0.25);
        assert_eq!(r.witness_cover, vec![DyadicCube::new(0, vec![0, 0])]);
    }

    #[test]
    fn block_merges() {
        let r = hc_dyadic(&set(&[[0, 0], [0, 1], [1, 0], [1, 1]]), &p(1.0));
        assert_eq!(r.value, 1.0);
        assert_eq!(r.witness_cover, vec![DyadicCube::new(1, vec![0, 0])]);
    }

    #[test]
    fn far_cells_stay_separate() {
        let r = hc_dyadic(&set(&[[0, 0], [5, 5]]), &p(1.0));
        assert_eq!(r.value, 1.0);
        assert_eq!(r.witness_cover.len(), 2);
    }

    #[test]
    fn empty_is_zero() {
        let r = hc_dyadic(&VoxelSet::empty(2, 0), &p(1.0));
        assert_eq!(r.value, 0.0);
        assert!(r.witness_cover.is_empty());
    }

    #[test]
    fn sandwich_single_cell() {
        let (lo, hi) = hc_sandwich(&set(&[[0, 0]]), &p(2.0));
        assert_eq!(hi, 0.25);
        assert_eq!(lo, 0.25 / 64.0);
    }

    #[test]
    fn full_members_match_cells() {
        let cells = set(&[[0, 0], [0, 1], [1, 0], [1, 1], [2, 0]]);
        for m in [0.5, 1.0, 2.0, 3.0] {
            let a = hc_dyadic(&cells, &p(m)).value;
            let cubes = vec![DyadicCube::new(1, vec![0, 0]), DyadicCube::new(0, vec![2, 0])];
            let b = hc_cubes(2, 0, &cubes, m).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * a, "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn tree_lookups() {
        let x = set(&[[0, 0], [3, 3]]);
        let tree = ContentTree::from_voxels(&x, 2.0);
        assert_eq!(tree.content_of(&DyadicCube::new(1, vec![0, 0])).unwrap(), 0.25);
        assert_eq!(tree.content_of(&DyadicCube::new(1, vec![1, 0])).unwrap(), 0.0);
        assert_eq!(tree.content_of(&DyadicCube::new(5, vec![0, 0])).unwrap(), tree.total());
        assert!(tree.content_of(&DyadicCube::new(-1, vec![0, 0])).is_err());
    }

    #[test]
    fn witness_sums_to_value() {
        let x = set(&[[0, 0], [1, 0], [4, 4], [5, 5], [7, 1]]);
        for m in [0.5, 1.0, 1.5, 2.0] {
            let r = hc_dyadic(&x, &p(m));
            let s: f64 = r.witness_cover.iter().map(|c| c.cost(m)).sum();
            assert!((s - r.value).abs() <= 1e-12 * r.value);
        }
    }

    #[test]
    fn cells_around_the_origin() {
        let x = set(&[[-1, -1], [0, 0], [-3, 2], [1, -1]]);
        for m in [0.5, 1.0, 2.0] {
            let r = hc_dyadic(&x, &p(m));
            let b = crate::content::hc_dyadic_bruteforce(&x, &p(m), 4).unwrap();
            assert!((r.value - b).abs() <= 1e-12 * b, "m={m}: {} vs {b}", r.value);
        }
        let tree = ContentTree::from_voxels(&x, 1.0);
        assert!(tree.roots().len() > 1 && tree.root().is_none());
    }
}
