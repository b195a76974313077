use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{density_in, CoverFamily, CoverMember, CoverTag, EpsilonConfig};
use crate::content::{hc_cubes, ContentParams, ContentTree};
use crate::dyadic::{DyadicCube, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_COLLAR_CUBES: usize = 5_000_000;

/// Outcome of the three collar properties plus coverage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarChecks<T> {
    /// Members with density ≥ ε.
    pub density_violations: usize,
    pub max_density: T,
    pub union_content: T,
    pub union_bound: T,
    pub union_holds: bool,
    /// Pairs (big, small) with size ratio ≥ 4 closer than half the big size.
    pub separation_violations: usize,
    pub separation_pairs_checked: usize,
    pub covers_x: bool,
}

impl<T> CollarChecks<T> {
    pub fn all_hold(&self) -> bool {
        self.density_violations == 0 && self.union_holds && self.separation_violations == 0 && self.covers_x
    }
}

/// Ring cubes of layer `k + 1` around `q`: cubes `2^k` times smaller than
/// `q`, touching the union of the first `k` layers from outside.
fn layer_ring(q: &DyadicCube, k: u32) -> Vec<DyadicCube> {
    if k == 0 {
        return vec![q.clone()];
    }
    let n = q.n();
    let level = q.level - k as i32;
    let side = 1i64 << k;
    let inner = side - 2; // expansion of the first k layers, in cells
    let outer = side - 1;
    let lo: Vec<i64> = q.anchor.iter().map(|a| a * side - outer).collect();
    let hi: Vec<i64> = q.anchor.iter().map(|a| (a + 1) * side + outer).collect();
    let in_lo: Vec<i64> = q.anchor.iter().map(|a| a * side - inner).collect();
    let in_hi: Vec<i64> = q.anchor.iter().map(|a| (a + 1) * side + inner).collect();
    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        let inside = (0..n).all(|i| in_lo[i] <= cur[i] && cur[i] < in_hi[i]);
        if !inside {
            out.push(DyadicCube::new(level, cur.clone()));
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            cur[i] += 1;
            if cur[i] < hi[i] {
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// Builds the collars of the enlarged cubes and prunes them: first cubes
/// covered by another candidate, then cubes sharing no interior point with
/// any near-optimal cube.
pub fn build_collar_cover<T: Real>(
    qp: &CoverFamily,
    qpp: &CoverFamily,
    x: &VoxelSet,
    eps: &EpsilonConfig<T>,
    params: &ContentParams<T>,
) -> Result<(CoverFamily, CollarChecks<T>)> {
    if qp.is_empty() {
        return Err(Error::Precondition("collar construction needs a nonempty cover".into()));
    }
    let smallest = qp.members.iter().map(|c| c.level).min().unwrap();
    // first occurrence wins; candidates keyed by cube
    let mut cands: BTreeMap<DyadicCube, (u32, usize)> = BTreeMap::new();
    for (j, member) in qp.members.iter().enumerate() {
        let q = member.cube();
        for k in 0..=(q.level - smallest) as u32 {
            for c in layer_ring(&q, k) {
                cands.entry(c).or_insert((k + 1, j));
            }
            if cands.len() > MAX_COLLAR_CUBES {
                return Err(Error::Capacity("collar candidate budget exceeded".into()));
            }
        }
    }
    let levels: BTreeSet<i32> = cands.keys().map(|c| c.level).collect();
    let top = *levels.iter().next_back().unwrap();
    let qpp_set: HashSet<DyadicCube> = qpp.cubes().into_iter().collect();
    let qpp_levels: BTreeSet<i32> = qpp_set.iter().map(|c| c.level).collect();
    let mut qpp_ancestors: HashSet<DyadicCube> = HashSet::new();
    for c in &qpp_set {
        for l in c.level..=top.max(c.level) {
            qpp_ancestors.insert(c.ancestor(l));
        }
    }
    let nested_with_qpp = |c: &DyadicCube| {
        qpp_ancestors.contains(c)
            || qpp_levels
                .range(c.level + 1..)
                .any(|&l| qpp_set.contains(&c.ancestor(l)))
    };
    let mut members = Vec::new();
    for (c, &(layer, source)) in &cands {
        let covered = levels.range(c.level + 1..).any(|&l| cands.contains_key(&c.ancestor(l)));
        if covered || !nested_with_qpp(c) {
            continue;
        }
        members.push(CoverMember {
            level: c.level,
            anchor: c.anchor.clone(),
            tag: CoverTag::CollarLayer(layer),
            source: Some(source),
        });
    }
    let family = CoverFamily { members };
    let checks = check_collar(&family, qp, qpp, x, eps, params)?;
    Ok((family, checks))
}

/// Evaluates the collar properties on a built family.
pub(crate) fn check_collar<T: Real>(
    family: &CoverFamily,
    qp: &CoverFamily,
    qpp: &CoverFamily,
    x: &VoxelSet,
    eps: &EpsilonConfig<T>,
    params: &ContentParams<T>,
) -> Result<CollarChecks<T>> {
    let m = params.m;
    let tree = ContentTree::build(x.n(), x.base_level(), &qpp.cubes(), m)?;
    let mut density_violations = 0;
    let mut max_density = T::zero();
    for c in family.cubes() {
        let d = density_in(&tree, &c, m)?.density;
        max_density = max_density.max(d);
        if !(d < eps.epsilon) {
            density_violations += 1;
        }
    }
    let cubes = family.cubes();
    let union_content = hc_cubes(x.n(), x.base_level(), &cubes, m)?.value;
    let union_bound = T::lit(3.0).powf(m) * qp.total_cost(m);
    let union_holds = union_content <= union_bound * (T::one() + T::lit(1e-12));
    let grid = cubes.iter().map(|c| c.level).min().unwrap_or(0);
    let boxes: Vec<_> = cubes.iter().map(|c| c.ibox(grid)).collect();
    let mut separation_violations = 0;
    let mut separation_pairs_checked = 0;
    for (a, ba) in cubes.iter().zip(&boxes) {
        let half = 1i64 << (a.level - 1 - grid).max(0);
        for (b, bb) in cubes.iter().zip(&boxes) {
            if b.level <= a.level - 2 {
                separation_pairs_checked += 1;
                if ba.linf_gap(bb) < half {
                    separation_violations += 1;
                }
            }
        }
    }
    Ok(CollarChecks {
        density_violations,
        max_density,
        union_content,
        union_bound,
        union_holds,
        separation_violations,
        separation_pairs_checked,
        covers_x: family.covers(x),
    })
}
