use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{extract_qpp_cover, CoverFamily, CoverTag, EpsilonConfig};
use crate::content::{hc_dyadic, ContentParams, ContentTree};
use crate::dyadic::{DyadicCube, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport<T> {
    pub cube: DyadicCube,
    pub density: T,
}

/// `hc^d(X ∩ Q) / (size/2)^m` with `X` given by its content tree.
pub fn density_in<T: Real>(tree: &ContentTree<T>, q: &DyadicCube, m: T) -> Result<DensityReport<T>> {
    let inside = tree.content_of(q)?;
    Ok(DensityReport {
        cube: q.clone(),
        density: inside / q.cost(m),
    })
}

/// Density of `q` with respect to the cells of `x`.
pub fn density<T: Real>(x: &VoxelSet, q: &DyadicCube, params: &ContentParams<T>) -> Result<DensityReport<T>> {
    if q.level < x.base_level() {
        return Err(Error::Resolution(format!(
            "cube level {} is finer than the base level {}",
            q.level,
            x.base_level()
        )));
    }
    density_in(&ContentTree::from_voxels(x, params.m), q, params.m)
}

/// Smallest ancestor of `qpp` such that it and every larger ancestor have
/// density below `eps`.
///
/// Once `(size/2)^m · eps` exceeds the whole content, no larger ancestor can
/// reach density `eps`, which bounds the scan.
pub fn enlarge_in<T: Real>(qpp: &DyadicCube, tree: &ContentTree<T>, eps: T, m: T) -> Result<DyadicCube> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::Input(format!("epsilon must lie in (0,1), got {eps}")));
    }
    let total = tree.total();
    let mut last_dense: Option<i32> = None;
    let mut level = qpp.level;
    loop {
        let q = qpp.ancestor(level);
        if q.cost(m) * eps > total {
            break;
        }
        if density_in(tree, &q, m)?.density >= eps {
            last_dense = Some(level);
        }
        level += 1;
        if level > qpp.level + 2000 {
            return Err(Error::Capacity("ancestor scan did not settle".into()));
        }
    }
    Ok(match last_dense {
        Some(l) => qpp.ancestor(l + 1),
        None => qpp.clone(),
    })
}

pub fn enlarge_to_low_density<T: Real>(
    qpp: &DyadicCube,
    x: &VoxelSet,
    eps: &EpsilonConfig<T>,
    params: &ContentParams<T>,
) -> Result<DyadicCube> {
    enlarge_in(qpp, &ContentTree::from_voxels(x, params.m), eps.epsilon, params.m)
}

/// Both sides of `Σ hc^d(Q′) < 1.1·6^n·(2^m/ε)·hc^d(X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck<T> {
    pub sum_qp: T,
    pub sum_qpp: T,
    pub hc_x: T,
    pub bound: T,
    pub holds: bool,
}

/// Drops cubes contained in another member; input sorted and deduplicated.
pub(crate) fn prune_contained(cubes: BTreeSet<DyadicCube>) -> Vec<DyadicCube> {
    let levels: BTreeSet<i32> = cubes.iter().map(|c| c.level).collect();
    cubes
        .iter()
        .filter(|c| {
            !levels
                .range(c.level + 1..)
                .any(|&l| cubes.contains(&c.ancestor(l)))
        })
        .cloned()
        .collect()
}

/// Enlarges every near-optimal cube to low density, dedupes, prunes
/// nested cubes, and checks the cover-size chain.
///
/// Densities are taken with respect to the union of the near-optimal cover,
/// which contains `x` and gives each of its cubes density one. Returns the
/// enlarged family, the near-optimal family and the chain check.
pub fn build_qp_cover<T: Real>(
    x: &VoxelSet,
    eps: &EpsilonConfig<T>,
    params: &ContentParams<T>,
) -> Result<(CoverFamily, CoverFamily, ChainCheck<T>)> {
    let qpp = extract_qpp_cover(x, params, T::lit(1.1), T::lit(1e-9))?;
    let tree = ContentTree::build(x.n(), x.base_level(), &qpp.cubes(), params.m)?;
    let mut enlarged = BTreeSet::new();
    for c in qpp.cubes() {
        enlarged.insert(enlarge_in(&c, &tree, eps.epsilon, params.m)?);
    }
    let qp = CoverFamily::from_cubes(prune_contained(enlarged), CoverTag::Qp);
    let hc_x = hc_dyadic(x, params).value;
    let sum_qp = qp.total_cost(params.m);
    let sum_qpp = qpp.total_cost(params.m);
    let bound = T::lit(1.1) * T::lit(6f64.powi(params.n as i32)) * T::pow2(params.m) / eps.epsilon * hc_x;
    let holds = x.is_empty() || sum_qp < bound;
    let chain = ChainCheck {
        sum_qp,
        sum_qpp,
        hc_x,
        bound,
        holds,
    };
    if !holds {
        return Err(Error::InternalInvariant(format!(
            "cover size chain fails: {sum_qp} ≥ {bound}"
        )));
    }
    if !qp.covers(x) {
        return Err(Error::InternalInvariant("enlarged cover misses a cell".into()));
    }
    Ok((qp, qpp, chain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{choose_epsilon, CalibratedConstants, EpsilonMode};

    fn p(m: f64) -> ContentParams<f64> {
        ContentParams::new(m, 2).unwrap()
    }

    fn eps(e: f64) -> EpsilonConfig<f64> {
        choose_epsilon(2, 2.0, EpsilonMode::Practical, &CalibratedConstants { practical_epsilon: Some(e), ..Default::default() }).unwrap()
    }

    #[test]
    fn density_examples() {
        let x = VoxelSet::new(2, 0, vec![vec![0, 0]]).unwrap();
        let cell = DyadicCube::new(0, vec![0, 0]);
        assert_eq!(density(&x, &cell, &p(2.0)).unwrap().density, 1.0);
        let far = DyadicCube::new(0, vec![3, 3]);
        assert_eq!(density(&x, &far, &p(2.0)).unwrap().density, 0.0);
        let parent = DyadicCube::new(1, vec![0, 0]);
        assert_eq!(density(&x, &parent, &p(2.0)).unwrap().density, 0.25);
        let fine = DyadicCube::new(-1, vec![0, 0]);
        assert!(matches!(density(&x, &fine, &p(2.0)), Err(Error::Resolution(_))));
    }

    #[test]
    fn enlarge_single_cell() {
        let x = VoxelSet::new(2, 0, vec![vec![0, 0]]).unwrap();
        let cell = DyadicCube::new(0, vec![0, 0]);
        let q = enlarge_to_low_density(&cell, &x, &eps(0.5), &p(2.0)).unwrap();
        assert_eq!(q, DyadicCube::new(1, vec![0, 0]));
        let q = enlarge_to_low_density(&cell, &x, &eps(0.9), &p(2.0)).unwrap();
        assert!(q.level > cell.level);
    }

    #[test]
    fn enlarge_keeps_sparse_cube() {
        // a big empty-ish cube containing one cell has low density already
        let x = VoxelSet::new(2, 0, vec![vec![0, 0]]).unwrap();
        let big = DyadicCube::new(3, vec![0, 0]);
        let q = enlarge_to_low_density(&big, &x, &eps(0.5), &p(2.0)).unwrap();
        assert_eq!(q, big);
    }

    #[test]
    fn qp_of_one_cell_and_block() {
        let x = VoxelSet::new(2, 0, vec![vec![0, 0]]).unwrap();
        let (qp, _, chain) = build_qp_cover(&x, &eps(0.5), &p(2.0)).unwrap();
        assert_eq!(qp.cubes(), vec![DyadicCube::new(1, vec![0, 0])]);
        assert!(chain.holds);
        let block = VoxelSet::new(2, 0, (0..4).flat_map(|a| (0..4).map(move |b| vec![a, b]))).unwrap();
        let (qp, qpp, _) = build_qp_cover(&block, &eps(0.3), &p(1.5)).unwrap();
        for c in qp.cubes() {
            assert!(qpp.cubes().iter().all(|s| !s.contains(&c) || s == &c) );
            assert!(qpp.cubes().iter().any(|s| c.contains(s) && c != *s));
        }
    }
}
