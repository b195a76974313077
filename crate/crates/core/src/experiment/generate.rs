use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicScalar, LinfBall, VoxelSet};
use crate::error::{Error, Result};

/// Reproducible description of a synthetic input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Each cell of a `side^n` grid kept with probability `fill`.
    RandomCells { n: usize, side: i64, fill: f64, seed: u64 },
    /// A face-connected blob grown cell by cell from the grid center.
    ConnectedDomain { n: usize, side: i64, cells: usize, seed: u64 },
    /// A dense corner block and sparse cells, see [`two_scale_cells`].
    TwoScale { n: usize, side: i64, seed: u64 },
    /// Clusters of grid points, cluster origins `spacing` apart.
    PointClusters {
        n: usize,
        clusters: usize,
        per_cluster: usize,
        spread: i64,
        spacing: i64,
        seed: u64,
    },
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid_cells(n: usize, side: i64) -> Vec<Vec<i64>> {
    let total = (side as usize).pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let v = (k % side as usize) as i64;
                    k /= side as usize;
                    v
                })
                .collect()
        })
        .collect()
}

/// Random subset of the grid, never empty.
pub fn random_cells(n: usize, side: i64, fill: f64, seed: u64) -> Result<VoxelSet> {
    if side <= 0 || !(0.0..=1.0).contains(&fill) {
        return Err(Error::Input(format!("bad grid side {side} or fill {fill}")));
    }
    let mut r = rng(seed);
    let all = grid_cells(n, side);
    let mut cells: Vec<Vec<i64>> = all.iter().filter(|_| r.gen_bool(fill)).cloned().collect();
    if cells.is_empty() {
        cells.push(all[r.gen_range(0..all.len())].clone());
    }
    VoxelSet::new(n, 0, cells)
}

/// A dense random block in one corner plus sparse cells elsewhere, so
/// that the optimal cover mixes large and unit cubes.
pub fn two_scale_cells(n: usize, side: i64, seed: u64) -> Result<VoxelSet> {
    if side < 4 {
        return Err(Error::Input(format!("two-scale grid needs side ≥ 4, got {side}")));
    }
    let mut r = rng(seed);
    let half = side / 2;
    let corner: Vec<i64> = (0..n).map(|_| if r.gen_bool(0.5) { 0 } else { half }).collect();
    let cells: Vec<Vec<i64>> = grid_cells(n, side)
        .into_iter()
        .filter(|c| {
            let inside = c.iter().zip(&corner).all(|(v, o)| *v >= *o && *v < *o + half);
            r.gen_bool(if inside { 0.7 } else { 0.04 })
        })
        .collect();
    VoxelSet::new(n, 0, cells)
}

/// Unit cells winding in a square spiral around a large solid block.
pub fn spiral_around_block(block: i64, turns: usize) -> Result<VoxelSet> {
    if block <= 0 || !(block as u64).is_power_of_two() {
        return Err(Error::Input("block side must be a power of two".into()));
    }
    let mut cells = grid_cells(2, block);
    let (mut x, mut y) = (block, 0i64);
    let (mut dx, mut dy) = (0i64, 1i64);
    let mut leg = block;
    for t in 0..4 * turns {
        for _ in 0..leg {
            if (x + y) % 3 == 0 {
                cells.push(vec![x, y]);
            }
            x += dx;
            y += dy;
        }
        (dx, dy) = (-dy, dx);
        if t % 2 == 1 {
            leg += 2;
        }
    }
    let shift = 2 * turns as i64 + 2;
    VoxelSet::new(2, 0, cells.into_iter().map(|c| vec![c[0] + shift, c[1] + shift]))
}

/// Grows a face-connected set by adding random face neighbours.
pub fn connected_domain(n: usize, side: i64, cells: usize, seed: u64) -> Result<VoxelSet> {
    if side <= 0 || cells == 0 || cells > (side as usize).pow(n as u32) {
        return Err(Error::Input(format!("cannot grow {cells} cells in a grid of side {side}")));
    }
    let mut r = rng(seed);
    let start = vec![side / 2; n];
    let mut set = BTreeSet::from([start.clone()]);
    let mut order = vec![start];
    while set.len() < cells {
        let base = order[r.gen_range(0..order.len())].clone();
        let axis = r.gen_range(0..n);
        let mut c = base;
        c[axis] += if r.gen_bool(0.5) { 1 } else { -1 };
        if c[axis] < 0 || c[axis] >= side {
            continue;
        }
        if set.insert(c.clone()) {
            order.push(c);
        }
    }
    VoxelSet::new(n, 0, set)
}

/// Distinct integer points in clusters; clusters sit on a line with the
/// given spacing so good balls at one cluster stay clear of the others.
pub fn point_clusters(
    n: usize,
    clusters: usize,
    per_cluster: usize,
    spread: i64,
    spacing: i64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 || spread <= 0 || spacing < spread {
        return Err(Error::Input("cluster spacing must exceed a positive spread".into()));
    }
    let mut r = rng(seed);
    let mut pts = BTreeSet::new();
    for c in 0..clusters {
        let origin: Vec<i64> = (0..n).map(|i| if i == 0 { c as i64 * spacing } else { 0 }).collect();
        for _ in 0..per_cluster {
            let p: Vec<i64> = origin.iter().map(|o| o + r.gen_range(0..spread)).collect();
            pts.insert(p);
        }
    }
    Ok(pts
        .into_iter()
        .map(|p| p.into_iter().map(|v| v as f64).collect())
        .collect())
}

/// Random dyadic ℓ∞ balls and points inside them, for the reduction map.
///
/// Radii are powers of two between 1 and 8; every point lies at least
/// `δ = 1/4` inside some ball, so the tent weights never all vanish.
pub fn ball_configuration(
    n: usize,
    balls: usize,
    points: usize,
    seed: u64,
) -> Result<(Vec<LinfBall>, Vec<Vec<f64>>)> {
    if balls == 0 {
        return Err(Error::Input("need at least one ball".into()));
    }
    let mut r = rng(seed);
    let bs: Vec<LinfBall> = (0..balls)
        .map(|_| {
            let center = (0..n).map(|_| DyadicScalar::from_int(r.gen_range(-16..=16))).collect();
            LinfBall::new(center, DyadicScalar::pow2(r.gen_range(0..=3)))
        })
        .collect();
    let pts = (0..points)
        .map(|_| {
            let b = &bs[r.gen_range(0..balls)];
            let reach = b.radius.to_f64() - 0.25;
            b.center
                .iter()
                .map(|c| c.to_f64() + r.gen_range(-reach..=reach))
                .collect()
        })
        .collect();
    Ok((bs, pts))
}

impl GeneratorSpec {
    pub fn n(&self) -> usize {
        match self {
            GeneratorSpec::RandomCells { n, .. }
            | GeneratorSpec::ConnectedDomain { n, .. }
            | GeneratorSpec::TwoScale { n, .. }
            | GeneratorSpec::PointClusters { n, .. } => *n,
        }
    }

    /// The voxel set described by a cell generator.
    pub fn voxels(&self) -> Result<VoxelSet> {
        match *self {
            GeneratorSpec::RandomCells { n, side, fill, seed } => random_cells(n, side, fill, seed),
            GeneratorSpec::ConnectedDomain { n, side, cells, seed } => connected_domain(n, side, cells, seed),
            GeneratorSpec::TwoScale { n, side, seed } => two_scale_cells(n, side, seed),
            GeneratorSpec::PointClusters { .. } => Err(Error::Input("generator yields points, not cells".into())),
        }
    }

    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        match *self {
            GeneratorSpec::PointClusters {
                n,
                clusters,
                per_cluster,
                spread,
                spacing,
                seed,
            } => point_clusters(n, clusters, per_cluster, spread, spacing, seed),
            _ => Err(Error::Input("generator yields cells, not points".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let a = random_cells(2, 16, 0.3, 7).unwrap();
        assert_eq!(a, random_cells(2, 16, 0.3, 7).unwrap());
        assert_ne!(a, random_cells(2, 16, 0.3, 8).unwrap());
        assert!(!random_cells(2, 4, 0.0, 1).unwrap().is_empty());
    }

    #[test]
    fn grown_domain_is_connected() {
        let d = connected_domain(3, 8, 60, 3).unwrap();
        assert_eq!(d.len(), 60);
        assert!(d.is_face_connected());
    }

    #[test]
    fn balls_contain_points() {
        let (bs, pts) = ball_configuration(2, 4, 30, 1).unwrap();
        for p in &pts {
            assert!(bs.iter().any(|b| {
                let c: Vec<f64> = b.center_real();
                c.iter().zip(p).all(|(c, x)| (c - x).abs() <= b.radius.to_f64() - 0.25)
            }));
        }
    }
}
