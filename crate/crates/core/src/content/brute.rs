use std::collections::{BTreeMap, HashMap};

use super::ContentParams;
use crate::dyadic::{DyadicCube, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_CANDIDATES: usize = 1 << 22;
const MAX_STATES: usize = 1 << 22;

/// Exhaustive minimum over covers of `x` by dyadic cubes of level at most
/// `max_level`, by memoised set-cover search.
///
/// Shares no code with the tree DP so it can serve as its oracle.
pub fn hc_dyadic_bruteforce<T: Real>(
    x: &VoxelSet,
    params: &ContentParams<T>,
    max_level: i32,
) -> Result<T> {
    if x.is_empty() {
        return Ok(T::zero());
    }
    let cells: Vec<&Vec<i64>> = x.cells().iter().collect();
    if cells.len() > 64 {
        return Err(Error::Capacity(format!(
            "{} cells exceed the 64-cell oracle limit",
            cells.len()
        )));
    }
    if max_level < x.base_level() {
        return Err(Error::Input("max_level below base level".into()));
    }
    // Every dyadic cube at or above the base level meeting a cell's interior
    // contains it, so candidates are exactly the cells' ancestors.
    let mut candidates: BTreeMap<DyadicCube, u64> = BTreeMap::new();
    for (idx, c) in cells.iter().enumerate() {
        for level in x.base_level()..=max_level {
            let anc = DyadicCube::new(x.base_level(), (*c).clone()).ancestor(level);
            *candidates.entry(anc).or_insert(0) |= 1u64 << idx;
            if candidates.len() > MAX_CANDIDATES {
                return Err(Error::Capacity("candidate cube budget exceeded".into()));
            }
        }
    }
    let cands: Vec<(u64, T)> = candidates
        .iter()
        .map(|(q, mask)| {
            let half_side = T::pow2(T::lit((q.level - 1) as f64));
            (*mask, half_side.powf(params.m))
        })
        .collect();
    // per cell, the candidates containing it
    let mut by_cell: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    for (j, (mask, _)) in cands.iter().enumerate() {
        for (i, list) in by_cell.iter_mut().enumerate() {
            if mask >> i & 1 == 1 {
                list.push(j);
            }
        }
    }
    let full = if cells.len() == 64 {
        u64::MAX
    } else {
        (1u64 << cells.len()) - 1
    };
    let mut memo: HashMap<u64, T> = HashMap::new();
    solve(full, &cands, &by_cell, &mut memo)
}

fn solve<T: Real>(
    uncovered: u64,
    cands: &[(u64, T)],
    by_cell: &[Vec<usize>],
    memo: &mut HashMap<u64, T>,
) -> Result<T> {
    if uncovered == 0 {
        return Ok(T::zero());
    }
    if let Some(v) = memo.get(&uncovered) {
        return Ok(*v);
    }
    if memo.len() >= MAX_STATES {
        return Err(Error::Capacity("search state budget exceeded".into()));
    }
    let lowest = uncovered.trailing_zeros() as usize;
    let mut best = T::infinity();
    for &j in &by_cell[lowest] {
        let (mask, w) = cands[j];
        let rest = solve(uncovered & !mask, cands, by_cell, memo)?;
        if w + rest < best {
            best = w + rest;
        }
    }
    memo.insert(uncovered, best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singles_and_empty() {
        let p = ContentParams::new(1.5f64, 2).unwrap();
        let one = VoxelSet::new(2, 0, vec![vec![3, 2]]).unwrap();
        let v = hc_dyadic_bruteforce(&one, &p, 4).unwrap();
        assert!((v - 0.5f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(hc_dyadic_bruteforce(&VoxelSet::empty(2, 0), &p, 4).unwrap(), 0.0);
    }

    #[test]
    fn hand_cases() {
        let p = ContentParams::new(1.0f64, 2).unwrap();
        // adjacent pair inside one size-2 cube: 1.0 beats 0.5+0.5 only on a tie
        let pair = VoxelSet::new(2, 0, vec![vec![0, 0], vec![1, 0]]).unwrap();
        assert_eq!(hc_dyadic_bruteforce(&pair, &p, 3).unwrap(), 1.0);
        // pair straddling the size-2 boundary as well
        let split = VoxelSet::new(2, 0, vec![vec![1, 0], vec![2, 0]]).unwrap();
        assert_eq!(hc_dyadic_bruteforce(&split, &p, 3).unwrap(), 1.0);
        let p2 = ContentParams::new(2.0f64, 2).unwrap();
        let diag = VoxelSet::new(2, 0, vec![vec![0, 0], vec![3, 3]]).unwrap();
        assert_eq!(hc_dyadic_bruteforce(&diag, &p2, 3).unwrap(), 0.5);
    }

    #[test]
    fn too_many_cells() {
        let p = ContentParams::new(1.0f64, 2).unwrap();
        let big = VoxelSet::new(2, 0, (0..9).flat_map(|x| (0..8).map(move |y| vec![x, y]))).unwrap();
        assert!(matches!(
            hc_dyadic_bruteforce(&big, &p, 5),
            Err(Error::Capacity(_))
        ));
    }
}
