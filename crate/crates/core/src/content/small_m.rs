use crate::dyadic::{DyadicScalar, LinfBall, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Most connected pieces the exact grouping search accepts.
pub const MAX_PIECES: usize = 14;

fn check_m<T: Real>(m: T) -> Result<()> {
    if !(m > T::zero() && m <= T::one()) {
        return Err(Error::Domain(format!("small-m content needs 0 < m ≤ 1, got {m}")));
    }
    Ok(())
}

type Bounds = (Vec<DyadicScalar>, Vec<DyadicScalar>);

fn hull(a: &Bounds, b: &Bounds) -> Bounds {
    (
        a.0.iter().zip(&b.0).map(|(x, y)| *x.min(y)).collect(),
        a.1.iter().zip(&b.1).map(|(x, y)| *x.max(y)).collect(),
    )
}

fn meets(a: &Bounds, b: &Bounds) -> bool {
    (0..a.0.len()).all(|i| a.0[i] <= b.1[i] && b.0[i] <= a.1[i])
}

/// Exact content for `m ≤ 1` of a union of closed boxes.
///
/// A connected set of ℓ∞ diameter `d` costs `(d/2)^m` and no cover does
/// better, since `r ↦ r^m` is subadditive. So an optimal cover puts one ball
/// around each group of a partition of the connected pieces, and the
/// partition is found by a subset search.
fn grouped_content<T: Real>(boxes: Vec<Bounds>, m: T) -> Result<T> {
    // connected pieces of the closed union
    let mut pieces: Vec<Bounds> = Vec::new();
    for b in boxes {
        let mut acc = b;
        let mut i = 0;
        while i < pieces.len() {
            if meets(&pieces[i], &acc) {
                acc = hull(&pieces.swap_remove(i), &acc);
                i = 0;
            } else {
                i += 1;
            }
        }
        pieces.push(acc);
    }
    // hulls of pieces may overlap without the pieces touching, which is fine:
    // only the grouping cost uses the hulls
    let k = pieces.len();
    if k > MAX_PIECES {
        return Err(Error::Input(format!(
            "small-m content handles at most {MAX_PIECES} connected pieces, got {k}"
        )));
    }
    if k == 0 {
        return Ok(T::zero());
    }
    let full = (1usize << k) - 1;
    let cost: Vec<T> = (0..=full)
        .map(|set| {
            let mut it = (0..k).filter(|i| set >> i & 1 == 1);
            let Some(first) = it.next() else { return T::zero() };
            let h = it.fold(pieces[first].clone(), |h, i| hull(&h, &pieces[i]));
            let r = (0..h.0.len()).map(|i| (h.1[i] - h.0[i]).half()).max().unwrap();
            r.to_real::<T>().powf(m)
        })
        .collect();
    let mut best = vec![T::infinity(); full + 1];
    best[0] = T::zero();
    for set in 1..=full {
        let low = set & set.wrapping_neg();
        let rest = set ^ low;
        // groups containing the lowest piece
        let mut sub = rest;
        loop {
            let group = sub | low;
            let v = cost[group] + best[set ^ group];
            if v < best[set] {
                best[set] = v;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    Ok(best[full])
}

/// Content for `m ≤ 1` of a union of closed balls.
pub fn hc_small_m_balls<T: Real>(balls: &[LinfBall], m: T) -> Result<T> {
    check_m(m)?;
    let boxes = balls
        .iter()
        .map(|b| ((0..b.n()).map(|i| b.lo(i)).collect(), (0..b.n()).map(|i| b.hi(i)).collect()))
        .collect();
    grouped_content(boxes, m)
}

/// Content for `m ≤ 1` of a voxel set, from its closed-connected components.
pub fn hc_small_m<T: Real>(x: &VoxelSet, m: T) -> Result<T> {
    check_m(m)?;
    let l = x.base_level();
    let boxes = x
        .components(true)
        .iter()
        .map(|comp| {
            let b = comp.bbox().expect("components are nonempty");
            (
                b.lo.iter().map(|v| DyadicScalar::new(*v, l)).collect(),
                b.hi.iter().map(|v| DyadicScalar::new(*v, l)).collect(),
            )
        })
        .collect();
    grouped_content(boxes, m)
}
