//! Good-ball selection over a restricted content, the ball-emptying step,
//! the finite-dimensional reduction and the filling constants.

mod constants;
mod emptying;
mod reduce;
mod select;

pub use constants::{constants_at, constants_table, ConstantsRow, ConstantsTable};
pub use emptying::{empty_balls_step, EmptyingReport, EmptyingStep, Segment};
pub use reduce::{finite_dim_reduce, ReductionReport};
pub use select::{
    find_good_ball, good_balls_at_points, verify_selection, vitali_select, CheckItem, GoodBall,
    SelectionReport, ITEM_BOUNDARY, ITEM_COVER, ITEM_EQUALITY, ITEM_PROPORTIONAL, ITEM_SUBTRACTIVE,
    ITEM_SUM,
};

use std::collections::BTreeSet;

use crate::content::{hc_dyadic, restricted_content, BallCollection, ContentParams, Region};
use crate::dyadic::{DyadicScalar, LinfBall, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A near-optimal ball family for a point cloud.
///
/// Points are snapped to cells at `level`; the optimal dyadic cover of
/// those cells, read as ℓ∞ balls, is cut down to the sub-family attaining
/// the restricted content of the points. The level is coarsened until at
/// most `max_balls` remain.
pub fn collection_for_points<T: Real>(
    points: &Region<T>,
    level: i32,
    max_balls: usize,
    params: &ContentParams<T>,
) -> Result<(BallCollection, i32)> {
    if !points.boxes.is_empty() {
        return Err(Error::Input("expected a point cloud".into()));
    }
    if points.points.is_empty() {
        return Ok((BallCollection::new(Vec::new())?, level));
    }
    for lvl in level..level + 64 {
        let cells: BTreeSet<Vec<i64>> = points
            .points
            .iter()
            .map(|p| {
                p.iter()
                    .map(|c| DyadicScalar::from_f64(c.as_f64()).map(|d| d.floor_div_pow2(lvl)))
                    .collect::<Option<Vec<i64>>>()
                    .ok_or_else(|| Error::Input(format!("non-finite coordinate in {p:?}")))
            })
            .collect::<Result<_>>()?;
        let vox = VoxelSet::new(points.n, lvl, cells)?;
        let witness = hc_dyadic(&vox, params).witness_cover;
        let balls: Vec<LinfBall> = witness.iter().map(LinfBall::from_cube).collect();
        let coll = BallCollection::pruned(balls)?;
        if coll.len() > 64 {
            continue;
        }
        let best = restricted_content(points, &coll, params)?;
        let coll = coll.subset(&best.chosen);
        if coll.len() <= max_balls {
            return Ok((coll, lvl));
        }
    }
    Err(Error::Capacity("could not reduce the ball family".into()))
}
