use serde::{Deserialize, Serialize};

use super::select::{
    verify_selection, GoodBall, SelectionReport, ITEM_COVER, ITEM_EQUALITY, ITEM_PROPORTIONAL,
    ITEM_SUBTRACTIVE,
};
use super::ConstantsRow;
use crate::content::{linf, restricted_content, BallCollection, ContentParams, Region};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Content bookkeeping of one emptying step, all w.r.t. the same ball family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmptyingReport {
    pub content_before: f64,
    /// Content of the points left outside every closed outer ball.
    pub content_after: f64,
    /// Content of the whole image, collapsed centers included.
    pub content_after_with_null: f64,
    /// `Σ (rᵢ/A)^m`.
    pub drop_lower_bound: f64,
    pub tau: f64,
    /// Weight of the ball family beyond the content of `X`.
    pub collection_excess: f64,
    /// `content_after / content_before`.
    pub q_factor: f64,
    /// `1 − (3C₂)^(−m)`.
    pub q_guarantee: f64,
    pub subtractive_holds: bool,
    pub factor_holds: bool,
    /// Annulus width per selected ball.
    pub deltas: Vec<f64>,
    pub collapsed: usize,
    pub moved_to_sphere: usize,
}

/// A straight sample path from a point to its image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub from: Vec<T>,
    pub to: Vec<T>,
}

/// Result of [`empty_balls_step`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmptyingStep<T> {
    pub next: Region<T>,
    pub trajectories: Vec<Segment<T>>,
    pub report: EmptyingReport,
    pub verification: SelectionReport,
}

/// Annulus width: at most an eighth of the window slack `R − C₁r`, and
/// small enough that no sample point sits strictly inside the annulus.
fn annulus_width<T: Real>(x: &Region<T>, g: &GoodBall<T>, window_lo: f64) -> T {
    let slack = (g.outer_radius - T::lit(window_lo) * g.inner_radius) * T::lit(0.125);
    let inner_gap = x
        .points
        .iter()
        .map(|p| linf(p, &g.center))
        .filter(|d| *d < g.outer_radius)
        .fold(T::zero(), T::max);
    slack
        .min((g.outer_radius - inner_gap) * T::lit(0.5))
        .max(T::zero())
}

/// Collapses each `B(xᵢ, Rᵢ − δᵢ)` onto its center and pushes the annulus
/// out to the sphere, leaving the rest of `X` fixed.
///
/// Works on sample points; `tau` is the tolerance on the subtractive drop.
pub fn empty_balls_step<T: Real>(
    x: &Region<T>,
    selection: &[GoodBall<T>],
    coll: &BallCollection,
    params: &ContentParams<T>,
    constants: &ConstantsRow,
    tau: T,
) -> Result<EmptyingStep<T>> {
    if !x.boxes.is_empty() {
        return Err(Error::Input("the emptying step acts on sample points only".into()));
    }
    let verification = verify_selection(x, coll, selection, params, constants)?;
    for item in [ITEM_COVER, ITEM_EQUALITY, ITEM_SUBTRACTIVE, ITEM_PROPORTIONAL] {
        if !verification.passes(item) {
            return Err(Error::Precondition(format!("selection fails {item}")));
        }
    }
    let m = params.m;
    let a = T::lit(constants.a_value());
    let deltas: Vec<T> = selection
        .iter()
        .map(|g| annulus_width(x, g, constants.window_lo))
        .collect();

    let mut next = Vec::with_capacity(x.points.len());
    let mut trajectories = Vec::with_capacity(x.points.len());
    let (mut collapsed, mut moved) = (0, 0);
    for p in &x.points {
        let mut image = p.clone();
        for (g, d) in selection.iter().zip(&deltas) {
            let dist = linf(p, &g.center);
            if dist <= g.outer_radius - *d {
                image = g.center.clone();
                collapsed += 1;
                break;
            }
            if dist < g.outer_radius {
                let s = g.outer_radius / dist;
                image = p.iter().zip(&g.center).map(|(q, c)| *c + (*q - *c) * s).collect();
                moved += 1;
                break;
            }
        }
        trajectories.push(Segment {
            from: p.clone(),
            to: image.clone(),
        });
        if !next.contains(&image) {
            next.push(image);
        }
    }
    let next = Region::from_points(x.n, next);

    let before = restricted_content(x, coll, params)?.value;
    let outer: Vec<(Vec<T>, T)> = selection
        .iter()
        .map(|g| (g.center.clone(), g.outer_radius))
        .collect();
    let after = restricted_content(&x.outside_balls(&outer), coll, params)?.value;
    let with_null = restricted_content(&next, coll, params)?.value;
    let drop: T = selection.iter().map(|g| (g.inner_radius / a).powf(m)).sum();
    let total_weight: T = coll.weights(m).into_iter().sum();
    let q_factor = if before > T::zero() { after / before } else { T::zero() };
    let q_guarantee = T::one() - T::one() / (T::lit(3.0 * constants.window_hi)).powf(m);
    let report = EmptyingReport {
        content_before: before.as_f64(),
        content_after: after.as_f64(),
        content_after_with_null: with_null.as_f64(),
        drop_lower_bound: drop.as_f64(),
        tau: tau.as_f64(),
        collection_excess: (total_weight - before).max(T::zero()).as_f64(),
        q_factor: q_factor.as_f64(),
        q_guarantee: q_guarantee.as_f64(),
        subtractive_holds: after <= before - drop + tau,
        factor_holds: q_factor <= q_guarantee + tau / before.max(T::min_positive_value()),
        deltas: deltas.iter().map(|d| d.as_f64()).collect(),
        collapsed,
        moved_to_sphere: moved,
    };
    Ok(EmptyingStep {
        next,
        trajectories,
        report,
        verification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicScalar, LinfBall};
    use crate::goodballs::{constants_at, find_good_ball, vitali_select};

    #[test]
    fn empty_input_is_identity() {
        let coll = BallCollection::new(vec![]).unwrap();
        let x = Region::<f64>::from_points(2, vec![]);
        let p = ContentParams::new(2.0, 2).unwrap();
        let k = constants_at(2.0).unwrap();
        let step = empty_balls_step(&x, &[], &coll, &p, &k, 0.0).unwrap();
        assert!(step.next.points.is_empty());
        assert_eq!(step.report.drop_lower_bound, 0.0);
    }

    #[test]
    fn one_ball_collapse() {
        let b = LinfBall::new(
            vec![DyadicScalar::from_int(0), DyadicScalar::from_int(0)],
            DyadicScalar::new(1, -1),
        );
        let coll = BallCollection::new(vec![b]).unwrap();
        let x = Region::from_points(2, vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![-0.25, 0.0]]);
        let p = ContentParams::new(2.0, 2).unwrap();
        let k = constants_at(2.0).unwrap();
        let g = find_good_ball(&x, &[0.0, 0.0], &coll, &p, &k).unwrap();
        let sel = vitali_select(&[g], &x).unwrap();
        let step = empty_balls_step(&x, &sel, &coll, &p, &k, 1e-12).unwrap();
        assert_eq!(step.next.points, vec![vec![0.0, 0.0]]);
        assert_eq!(step.report.content_after, 0.0);
        assert_eq!(step.report.content_after_with_null, 0.25);
        assert!(step.report.subtractive_holds && step.report.factor_holds);
        assert_eq!(step.trajectories.len(), 3);
    }
}
