use serde::{Deserialize, Serialize};

use super::ConstantsRow;
use crate::content::{
    candidate_radii, linf, restricted_content, slice_critical_radii, sphere_slice_content,
    BallCollection, ContentParams, Region,
};
use crate::error::{Error, Result};
use crate::scalar::{approx_eq_rel, Real};

/// A ball `B(x, r)` whose restricted content is exactly `(r/A)^m`, with an
/// outer radius `R ∈ [C₁r, C₂r]` carrying a light sphere slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodBall<T> {
    pub center: Vec<T>,
    /// Index of the center among the sample points, when it is one.
    pub point: Option<usize>,
    pub inner_radius: T,
    pub outer_radius: T,
    /// `~HC_m(B(x, r) ∩ X)`.
    pub inner_content: T,
    /// `~HC_{m−1}(S(x, R) ∩ X)`.
    pub boundary_content: T,
}

/// Restricted content of `X ∩ B(x, ρ)`, refusing inexact answers.
fn content_in_ball<T: Real>(
    x: &Region<T>,
    center: &[T],
    rho: T,
    coll: &BallCollection,
    params: &ContentParams<T>,
) -> Result<T> {
    let res = restricted_content(&x.in_ball(center, rho), coll, params)?;
    if !res.exact {
        return Err(Error::Precondition(format!(
            "restricted content near {center:?} is not exact: too many relevant balls"
        )));
    }
    Ok(res.value)
}

/// Radii where `ρ ↦ X ∩ B(x, ρ)` can change its restricted content.
fn ball_critical_radii<T: Real>(x: &Region<T>, center: &[T], coll: &BallCollection) -> Vec<T> {
    let mut out = if x.boxes.is_empty() {
        // a finite point set: only the points themselves matter
        let mut d = x.distances_from(center);
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        d.dedup();
        d
    } else {
        slice_critical_radii(x, center, coll)
    };
    out.retain(|r| *r > T::zero());
    out
}

/// Largest `ρ` with `~HC_m(B(x,ρ)∩X) ≥ (ρ/A)^m`, and the content there.
///
/// The content is monotone and constant on each critical radius and on
/// each open gap between consecutive ones. Walking those pieces in order,
/// the last piece admitting some qualifying `ρ` contains the supremum,
/// which satisfies the equality exactly.
fn sup_radius<T: Real>(
    x: &Region<T>,
    center: &[T],
    coll: &BallCollection,
    params: &ContentParams<T>,
    a: T,
) -> Result<(T, T, Vec<T>)> {
    let m = params.m;
    let crit = ball_critical_radii(x, center, coll);
    let reach = |f: T| a * f.powf(T::one() / m);
    let mut marks = vec![T::zero()];
    marks.extend(crit.iter().copied());
    let mut best: Option<(T, T)> = None;
    for (k, lo) in marks.iter().copied().enumerate() {
        if lo > T::zero() {
            let f = content_in_ball(x, center, lo, coll, params)?;
            if lo <= reach(f) {
                best = Some((lo, f));
            }
        }
        let probe = match marks.get(k + 1) {
            Some(hi) => (lo + *hi) * T::lit(0.5),
            None => lo * T::lit(2.0) + T::one(),
        };
        let f = content_in_ball(x, center, probe, coll, params)?;
        if lo < reach(f) {
            best = Some((reach(f), f));
        }
    }
    let (r, f) = best.ok_or_else(|| {
        Error::InternalInvariant(format!("no qualifying radius at {center:?}"))
    })?;
    Ok((r, f, crit))
}

/// Finds the good ball centered at `center`. Requires `m ≥ 1` so the
/// sphere slice exponent `m − 1` is meaningful.
pub fn find_good_ball<T: Real>(
    x: &Region<T>,
    center: &[T],
    coll: &BallCollection,
    params: &ContentParams<T>,
    constants: &ConstantsRow,
) -> Result<GoodBall<T>> {
    let m = params.m;
    if m < T::one() {
        return Err(Error::Domain("good balls need m ≥ 1".into()));
    }
    let a = T::lit(constants.a_value());
    if !a.is_finite() {
        return Err(Error::Capacity("A(m) overflows the scalar type".into()));
    }
    let (r, f, _) = sup_radius(x, center, coll, params, a)?;
    let lo = T::lit(constants.window_lo) * r;
    let hi = T::lit(constants.window_hi) * r;
    let mut cands = vec![lo];
    cands.extend(candidate_radii(&slice_critical_radii(x, center, coll), lo, hi));
    cands.push(hi);
    let m_slice = m - T::one();
    let mut chosen: Option<(T, T)> = None;
    for big in cands {
        let (s, exact) = sphere_slice_content(x, center, big, coll, m_slice)?;
        if !exact {
            return Err(Error::Precondition("sphere slice content is not exact".into()));
        }
        if chosen.is_none_or(|(_, best)| s < best) {
            chosen = Some((big, s));
        }
    }
    let (outer, slice) = chosen.expect("window has candidates");
    // the coarea argument over the annulus guarantees this much
    let provable = T::lit(2.0 / (constants.window_hi - constants.window_lo))
        * T::lit(constants.window_hi).powf(m)
        * r.powf(m_slice)
        / a.powf(m);
    if slice > provable * (T::one() + T::lit(1e-9)) {
        return Err(Error::InternalInvariant(format!(
            "slice content {slice} exceeds the coarea bound {provable}"
        )));
    }
    Ok(GoodBall {
        center: center.to_vec(),
        point: None,
        inner_radius: r,
        outer_radius: outer,
        inner_content: f,
        boundary_content: slice,
    })
}

/// Good balls for every sample point, in point order.
pub fn good_balls_at_points<T: Real>(
    x: &Region<T>,
    coll: &BallCollection,
    params: &ContentParams<T>,
    constants: &ConstantsRow,
) -> Result<Vec<GoodBall<T>>> {
    use rayon::prelude::*;
    x.points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut g = find_good_ball(x, p, coll, params, constants)?;
            g.point = Some(i);
            Ok(g)
        })
        .collect()
}

fn disjoint<T: Real>(a: &GoodBall<T>, b: &GoodBall<T>) -> bool {
    linf(&a.center, &b.center) > a.outer_radius + b.outer_radius
}

/// Whether `X ⊆ ⋃ B(cᵢ, rᵢ)`; returns an uncovered witness otherwise.
fn uncovered_witness<T: Real>(x: &Region<T>, balls: &[(Vec<T>, T)]) -> Option<Vec<T>> {
    let rest = x.outside_balls(balls);
    if let Some(p) = rest.points.first() {
        return Some(p.clone());
    }
    rest.boxes
        .iter()
        .find(|b| (0..b.n()).all(|i| b.lo[i] < b.hi[i]))
        .map(|b| b.lo.iter().zip(&b.hi).map(|(l, h)| (*l + *h) * T::lit(0.5)).collect())
}

/// Greedy Vitali selection: largest outer radius first, keeping a ball iff
/// its closed outer ball misses every kept one. Fails when the tripled
/// kept balls leave part of `X` uncovered.
pub fn vitali_select<T: Real>(candidates: &[GoodBall<T>], x: &Region<T>) -> Result<Vec<GoodBall<T>>> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| {
        candidates[j]
            .outer_radius
            .partial_cmp(&candidates[i].outer_radius)
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut kept: Vec<GoodBall<T>> = Vec::new();
    for i in order {
        let c = &candidates[i];
        if kept.iter().all(|k| disjoint(k, c)) {
            kept.push(c.clone());
        }
    }
    let tripled: Vec<(Vec<T>, T)> = kept
        .iter()
        .map(|g| (g.center.clone(), g.outer_radius * T::lit(3.0)))
        .collect();
    if let Some(p) = uncovered_witness(x, &tripled) {
        return Err(Error::NetResolution(format!(
            "point {p:?} is outside every tripled selected ball"
        )));
    }
    Ok(kept)
}

/// One verified property of a selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    /// Margin by which the inequality holds; negative on failure. For
    /// equalities, minus the worst relative error.
    pub slack: f64,
}

/// Per-item verdicts on a good-ball selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub items: Vec<CheckItem>,
    pub content_x: f64,
    pub content_outside: f64,
    pub inner_sum: f64,
    pub selected: usize,
}

impl SelectionReport {
    pub fn item(&self, name: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn passes(&self, name: &str) -> bool {
        self.item(name).is_some_and(|i| i.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

pub const ITEM_COVER: &str = "disjoint_and_tripled_cover";
pub const ITEM_EQUALITY: &str = "inner_content_equality";
pub const ITEM_BOUNDARY: &str = "boundary_slice_bound";
pub const ITEM_SUBTRACTIVE: &str = "subtractive_bound";
pub const ITEM_PROPORTIONAL: &str = "proportional_drop";
pub const ITEM_SUM: &str = "inner_sum_below_content";

const EQ_TOL: f64 = 1e-9;

/// Checks the good-ball guarantees on a selection. Failures are report
/// entries; errors only come from content evaluation.
pub fn verify_selection<T: Real>(
    x: &Region<T>,
    coll: &BallCollection,
    selection: &[GoodBall<T>],
    params: &ContentParams<T>,
    constants: &ConstantsRow,
) -> Result<SelectionReport> {
    let m = params.m;
    let a = T::lit(constants.a_value());
    let mut items = Vec::new();

    // disjoint outer balls, tripled ones covering X
    let mut gap = f64::INFINITY;
    for (i, p) in selection.iter().enumerate() {
        for q in &selection[i + 1..] {
            let g = linf(&p.center, &q.center) - p.outer_radius - q.outer_radius;
            gap = gap.min(g.as_f64());
        }
    }
    let tripled: Vec<(Vec<T>, T)> = selection
        .iter()
        .map(|g| (g.center.clone(), g.outer_radius * T::lit(3.0)))
        .collect();
    let covered = uncovered_witness(x, &tripled).is_none();
    items.push(CheckItem {
        name: ITEM_COVER.into(),
        pass: gap > 0.0 && covered,
        slack: if covered { gap } else { -1.0 },
    });

    // content of B(x, r) is (r/A)^m, and strictly below for larger radii
    let mut worst = 0.0f64;
    let mut strict = true;
    let mut window = true;
    for g in selection {
        window &= g.outer_radius >= T::lit(constants.window_lo) * g.inner_radius * T::lit(1.0 - 1e-12)
            && g.outer_radius <= T::lit(constants.window_hi) * g.inner_radius * T::lit(1.0 + 1e-12);
        let target = (g.inner_radius / a).powf(m);
        let f = content_in_ball(x, &g.center, g.inner_radius, coll, params)?;
        if !approx_eq_rel(f, target, T::lit(EQ_TOL)) {
            // rounding can place r a hair below a critical radius it equals
            let f_up = content_in_ball(x, &g.center, g.inner_radius * T::lit(1.0 + 1e-12), coll, params)?;
            let err = ((f_up - target).abs() / target).as_f64();
            worst = worst.max(err);
        }
        let crit = ball_critical_radii(x, &g.center, coll);
        let later: Vec<T> = crit
            .iter()
            .copied()
            .filter(|c| *c > g.inner_radius * T::lit(1.0 + 1e-9))
            .collect();
        let mut probes = later.clone();
        for w in later.windows(2) {
            probes.push((w[0] + w[1]) * T::lit(0.5));
        }
        if let Some(last) = later.last() {
            probes.push(*last * T::lit(2.0));
        }
        for rho in probes {
            let f = content_in_ball(x, &g.center, rho, coll, params)?;
            if f >= (rho / a).powf(m) {
                strict = false;
            }
        }
    }
    items.push(CheckItem {
        name: ITEM_EQUALITY.into(),
        pass: worst <= EQ_TOL && strict && window,
        slack: -worst,
    });

    // boundary slices under 2/(C₂−C₁)·C₂^(m−1)·r^(m−1)/A^m
    let mut slack = f64::INFINITY;
    for g in selection {
        let bound = T::lit(2.0 / (constants.window_hi - constants.window_lo))
            * T::lit(constants.window_hi).powf(m - T::one())
            * g.inner_radius.powf(m - T::one())
            / a.powf(m);
        slack = slack.min((bound - g.boundary_content).as_f64());
    }
    items.push(CheckItem {
        name: ITEM_BOUNDARY.into(),
        pass: slack >= 0.0,
        slack,
    });

    let content_x = restricted_content(x, coll, params)?.value;
    let outer: Vec<(Vec<T>, T)> = selection
        .iter()
        .map(|g| (g.center.clone(), g.outer_radius))
        .collect();
    let content_outside = restricted_content(&x.outside_balls(&outer), coll, params)?.value;
    let inner_sum: T = selection.iter().map(|g| (g.inner_radius / a).powf(m)).sum();
    let tol = T::lit(1e-9) * content_x;

    let rhs = content_x - inner_sum;
    items.push(CheckItem {
        name: ITEM_SUBTRACTIVE.into(),
        pass: content_outside <= rhs + tol,
        slack: (rhs - content_outside).as_f64(),
    });

    let share = T::one() / (T::lit(3.0) * T::lit(constants.window_hi)).powf(m);
    items.push(CheckItem {
        name: ITEM_PROPORTIONAL.into(),
        pass: inner_sum + tol >= share * content_x,
        slack: (inner_sum - share * content_x).as_f64(),
    });

    items.push(CheckItem {
        name: ITEM_SUM.into(),
        pass: inner_sum <= content_x + tol,
        slack: (content_x - inner_sum).as_f64(),
    });

    Ok(SelectionReport {
        items,
        content_x: content_x.as_f64(),
        content_outside: content_outside.as_f64(),
        inner_sum: inner_sum.as_f64(),
        selected: selection.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicScalar, LinfBall};
    use crate::goodballs::constants_at;

    fn ball(c: &[f64], r: f64) -> LinfBall {
        LinfBall::new(
            c.iter().map(|v| DyadicScalar::from_f64(*v).unwrap()).collect(),
            DyadicScalar::from_f64(r).unwrap(),
        )
    }

    #[test]
    fn single_ball_radius_is_a_times_r1() {
        let coll = BallCollection::new(vec![ball(&[0.0, 0.0], 0.5)]).unwrap();
        let x = Region::from_points(2, vec![vec![0.0, 0.0], vec![0.25, -0.5], vec![0.5, 0.1]]);
        let p = ContentParams::new(2.0, 2).unwrap();
        let k = constants_at(2.0).unwrap();
        let g: GoodBall<f64> = find_good_ball(&x, &[0.0, 0.0], &coll, &p, &k).unwrap();
        assert!((g.inner_radius - 60.0 * 0.5).abs() < 1e-12);
        assert!((g.inner_content - 0.25).abs() < 1e-15);
        assert!((g.inner_content - (g.inner_radius / 60.0).powi(2)).abs() < 1e-12);
        assert_eq!(g.boundary_content, 0.0);
        assert!(g.outer_radius >= 1.5 * g.inner_radius && g.outer_radius <= 2.0 * g.inner_radius);
        let sel = vitali_select(&[g], &x).unwrap();
        let rep = verify_selection(&x, &coll, &sel, &p, &k).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn vitali_drops_overlapping_smaller() {
        let mk = |c: f64, r: f64| GoodBall {
            center: vec![c],
            point: None,
            inner_radius: r / 1.6,
            outer_radius: r,
            inner_content: 0.0,
            boundary_content: 0.0,
        };
        let x = Region::from_points(1, vec![vec![0.0], vec![1.5], vec![10.0]]);
        let kept = vitali_select(&[mk(1.5, 0.5), mk(0.0, 2.0), mk(10.0, 1.0)], &x).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].center, vec![0.0]);
        assert_eq!(kept[1].center, vec![10.0]);
        // the far point is lost if its ball is missing
        let err = vitali_select(&[mk(0.0, 2.0)], &x).unwrap_err();
        assert!(matches!(err, Error::NetResolution(_)));
    }

    #[test]
    fn two_clusters() {
        let coll = BallCollection::new(vec![ball(&[0.0, 0.0], 1.0), ball(&[1000.0, 0.0], 0.5)]).unwrap();
        let x = Region::from_points(
            2,
            vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![1000.0, 0.0], vec![1000.25, 0.0]],
        );
        let p = ContentParams::new(1.5, 2).unwrap();
        let k = constants_at(1.5).unwrap();
        let cands = good_balls_at_points(&x, &coll, &p, &k).unwrap();
        let sel = vitali_select(&cands, &x).unwrap();
        let rep = verify_selection(&x, &coll, &sel, &p, &k).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }
}
