use serde::{Deserialize, Serialize};

use super::region::Region;
use super::restricted::{atom_masks, solve_masks, BallCollection};
use super::ContentParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of [`coarea_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoareaResult<T> {
    pub radius: T,
    /// Restricted content of the sphere slice, exponent `m − 1`.
    pub slice_content: T,
    /// Restricted content of the annulus, exponent `m`.
    pub annulus_content: T,
    pub bound: T,
    pub candidates_checked: usize,
    pub exact: bool,
}

/// Radii at which the slice `X ∩ S(x, r)` can change its restricted
/// content: distances from `x` to features of `X` and to ball faces.
pub fn slice_critical_radii<T: Real>(x: &Region<T>, center: &[T], coll: &BallCollection) -> Vec<T> {
    let mut out = x.distances_from(center);
    for b in coll.balls() {
        for i in 0..b.n() {
            out.push((b.lo(i).to_real::<T>() - center[i]).abs());
            out.push((b.hi(i).to_real::<T>() - center[i]).abs());
        }
    }
    out.retain(|v| v.is_finite());
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// Candidate radii in `(lo, hi)`: critical radii and the midpoints between
/// consecutive ones, ascending.
pub(crate) fn candidate_radii<T: Real>(critical: &[T], lo: T, hi: T) -> Vec<T> {
    let mut marks = vec![lo];
    marks.extend(critical.iter().copied().filter(|r| *r > lo && *r < hi));
    marks.push(hi);
    let mut out = Vec::with_capacity(2 * marks.len());
    for w in marks.windows(2) {
        if w[0] > lo {
            out.push(w[0]);
        }
        let mid = (w[0] + w[1]) * T::lit(0.5);
        if mid > lo && mid < hi {
            out.push(mid);
        }
    }
    out.dedup();
    out
}

/// Restricted content of `X ∩ S(x, r)` with exponent `m_slice`.
pub fn sphere_slice_content<T: Real>(
    x: &Region<T>,
    center: &[T],
    r: T,
    coll: &BallCollection,
    m_slice: T,
) -> Result<(T, bool)> {
    let slice = x.on_sphere(center, r);
    let w: Vec<T> = (0..coll.len()).map(|j| coll.radius::<T>(j).powf(m_slice)).collect();
    let res = solve_masks(atom_masks(&slice, coll)?, &w)?;
    Ok((res.value, res.exact))
}

/// Finds `r ∈ (r1, r2)` whose sphere slice obeys the coarea bound
/// `~HC_{m−1}(X ∩ S(x,r)) ≤ 2/(r2−r1) · ~HC_m(X ∩ A(x,r1,r2))`.
///
/// The slice content is piecewise constant between critical radii, so
/// trying each critical radius and each gap midpoint in ascending order
/// settles existence; the smallest qualifying radius is returned.
pub fn coarea_search<T: Real>(
    x: &Region<T>,
    center: &[T],
    r1: T,
    r2: T,
    coll: &BallCollection,
    params: &ContentParams<T>,
) -> Result<CoareaResult<T>> {
    if !(r1 > T::zero() && r2 > r1) {
        return Err(Error::Input(format!("need 0 < r1 < r2, got {r1}, {r2}")));
    }
    if params.m < T::one() {
        return Err(Error::Domain("coarea slices need m ≥ 1".into()));
    }
    let annulus = x.in_annulus(center, r1, r2);
    let ann = super::restricted_content(&annulus, coll, params)?;
    let bound = T::lit(2.0) / (r2 - r1) * ann.value;
    let m_slice = params.m - T::one();
    let cands = candidate_radii(&slice_critical_radii(x, center, coll), r1, r2);
    let tol = T::lit(1e-12);
    for (k, r) in cands.iter().enumerate() {
        let (slice, exact) = sphere_slice_content(x, center, *r, coll, m_slice)?;
        if slice <= bound * (T::one() + tol) {
            return Ok(CoareaResult {
                radius: *r,
                slice_content: slice,
                annulus_content: ann.value,
                bound,
                candidates_checked: k + 1,
                exact: exact && ann.exact,
            });
        }
    }
    Err(Error::InternalInvariant(format!(
        "no radius in ({r1}, {r2}) meets the coarea bound {bound}"
    )))
}
