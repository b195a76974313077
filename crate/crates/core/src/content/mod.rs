//! Dyadic Hausdorff content and the restricted content over a ball family.

mod ball_cover;
mod brute;
mod coarea;
mod dp;
mod region;
mod restricted;
mod small_m;

pub use ball_cover::cover_ball_dyadic;
pub use brute::hc_dyadic_bruteforce;
pub(crate) use coarea::candidate_radii;
pub use coarea::{coarea_search, slice_critical_radii, sphere_slice_content, CoareaResult};
pub use dp::{hc_cubes, hc_dyadic, hc_sandwich, ContentResult, ContentTree};
pub use region::{linf, RBox, Region};
pub use restricted::{restricted_content, BallCollection, RestrictedContentResult, EXACT_LIMIT};
pub use small_m::{hc_small_m, hc_small_m_balls};

use crate::dyadic::MAX_DIM;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exponent and ambient dimension of a content query.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContentParams<T> {
    pub m: T,
    pub n: usize,
}

impl<T: Real> ContentParams<T> {
    pub fn new(m: T, n: usize) -> Result<Self> {
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::Input(format!("content exponent must be positive, got {m}")));
        }
        if n == 0 || n > MAX_DIM {
            return Err(Error::Input(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        Ok(ContentParams { m, n })
    }

    /// `⌈m⌉` as an integer.
    pub fn ceil_m(&self) -> usize {
        self.m.ceil().as_f64() as usize
    }
}
