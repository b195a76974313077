use serde::{Deserialize, Serialize};

use super::emptying::Segment;
use crate::content::linf;
use crate::dyadic::LinfBall;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of [`finite_dim_reduce`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport<T> {
    pub projected: Vec<Vec<T>>,
    pub trajectories: Vec<Segment<T>>,
    /// Per point, the largest ball with positive weight there.
    pub anchor_ball: Vec<usize>,
    /// Every image lies in the doubled anchor ball.
    pub images_in_double: bool,
    /// Every segment `[x, ψ(x)]` lies in the doubled anchor ball.
    pub segments_in_double: bool,
    /// `Σ (2rᵢ)^m`.
    pub doubled_sum: f64,
    /// `2^m · Σ rᵢ^m`.
    pub doubled_bound: f64,
    /// `doubled_sum / Σ rᵢ^m`, which should not exceed `2^m`.
    pub content_factor: f64,
    pub content_holds: bool,
}

/// Maps each point to the tent-weighted average of ball centers,
/// `ψ(x) = Σ φᵢ(x) xᵢ` with `φᵢ ∝ max(0, rᵢ − δ − ‖x − xᵢ‖∞)`.
pub fn finite_dim_reduce<T: Real>(
    points: &[Vec<T>],
    balls: &[LinfBall],
    delta: T,
    m: T,
) -> Result<ReductionReport<T>> {
    if !(m > T::zero()) {
        return Err(Error::Input(format!("exponent must be positive, got {m}")));
    }
    if delta < T::zero() {
        return Err(Error::Input(format!("negative delta {delta}")));
    }
    let centers: Vec<Vec<T>> = balls.iter().map(|b| b.center_real()).collect();
    let radii: Vec<T> = balls.iter().map(|b| b.radius_real()).collect();
    let two = T::lit(2.0);
    let mut projected = Vec::with_capacity(points.len());
    let mut trajectories = Vec::with_capacity(points.len());
    let mut anchor_ball = Vec::with_capacity(points.len());
    let (mut images_ok, mut segments_ok) = (true, true);
    for p in points {
        let w: Vec<T> = centers
            .iter()
            .zip(&radii)
            .map(|(c, r)| (*r - delta - linf(p, c)).max(T::zero()))
            .collect();
        let total: T = w.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Coverage(format!(
                "point {p:?} is not inside any shrunken ball"
            )));
        }
        let mut psi = vec![T::zero(); p.len()];
        for (wi, c) in w.iter().zip(&centers) {
            for (s, ci) in psi.iter_mut().zip(c) {
                *s = *s + *wi / total * *ci;
            }
        }
        let k = (0..balls.len())
            .filter(|&i| w[i] > T::zero())
            .max_by(|&i, &j| radii[i].partial_cmp(&radii[j]).unwrap().then(j.cmp(&i)))
            .expect("some weight is positive");
        let reach = two * radii[k];
        let image_in = linf(&psi, &centers[k]) <= reach;
        // the double ball is convex, so both endpoints inside settles the segment
        let start_in = linf(p, &centers[k]) <= reach;
        images_ok &= image_in;
        segments_ok &= image_in && start_in;
        anchor_ball.push(k);
        trajectories.push(Segment {
            from: p.clone(),
            to: psi.clone(),
        });
        projected.push(psi);
    }
    let plain: T = radii.iter().map(|r| r.powf(m)).sum();
    let doubled: T = radii.iter().map(|r| (two * *r).powf(m)).sum();
    let bound = two.powf(m) * plain;
    let factor = if plain > T::zero() { doubled / plain } else { T::zero() };
    Ok(ReductionReport {
        projected,
        trajectories,
        anchor_ball,
        images_in_double: images_ok,
        segments_in_double: segments_ok,
        doubled_sum: doubled.as_f64(),
        doubled_bound: bound.as_f64(),
        content_factor: factor.as_f64(),
        content_holds: doubled <= bound * (T::one() + T::lit(1e-12)),
    })
}
