use crate::dyadic::{DyadicCube, DyadicScalar, LinfBall};
use crate::error::{Error, Result};

/// Multiples of `2^k` inside `[lo, hi]`.
fn lattice_count(lo: DyadicScalar, hi: DyadicScalar, k: i32) -> i64 {
    hi.floor_div_pow2(k) - lo.ceil_div_pow2(k) + 1
}

/// Covers an ℓ∞ ball of diameter `s` by at most `4^n` dyadic cubes of size
/// at most `2s`.
///
/// Per axis, the smallest dyadic length `dᵢ` with exactly one lattice point
/// `xᵢ` inside the projection is found; then `(xᵢ − dᵢ, xᵢ + dᵢ)` contains
/// the projection, and it is split into segments of the common length
/// `min dᵢ`, keeping only those that overlap the projection.
pub fn cover_ball_dyadic(ball: &LinfBall) -> Result<Vec<DyadicCube>> {
    if ball.radius <= DyadicScalar::ZERO {
        return Err(Error::Input("ball radius must be positive".into()));
    }
    if let Some(q) = ball.as_dyadic_cube() {
        return Ok(vec![q]);
    }
    let n = ball.n();
    let s = ball.diameter();
    // largest power of two not exceeding s/2
    let mut start = s.level() - 1;
    while DyadicScalar::pow2(start + 1) <= s.half() {
        start += 1;
    }
    while DyadicScalar::pow2(start) > s.half() {
        start -= 1;
    }
    let mut unique: Vec<(i32, DyadicScalar)> = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = (ball.lo(i), ball.hi(i));
        let mut k = start;
        // an interval of length s ≥ 2^(k+1) holds at least two points of the
        // 2^k lattice, and doubling never jumps from two or more to none
        debug_assert!(lattice_count(lo, hi, k) >= 2);
        while lattice_count(lo, hi, k) > 1 {
            k += 1;
        }
        let x = DyadicScalar::pow2(k).mul_int(hi.floor_div_pow2(k));
        unique.push((k, x));
    }
    let kmin = unique.iter().map(|u| u.0).min().unwrap();
    let mut per_axis: Vec<Vec<i64>> = Vec::with_capacity(n);
    for (i, &(k, x)) in unique.iter().enumerate() {
        let (lo, hi) = (ball.lo(i), ball.hi(i));
        let center = x.grid(kmin);
        let reach = 1i64 << (k - kmin);
        let segs: Vec<i64> = (center - reach..center + reach)
            .filter(|&a| {
                let slo = DyadicScalar::new(a, kmin);
                let shi = DyadicScalar::new(a + 1, kmin);
                slo < hi && shi > lo
            })
            .collect();
        per_axis.push(segs);
    }
    let mut out = vec![Vec::new()];
    for segs in &per_axis {
        let mut next = Vec::with_capacity(out.len() * segs.len());
        for prefix in &out {
            for a in segs {
                let mut v: Vec<i64> = prefix.clone();
                v.push(*a);
                next.push(v);
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(|a| DyadicCube::new(kmin, a)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64) -> DyadicScalar {
        DyadicScalar::from_f64(x).unwrap()
    }

    #[test]
    fn dyadic_ball_is_itself() {
        let q = DyadicCube::new(1, vec![1, -3]);
        let b = LinfBall::from_cube(&q);
        assert_eq!(cover_ball_dyadic(&b).unwrap(), vec![q]);
    }

    #[test]
    fn one_dim_hand_case() {
        // the ball [0.3, 1.3]
        let b = LinfBall::new(vec![d(0.8)], d(0.5));
        let cover = cover_ball_dyadic(&b).unwrap();
        assert_eq!(
            cover,
            vec![DyadicCube::new(0, vec![0]), DyadicCube::new(0, vec![1])]
        );
    }

    #[test]
    fn rejects_zero_radius() {
        let b = LinfBall::new(vec![d(0.0)], DyadicScalar::ZERO);
        assert!(cover_ball_dyadic(&b).is_err());
    }
}
