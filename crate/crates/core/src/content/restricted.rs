use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::region::Region;
use super::ContentParams;
use crate::dyadic::LinfBall;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Collections at most this large (counting only balls that touch the
/// query) are solved exactly.
pub const EXACT_LIMIT: usize = 20;

const MAX_PIECES: u64 = 1 << 22;

/// A fixed family of ℓ∞ balls, none contained in another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCollection {
    balls: Vec<LinfBall>,
}

impl BallCollection {
    /// Validates that no ball lies inside another.
    pub fn new(balls: Vec<LinfBall>) -> Result<Self> {
        for (i, a) in balls.iter().enumerate() {
            for (j, b) in balls.iter().enumerate() {
                if i != j && b.contains_ball(a) {
                    return Err(Error::Input(format!("ball {i} is contained in ball {j}")));
                }
            }
        }
        if balls.len() > 64 {
            return Err(Error::Capacity(format!(
                "{} balls exceed the 64-ball limit",
                balls.len()
            )));
        }
        Ok(BallCollection { balls })
    }

    /// Drops every ball contained in another (keeping the first of equals).
    pub fn pruned(balls: Vec<LinfBall>) -> Result<Self> {
        let mut keep: Vec<LinfBall> = Vec::new();
        for (i, a) in balls.iter().enumerate() {
            let inside = balls.iter().enumerate().any(|(j, b)| {
                j != i && b.contains_ball(a) && (b != a || j < i)
            });
            if !inside {
                keep.push(a.clone());
            }
        }
        Self::new(keep)
    }

    pub fn balls(&self) -> &[LinfBall] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn radius<T: Real>(&self, j: usize) -> T {
        self.balls[j].radius_real()
    }

    pub fn weights<T: Real>(&self, m: T) -> Vec<T> {
        self.balls.iter().map(|b| b.radius_real::<T>().powf(m)).collect()
    }

    /// Sub-collection by index.
    pub fn subset(&self, idx: &[usize]) -> BallCollection {
        BallCollection {
            balls: idx.iter().map(|&j| self.balls[j].clone()).collect(),
        }
    }

    fn bounds<T: Real>(&self) -> Vec<(Vec<T>, Vec<T>)> {
        self.balls
            .iter()
            .map(|b| {
                let lo = (0..b.n()).map(|i| b.lo(i).to_real()).collect();
                let hi = (0..b.n()).map(|i| b.hi(i).to_real()).collect();
                (lo, hi)
            })
            .collect()
    }

    /// Bitmask of balls containing `p`.
    pub fn mask_of<T: Real>(&self, p: &[T]) -> u64 {
        let mut m = 0;
        for (j, (lo, hi)) in self.bounds::<T>().iter().enumerate() {
            if (0..p.len()).all(|i| lo[i] <= p[i] && p[i] <= hi[i]) {
                m |= 1 << j;
            }
        }
        m
    }
}

/// Minimum weight sub-collection covering a set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedContentResult<T> {
    pub value: T,
    pub chosen: Vec<usize>,
    /// Proven optimal; false means a greedy upper bound.
    pub exact: bool,
}

/// Cover constraints of `a`: one mask per atom, the balls containing it.
///
/// Box parts are split along every ball and box face coordinate; inside
/// each resulting piece membership in every ball is constant, so one
/// representative point per piece decides it.
pub(crate) fn atom_masks<T: Real>(a: &Region<T>, coll: &BallCollection) -> Result<BTreeSet<u64>> {
    let n = a.n;
    let bounds = coll.bounds::<T>();
    let mut masks = BTreeSet::new();
    for p in &a.points {
        masks.insert(coll.mask_of(p));
    }
    if a.boxes.is_empty() {
        return Ok(masks);
    }
    let mut cuts: Vec<Vec<T>> = vec![Vec::new(); n];
    for (axis, c) in cuts.iter_mut().enumerate() {
        for (lo, hi) in &bounds {
            c.push(lo[axis]);
            c.push(hi[axis]);
        }
        for b in &a.boxes {
            c.push(b.lo[axis]);
            c.push(b.hi[axis]);
        }
        c.sort_by(|x, y| x.partial_cmp(y).unwrap());
        c.dedup();
    }
    let mut pieces_seen: u64 = 0;
    for b in &a.boxes {
        // representative coordinates per axis with their ball masks
        let mut reps: Vec<Vec<u64>> = Vec::with_capacity(n);
        for axis in 0..n {
            let c = &cuts[axis];
            let mut vals: Vec<T> = Vec::new();
            let start = c.partition_point(|v| *v < b.lo[axis]);
            let end = c.partition_point(|v| *v <= b.hi[axis]);
            for k in start..end {
                vals.push(c[k]);
                if k + 1 < end {
                    vals.push((c[k] + c[k + 1]) * T::lit(0.5));
                }
            }
            let axis_masks = vals
                .iter()
                .map(|v| {
                    let mut m = 0u64;
                    for (j, (lo, hi)) in bounds.iter().enumerate() {
                        if lo[axis] <= *v && *v <= hi[axis] {
                            m |= 1 << j;
                        }
                    }
                    m
                })
                .collect();
            reps.push(axis_masks);
        }
        let count: u64 = reps.iter().map(|r| r.len() as u64).product();
        pieces_seen += count;
        if pieces_seen > MAX_PIECES {
            return Err(Error::Capacity("too many atoms in restricted content".into()));
        }
        let mut idx = vec![0usize; n];
        loop {
            let m = (0..n).fold(u64::MAX, |acc, i| acc & reps[i][idx[i]]);
            masks.insert(m);
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                idx[i] += 1;
                if idx[i] < reps[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(masks)
}

/// Keeps only inclusion-minimal constraints; a superset is hit whenever
/// its subset is.
fn minimal(masks: BTreeSet<u64>) -> Vec<u64> {
    let mut v: Vec<u64> = masks.into_iter().collect();
    v.sort_by_key(|m| (m.count_ones(), *m));
    let mut out: Vec<u64> = Vec::new();
    for m in v {
        if !out.iter().any(|k| k & m == *k) {
            out.push(m);
        }
    }
    out
}

fn greedy<T: Real>(cons: &[u64], w: &[T]) -> u64 {
    let mut chosen = 0u64;
    loop {
        let unc: Vec<u64> = cons.iter().copied().filter(|c| c & chosen == 0).collect();
        if unc.is_empty() {
            break;
        }
        let mut best: Option<(usize, T)> = None;
        for j in 0..w.len() {
            if chosen >> j & 1 == 1 {
                continue;
            }
            let hits = unc.iter().filter(|c| *c >> j & 1 == 1).count();
            if hits == 0 {
                continue;
            }
            let score = T::lit(hits as f64) / w[j];
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let (j, _) = best.expect("every constraint has an option");
        chosen |= 1 << j;
    }
    // drop redundant picks, heaviest first
    let mut order: Vec<usize> = (0..w.len()).filter(|j| chosen >> j & 1 == 1).collect();
    order.sort_by(|a, b| w[*b].partial_cmp(&w[*a]).unwrap().then(a.cmp(b)));
    for j in order {
        let without = chosen & !(1 << j);
        if cons.iter().all(|c| c & without != 0) {
            chosen = without;
        }
    }
    chosen
}

struct Search<'a, T> {
    cons: &'a [u64],
    w: &'a [T],
    best: T,
    best_set: u64,
}

impl<T: Real> Search<'_, T> {
    fn run(&mut self, chosen: u64, cost: T, forbidden: u64) {
        let unc: Vec<u64> = self
            .cons
            .iter()
            .copied()
            .filter(|c| c & chosen == 0)
            .collect();
        if unc.is_empty() {
            if cost < self.best {
                self.best = cost;
                self.best_set = chosen;
            }
            return;
        }
        let allowed = !forbidden & !chosen;
        let Some(pivot) = unc.iter().copied().min_by_key(|c| (c & allowed).count_ones()) else {
            return;
        };
        if pivot & allowed == 0 {
            return;
        }
        let mut max_cover = 0usize;
        let mut min_w = T::infinity();
        let live = unc.iter().fold(0u64, |a, c| a | c) & allowed;
        for j in 0..self.w.len() {
            if live >> j & 1 == 1 {
                let hits = unc.iter().filter(|c| *c >> j & 1 == 1).count();
                max_cover = max_cover.max(hits);
                min_w = min_w.min(self.w[j]);
            }
        }
        let need = unc.len().div_ceil(max_cover);
        if cost + T::lit(need as f64) * min_w >= self.best {
            return;
        }
        let mut options: Vec<usize> = (0..self.w.len())
            .filter(|j| (pivot & allowed) >> j & 1 == 1)
            .collect();
        options.sort_by(|a, b| self.w[*a].partial_cmp(&self.w[*b]).unwrap().then(a.cmp(b)));
        let mut forb = forbidden;
        for j in options {
            self.run(chosen | 1 << j, cost + self.w[j], forb);
            forb |= 1 << j;
        }
    }
}

/// Solves the weighted hitting-set problem behind the restricted content.
pub(crate) fn solve_masks<T: Real>(
    masks: BTreeSet<u64>,
    weights: &[T],
) -> Result<RestrictedContentResult<T>> {
    if masks.contains(&0) {
        return Err(Error::Coverage(
            "part of the set lies outside every collection ball".into(),
        ));
    }
    let cons = minimal(masks);
    if cons.is_empty() {
        return Ok(RestrictedContentResult {
            value: T::zero(),
            chosen: Vec::new(),
            exact: true,
        });
    }
    let relevant = cons.iter().fold(0u64, |a, c| a | c);
    let g = greedy(&cons, weights);
    let total = |set: u64| {
        (0..weights.len())
            .filter(|j| set >> j & 1 == 1)
            .fold(T::zero(), |a, j| a + weights[j])
    };
    let (set, exact) = if relevant.count_ones() as usize <= EXACT_LIMIT {
        let mut s = Search {
            cons: &cons,
            w: weights,
            best: total(g),
            best_set: g,
        };
        s.run(0, T::zero(), !relevant);
        (s.best_set, true)
    } else {
        (g, false)
    };
    Ok(RestrictedContentResult {
        value: total(set),
        chosen: (0..weights.len()).filter(|j| set >> j & 1 == 1).collect(),
        exact,
    })
}

/// Minimum of Σ rⱼ^m over sub-collections of `coll` covering `a`.
pub fn restricted_content<T: Real>(
    a: &Region<T>,
    coll: &BallCollection,
    params: &ContentParams<T>,
) -> Result<RestrictedContentResult<T>> {
    let masks = atom_masks(a, coll)?;
    solve_masks(masks, &coll.weights(params.m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::RBox;
    use crate::dyadic::DyadicScalar;

    fn ball(c: &[i64], r: i64) -> LinfBall {
        LinfBall::new(
            c.iter().map(|v| DyadicScalar::from_int(*v)).collect(),
            DyadicScalar::from_int(r),
        )
    }

    fn params(m: f64) -> ContentParams<f64> {
        ContentParams::new(m, 2).unwrap()
    }

    #[test]
    fn single_ball() {
        let coll = BallCollection::new(vec![ball(&[0, 0], 2), ball(&[3, 0], 2)]).unwrap();
        let a = Region::from_points(2, vec![vec![-1.0, 0.0]]);
        let r = restricted_content(&a, &coll, &params(2.0)).unwrap();
        assert_eq!(r.value, 4.0);
        assert_eq!(r.chosen, vec![0]);
        assert!(r.exact);
    }

    #[test]
    fn two_far_points() {
        let coll = BallCollection::new(vec![ball(&[0, 0], 1), ball(&[10, 0], 2)]).unwrap();
        let a = Region::from_points(2, vec![vec![0.0, 0.0], vec![10.0, 1.0]]);
        let r = restricted_content(&a, &coll, &params(1.5)).unwrap();
        assert!((r.value - (1.0 + 2f64.powf(1.5))).abs() < 1e-12);
        assert_eq!(r.chosen, vec![0, 1]);
    }

    #[test]
    fn empty_set() {
        let coll = BallCollection::new(vec![ball(&[0, 0], 1)]).unwrap();
        let r = restricted_content(&Region::empty(2), &coll, &params(1.0)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.chosen.is_empty());
    }

    #[test]
    fn uncovered_is_an_error() {
        let coll = BallCollection::new(vec![ball(&[0, 0], 1)]).unwrap();
        let a = Region::from_points(2, vec![vec![5.0, 5.0]]);
        assert!(matches!(
            restricted_content(&a, &coll, &params(1.0)),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn box_atoms() {
        let fb = |c: [f64; 2], r: f64| {
            LinfBall::new(
                c.iter().map(|v| DyadicScalar::from_f64(*v).unwrap()).collect(),
                DyadicScalar::from_f64(r).unwrap(),
            )
        };
        let coll = BallCollection::new(vec![
            fb([0.0, -0.5], 1.5),
            fb([2.0, -0.5], 1.5),
            fb([1.0, 0.5], 2.0),
        ])
        .unwrap();
        let a = Region {
            n: 2,
            boxes: vec![RBox::new(vec![-1.0, -1.0], vec![3.0, 1.0])],
            points: vec![],
        };
        // the big ball alone (cost 2) beats the pair (cost 3) at m = 1
        let r = restricted_content(&a, &coll, &params(1.0)).unwrap();
        assert_eq!((r.value, r.chosen), (2.0, vec![2]));
        // reaching below the big ball forces the pair
        let b = Region {
            n: 2,
            boxes: vec![RBox::new(vec![-1.0, -1.8], vec![3.0, 1.0])],
            points: vec![],
        };
        let r = restricted_content(&b, &coll, &params(1.0)).unwrap();
        assert_eq!((r.value, r.chosen), (3.0, vec![0, 1]));
    }

    #[test]
    fn contained_balls_rejected_or_pruned() {
        let balls = vec![ball(&[0, 0], 1), ball(&[0, 0], 3), ball(&[0, 0], 3)];
        assert!(BallCollection::new(balls.clone()).is_err());
        assert_eq!(BallCollection::pruned(balls).unwrap().len(), 1);
    }

    #[test]
    fn branch_and_bound_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let k = rng.gen_range(3..9);
            let balls: Vec<LinfBall> = (0..k)
                .map(|_| ball(&[rng.gen_range(0..12), rng.gen_range(0..12)], rng.gen_range(1..5)))
                .collect();
            let Ok(coll) = BallCollection::pruned(balls) else { continue };
            let pts: Vec<Vec<f64>> = (0..8)
                .map(|_| vec![rng.gen_range(0..12) as f64, rng.gen_range(0..12) as f64])
                .filter(|p| coll.mask_of(p) != 0)
                .collect();
            let a = Region::from_points(2, pts.clone());
            let got = restricted_content(&a, &coll, &params(1.5)).unwrap();
            let w = coll.weights(1.5f64);
            let mut best = f64::INFINITY;
            for set in 0u64..1 << coll.len() {
                if pts.iter().all(|p| coll.mask_of(p) & set != 0) {
                    let c: f64 = (0..coll.len()).filter(|j| set >> j & 1 == 1).map(|j| w[j]).sum();
                    best = best.min(c);
                }
            }
            assert!((got.value - best).abs() <= 1e-12 * best.max(1.0));
        }
    }
}
