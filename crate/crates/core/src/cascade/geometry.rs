//! Float geometry on faces and low-dimensional simplices.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real corners and free-axis mask of a face.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub free: u32,
}

impl<T: Real> FaceBox<T> {
    pub fn n(&self) -> usize {
        self.lo.len()
    }

    fn is_free(&self, i: usize) -> bool {
        self.free >> i & 1 == 1
    }

    /// Closed membership with tolerance.
    pub fn contains(&self, p: &[T], tol: T) -> bool {
        (0..self.n()).all(|i| self.lo[i] - tol <= p[i] && p[i] <= self.hi[i] + tol)
    }

    /// Relative interior membership: strictly inside along free axes by
    /// more than `tol`, within `tol` of the plane along fixed ones.
    pub fn in_relint(&self, p: &[T], tol: T) -> bool {
        (0..self.n()).all(|i| {
            if self.is_free(i) {
                self.lo[i] + tol < p[i] && p[i] < self.hi[i] - tol
            } else {
                (p[i] - self.lo[i]).abs() <= tol
            }
        })
    }

    pub fn center(&self) -> Vec<T> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (*a + *b) * T::lit(0.5))
            .collect()
    }

    /// Scaled exit coordinates `(pᵢ − Oᵢ)/(Bᵢ − Oᵢ)` for both sides of every
    /// free axis; the largest one names the facet the ray `O → p` leaves by.
    fn exit_scores(&self, o: &[T], p: &[T]) -> Vec<(usize, bool, T)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            if self.is_free(i) {
                out.push((i, true, (p[i] - o[i]) / (self.hi[i] - o[i])));
                out.push((i, false, (p[i] - o[i]) / (self.lo[i] - o[i])));
            }
        }
        out
    }

    /// Where the ray from `o` through `p` leaves the face. The exit axis is
    /// set exactly on its bound and the other coordinates are clamped.
    pub fn radial_project(&self, o: &[T], p: &[T]) -> Result<Vec<T>> {
        let scores = self.exit_scores(o, p);
        let best = scores
            .iter()
            .copied()
            .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
            .filter(|s| s.2 > T::zero());
        let Some((axis, upper, s)) = best else {
            return Err(Error::UndefinedProjection(format!(
                "point {p:?} coincides with the center"
            )));
        };
        if s >= T::one() {
            // already on the relative boundary
            return Ok(p.to_vec());
        }
        let mut q: Vec<T> = (0..self.n())
            .map(|i| {
                if self.is_free(i) {
                    (o[i] + (p[i] - o[i]) / s).max(self.lo[i]).min(self.hi[i])
                } else {
                    p[i]
                }
            })
            .collect();
        q[axis] = if upper { self.hi[axis] } else { self.lo[axis] };
        Ok(q)
    }

    /// Image of the segment `[a, b] ⊆ face` under radial projection, as
    /// straight pieces: along a line the exit score is an upper envelope of
    /// linear functions, and on each envelope piece the central projection
    /// onto a single facet maps segments to segments.
    pub fn project_segment(&self, o: &[T], a: &[T], b: &[T]) -> Result<Vec<(Vec<T>, Vec<T>)>> {
        let sa = self.exit_scores(o, a);
        let sb = self.exit_scores(o, b);
        let lines: Vec<(T, T)> = sa.iter().zip(&sb).map(|(x, y)| (x.2, y.2 - x.2)).collect();
        let eval = |k: usize, t: T| lines[k].0 + lines[k].1 * t;
        let argmax = |t: T| {
            (0..lines.len())
                .max_by(|&i, &j| {
                    eval(i, t)
                        .partial_cmp(&eval(j, t))
                        .unwrap()
                        .then(lines[i].1.partial_cmp(&lines[j].1).unwrap())
                })
                .expect("face has a free axis")
        };
        let mut breaks = vec![T::zero()];
        let mut t = T::zero();
        let mut k = argmax(t);
        loop {
            let mut next: Option<(T, usize)> = None;
            for j in 0..lines.len() {
                if lines[j].1 > lines[k].1 {
                    let tj = (lines[k].0 - lines[j].0) / (lines[j].1 - lines[k].1);
                    if tj > t && tj < T::one() && next.is_none_or(|(tn, _)| tj < tn) {
                        next = Some((tj, j));
                    }
                }
            }
            match next {
                Some((tn, j)) => {
                    breaks.push(tn);
                    t = tn;
                    k = j;
                }
                None => break,
            }
        }
        breaks.push(T::one());
        let at = |t: T| -> Vec<T> { a.iter().zip(b).map(|(x, y)| *x + (*y - *x) * t).collect() };
        let mut out = Vec::new();
        for w in breaks.windows(2) {
            let p = self.radial_project(o, &at(w[0]))?;
            let q = self.radial_project(o, &at(w[1]))?;
            out.push((p, q));
        }
        Ok(out)
    }
}

pub fn linf<T: Real>(a: &[T], b: &[T]) -> T {
    crate::content::linf(a, b)
}

/// Parameter range of `[a, b]` inside the closed box, Liang–Barsky style.
pub fn clip_segment<T: Real>(a: &[T], b: &[T], lo: &[T], hi: &[T]) -> Option<(T, T)> {
    let (mut t0, mut t1) = (T::zero(), T::one());
    for i in 0..a.len() {
        let d = b[i] - a[i];
        if d == T::zero() {
            if a[i] < lo[i] || a[i] > hi[i] {
                return None;
            }
            continue;
        }
        let (mut u, mut v) = ((lo[i] - a[i]) / d, (hi[i] - a[i]) / d);
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        t0 = t0.max(u);
        t1 = t1.min(v);
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

/// Clips a convex polygon (vertices in cyclic order) to a closed box.
pub fn clip_polygon<T: Real>(poly: &[Vec<T>], lo: &[T], hi: &[T]) -> Vec<Vec<T>> {
    let mut cur = poly.to_vec();
    for i in 0..lo.len() {
        for (bound, keep_above) in [(lo[i], true), (hi[i], false)] {
            if cur.is_empty() {
                return cur;
            }
            let inside = |p: &Vec<T>| if keep_above { p[i] >= bound } else { p[i] <= bound };
            let mut next = Vec::new();
            for k in 0..cur.len() {
                let p = &cur[k];
                let q = &cur[(k + 1) % cur.len()];
                let (pin, qin) = (inside(p), inside(q));
                if pin {
                    next.push(p.clone());
                }
                if pin != qin {
                    let t = (bound - p[i]) / (q[i] - p[i]);
                    let mut x: Vec<T> = p.iter().zip(q).map(|(a, b)| *a + (*b - *a) * t).collect();
                    x[i] = bound;
                    next.push(x);
                }
            }
            cur = next;
        }
    }
    cur
}

/// Affine dimension of a point set; −1 when empty.
pub fn affine_dim<T: Real>(pts: &[Vec<T>], tol: T) -> isize {
    let Some(base) = pts.first() else {
        return -1;
    };
    let mut basis: Vec<Vec<T>> = Vec::new();
    for p in &pts[1..] {
        let mut v: Vec<T> = p.iter().zip(base).map(|(a, b)| *a - *b).collect();
        for e in &basis {
            let dot: T = v.iter().zip(e).map(|(a, b)| *a * *b).sum();
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi = *vi - dot * *ei;
            }
        }
        let norm = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
        if norm > tol {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis.len() as isize
}

/// Whether `p` lies on the simplex with the given vertices (at most three),
/// up to ℓ∞ distance `tol`.
pub fn on_simplex<T: Real>(p: &[T], verts: &[Vec<T>], tol: T) -> bool {
    match verts.len() {
        0 => false,
        1 => linf(p, &verts[0]) <= tol,
        2 => {
            let (a, b) = (&verts[0], &verts[1]);
            let d: Vec<T> = a.iter().zip(b).map(|(x, y)| *y - *x).collect();
            let dd: T = d.iter().map(|x| *x * *x).sum();
            if dd == T::zero() {
                return linf(p, a) <= tol;
            }
            let t: T = p.iter().zip(a).zip(&d).map(|((pi, ai), di)| (*pi - *ai) * *di).sum::<T>() / dd;
            let t = t.max(T::zero()).min(T::one());
            let q: Vec<T> = a.iter().zip(&d).map(|(ai, di)| *ai + *di * t).collect();
            linf(p, &q) <= tol
        }
        _ => {
            let (a, b, c) = (&verts[0], &verts[1], &verts[2]);
            let u: Vec<T> = b.iter().zip(a).map(|(x, y)| *x - *y).collect();
            let v: Vec<T> = c.iter().zip(a).map(|(x, y)| *x - *y).collect();
            let w: Vec<T> = p.iter().zip(a).map(|(x, y)| *x - *y).collect();
            let dot = |x: &[T], y: &[T]| x.iter().zip(y).map(|(s, t)| *s * *t).sum::<T>();
            let (uu, uv, vv, wu, wv) = (dot(&u, &u), dot(&u, &v), dot(&v, &v), dot(&w, &u), dot(&w, &v));
            let det = uu * vv - uv * uv;
            if det.abs() <= T::epsilon() * uu * vv {
                return on_simplex(p, &verts[..2], tol) || on_simplex(p, &[a.clone(), c.clone()], tol);
            }
            let s = (wu * vv - wv * uv) / det;
            let t = (wv * uu - wu * uv) / det;
            let q: Vec<T> = (0..p.len()).map(|i| a[i] + u[i] * s + v[i] * t).collect();
            let slack = T::lit(1e-9);
            s >= -slack && t >= -slack && s + t <= T::one() + slack && linf(p, &q) <= tol
        }
    }
}

/// Axis-aligned bounding box of a vertex list.
pub fn bbox<T: Real>(verts: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let n = verts[0].len();
    let mut lo = verts[0].clone();
    let mut hi = verts[0].clone();
    for v in &verts[1..] {
        for i in 0..n {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

/// Triangulates a box of dimension at most two into simplices.
pub fn triangulate_box<T: Real>(lo: &[T], hi: &[T]) -> Vec<Vec<Vec<T>>> {
    let free: Vec<usize> = (0..lo.len()).filter(|&i| lo[i] < hi[i]).collect();
    match free.len() {
        0 => vec![vec![lo.to_vec()]],
        1 => vec![vec![lo.to_vec(), hi.to_vec()]],
        2 => {
            let (i, j) = (free[0], free[1]);
            let mut a = lo.to_vec();
            a[i] = hi[i];
            let mut b = lo.to_vec();
            b[j] = hi[j];
            vec![
                vec![lo.to_vec(), a.clone(), hi.to_vec()],
                vec![lo.to_vec(), b, hi.to_vec()],
            ]
        }
        _ => unreachable!("trace boxes have dimension at most two"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> FaceBox<f64> {
        FaceBox {
            lo: vec![0.0, 0.0],
            hi: vec![2.0, 2.0],
            free: 0b11,
        }
    }

    #[test]
    fn axis_ray() {
        let q = square().radial_project(&[1.0, 1.0], &[1.5, 1.0]).unwrap();
        assert_eq!(q, vec![2.0, 1.0]);
    }

    #[test]
    fn oblique_ray() {
        let q = square().radial_project(&[1.0, 1.0], &[1.5, 1.25]).unwrap();
        assert_eq!(q, vec![2.0, 1.5]);
    }

    #[test]
    fn boundary_is_fixed() {
        let q = square().radial_project(&[1.0, 1.0], &[0.0, 0.3]).unwrap();
        assert_eq!(q, vec![0.0, 0.3]);
        assert!(square().radial_project(&[1.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn segment_image_bends_at_corner() {
        // from (1.5, 1) to (1, 1.5): exits via x = 2 then y = 2
        let pieces = square().project_segment(&[1.0, 1.0], &[1.5, 1.0], &[1.0, 1.5]).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].0, vec![2.0, 1.0]);
        assert_eq!(pieces[0].1, vec![2.0, 2.0]);
        assert_eq!(pieces[1].1, vec![1.0, 2.0]);
    }

    #[test]
    fn clipping() {
        assert_eq!(clip_segment(&[-1.0, 0.5], &[3.0, 0.5], &[0.0, 0.0], &[2.0, 1.0]), Some((0.25, 0.75)));
        let tri = vec![vec![-1.0, -1.0], vec![3.0, -1.0], vec![-1.0, 3.0]];
        let c = clip_polygon(&tri, &[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(affine_dim(&c, 1e-12), 2);
        assert!(on_simplex(&[0.5, 0.5], &tri, 1e-12));
        assert!(!on_simplex(&[2.5, 2.5], &tri, 1e-12));
    }
}
