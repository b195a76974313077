//! Radial-projection filling of a covered set, face by face.
//!
//! The set is carried as finite samples plus trace simplices of dimension
//! below `⌈m⌉`. Each step takes the smallest remaining face, pushes the
//! samples in its relative interior onto its boundary from a chosen center,
//! and replaces it by its uncovered facets.

mod admissible;
mod audit;
mod geometry;

pub use admissible::{admissible_set, AdmissibleSet, FacePool};
pub use audit::{density_evolution_audit, AuditReport, AuditViolation};
pub use geometry::FaceBox;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::content::{hc_dyadic, ContentParams};
use crate::cover::CoverFamily;
use crate::dyadic::{enumerate_faces, DyadicCube, DyadicFace, IBox, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;
use geometry::{affine_dim, bbox, clip_polygon, clip_segment, linf, on_simplex, triangulate_box};

/// Tunables of a cascade run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Accepted growth of snapped content under one projection.
    pub c_scale: f64,
    /// Density below which a good projection center is guaranteed to exist.
    pub c_maxdensity: f64,
    /// Candidate centers tried per step.
    pub center_budget: usize,
    /// ℓ∞ tolerance for membership tests.
    pub snap_tol: f64,
    pub seed: u64,
    /// Record the snapped content of all samples after every step.
    pub record_content_series: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            c_scale: 8.0,
            c_maxdensity: 0.05,
            center_budget: 256,
            snap_tol: 1e-9,
            seed: 0,
            record_content_series: false,
        }
    }
}

/// Where samples are placed inside each cell of `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingSpec {
    /// Regular sub-grid points per axis and cell, at offsets `(j + ½)/k`.
    pub per_cell: usize,
    pub corners: bool,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            per_cell: 2,
            corners: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint<T> {
    pub id: usize,
    pub position: Vec<T>,
    /// Polyline of positions, starting at the original one.
    pub trajectory: Vec<Vec<T>>,
    /// Total ℓ∞ length of the polyline.
    pub length: T,
    pub on_trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// An uncovered facet of dimension `⌈m⌉ − 1`.
    Facet,
    /// A segment from a trace point to its projection.
    Insertion,
    /// The projected image of an older trace.
    Image,
}

/// A simplex of dimension below `⌈m⌉`, given by its vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSimplex<T> {
    pub vertices: Vec<Vec<T>>,
    pub kind: TraceKind,
    /// The image was approximated by projecting vertices only.
    pub approximate: bool,
    #[serde(skip)]
    bounds: (Vec<T>, Vec<T>),
}

impl<T: Real> TraceSimplex<T> {
    pub fn new(vertices: Vec<Vec<T>>, kind: TraceKind, approximate: bool) -> Self {
        let bounds = bbox(&vertices);
        TraceSimplex {
            vertices,
            kind,
            approximate,
            bounds,
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    fn bbox_meets(&self, lo: &[T], hi: &[T], tol: T) -> bool {
        (0..lo.len()).all(|i| self.bounds.0[i] <= hi[i] + tol && lo[i] - tol <= self.bounds.1[i])
    }

    pub fn contains(&self, p: &[T], tol: T) -> bool {
        self.bbox_meets(p, p, tol) && on_simplex(p, &self.vertices, tol)
    }

    /// Dimension of the intersection with a closed box; −1 when empty.
    fn meet_dim(&self, lo: &[T], hi: &[T], tol: T) -> isize {
        if !self.bbox_meets(lo, hi, tol) {
            return -1;
        }
        let lo_t: Vec<T> = lo.iter().map(|v| *v - tol).collect();
        let hi_t: Vec<T> = hi.iter().map(|v| *v + tol).collect();
        match self.vertices.len() {
            1 => {
                if self.vertices[0].iter().enumerate().all(|(i, v)| lo_t[i] <= *v && *v <= hi_t[i]) {
                    0
                } else {
                    -1
                }
            }
            2 => {
                let (a, b) = (&self.vertices[0], &self.vertices[1]);
                match clip_segment(a, b, &lo_t, &hi_t) {
                    None => -1,
                    Some((t0, t1)) => {
                        if (t1 - t0) * linf(a, b) > T::lit(2.0) * tol + T::lit(1e-9) * linf(a, b) {
                            1
                        } else {
                            0
                        }
                    }
                }
            }
            _ => affine_dim(&clip_polygon(&self.vertices, &lo_t, &hi_t), T::lit(4.0) * tol),
        }
    }
}

/// Ordering key of the face family: size, then dimension, then anchor and
/// free-axis mask as tie-breaks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceKey {
    pub level: i32,
    pub dim: usize,
    pub anchor: Vec<i64>,
    pub free_axes: u32,
}

impl FaceKey {
    pub fn of(face: &DyadicFace) -> Self {
        let c = face.canonical();
        FaceKey {
            level: c.cube.level,
            dim: c.dim(),
            anchor: c.cube.anchor.clone(),
            free_axes: c.free_axes,
        }
    }
}

/// Real bounds of a face.
pub fn face_box<T: Real>(face: &DyadicFace) -> FaceBox<T> {
    let (lo, hi) = face.bounds();
    FaceBox {
        lo: lo.iter().map(|v| v.to_real()).collect(),
        hi: hi.iter().map(|v| v.to_real()).collect(),
        free: face.free_axes,
    }
}

/// Maps sample positions to base-level cells, for content estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Snapper {
    pub n: usize,
    pub base_level: i32,
}

impl Snapper {
    pub fn cells<T: Real>(&self, pts: &[Vec<T>]) -> VoxelSet {
        let scale = (-(self.base_level as f64)).exp2();
        let cells: Vec<Vec<i64>> = pts
            .iter()
            .map(|p| p.iter().map(|c| (c.as_f64() * scale).floor() as i64).collect())
            .collect();
        VoxelSet::new(self.n, self.base_level, cells).expect("sample dimension matches")
    }

    /// Dyadic content of the cells containing the points.
    pub fn content<T: Real>(&self, pts: &[Vec<T>], params: &ContentParams<T>) -> T {
        if pts.is_empty() {
            return T::zero();
        }
        hc_dyadic(&self.cells(pts), params).value
    }
}

/// Outcome of [`choose_projection_center`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterChoice<T> {
    pub center: Vec<T>,
    /// Snapped content after projection over content before.
    pub ratio: f64,
    /// The ratio is within `C_scale`; otherwise this is the best seen.
    pub accepted: bool,
    pub candidates_tried: usize,
    #[serde(skip)]
    pub projected: Vec<Vec<T>>,
}

fn step_rng(seed: u64, step: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (step as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Samples centers in the concentric half-size copy of the face and keeps
/// the first whose projection grows snapped content by at most `c_scale`.
#[allow(clippy::too_many_arguments)]
pub fn choose_projection_center<T: Real>(
    face: &FaceBox<T>,
    interior: &[Vec<T>],
    snapper: &Snapper,
    params: &ContentParams<T>,
    c_scale: f64,
    budget: usize,
    seed: u64,
    step: usize,
) -> Result<CenterChoice<T>> {
    let mut rng = step_rng(seed, step);
    let tol = T::lit(1e-9);
    let before = snapper.content(interior, params);
    let mut best: Option<CenterChoice<T>> = None;
    let mut tried = 0;
    for _ in 0..budget {
        let o: Vec<T> = (0..face.n())
            .map(|i| {
                if face.free >> i & 1 == 1 {
                    let q = (face.hi[i] - face.lo[i]) * T::lit(0.25);
                    let u = T::lit(rng.gen::<f64>());
                    face.lo[i] + q + u * (face.hi[i] - face.lo[i] - q - q)
                } else {
                    face.lo[i]
                }
            })
            .collect();
        if interior.iter().any(|p| linf(p, &o) <= tol) {
            continue;
        }
        tried += 1;
        let projected = interior
            .iter()
            .map(|p| face.radial_project(&o, p))
            .collect::<Result<Vec<_>>>()?;
        let ratio = if before > T::zero() {
            (snapper.content(&projected, params) / before).as_f64()
        } else {
            0.0
        };
        let choice = CenterChoice {
            center: o,
            ratio,
            accepted: ratio <= c_scale,
            candidates_tried: tried,
            projected,
        };
        if choice.accepted {
            return Ok(choice);
        }
        if best.as_ref().is_none_or(|b| ratio < b.ratio) {
            best = Some(choice);
        }
    }
    match best {
        Some(mut b) => {
            b.candidates_tried = tried;
            Ok(b)
        }
        None => Err(Error::SearchFailure(format!(
            "all {budget} candidate centers coincide with samples"
        ))),
    }
}

/// Record of one projection step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog<T> {
    pub step: usize,
    pub face: DyadicFace,
    pub dim: usize,
    pub size: f64,
    pub center: Vec<T>,
    pub ratio: f64,
    pub accepted: bool,
    /// Snapped content of the moved samples stayed under `C_maxdensity·hc(Q)`.
    pub low_density: bool,
    pub candidates_tried: usize,
    pub content_before: f64,
    /// Moved sample ids with their new positions.
    pub moved: Vec<(usize, Vec<T>)>,
    pub deposited: usize,
    pub image_traces: usize,
    pub new_faces: usize,
    pub new_traces: usize,
    pub disregarded: usize,
}

/// The face family, traces and samples between steps.
#[derive(Clone, Debug)]
pub struct CascadeState<T> {
    pub step: usize,
    pub params: ContentParams<T>,
    pub config: CascadeConfig,
    /// `⌈m⌉`.
    pub target_dim: usize,
    pub faces: BTreeMap<FaceKey, DyadicFace>,
    pub traces: Vec<TraceSimplex<T>>,
    pub samples: Vec<SamplePoint<T>>,
    pub snapper: Snapper,
    /// Initial number of faces of dimension at least `⌈m⌉`, over all cubes.
    pub budget: usize,
    pub d_max: f64,
    pub cover: Vec<DyadicCube>,
    pub log: Vec<StepLog<T>>,
    pub content_series: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Sets up the cascade with the cover cubes as full-dimensional faces.
pub fn init_cascade<T: Real>(
    x: &VoxelSet,
    cover: &CoverFamily,
    params: &ContentParams<T>,
    sampling: SamplingSpec,
    config: CascadeConfig,
) -> Result<CascadeState<T>> {
    let n = x.n();
    if params.n != n {
        return Err(Error::Input(format!("params for n = {}, set has n = {n}", params.n)));
    }
    let target_dim = params.ceil_m();
    if target_dim > n {
        return Err(Error::Input(format!("⌈m⌉ = {target_dim} exceeds the dimension {n}")));
    }
    if target_dim > 3 {
        return Err(Error::UnsupportedDimension(format!(
            "traces of dimension {} are not supported",
            target_dim - 1
        )));
    }
    if !cover.covers(x) {
        return Err(Error::Coverage("cover misses a cell of X".into()));
    }
    if !cover.is_antichain() {
        return Err(Error::Input("cover members must not contain each other".into()));
    }
    let cubes = cover.cubes();
    if let Some(lo) = cubes.iter().map(|c| c.level).min() {
        let hi = cubes.iter().map(|c| c.level).max().unwrap();
        if hi - lo.min(x.base_level()) > 50 {
            return Err(Error::Capacity("cover spans more than 50 dyadic levels".into()));
        }
    }
    let mut faces = BTreeMap::new();
    for c in &cubes {
        let f = DyadicFace::full(c.clone());
        faces.insert(FaceKey::of(&f), f);
    }
    let per_cube: usize = (target_dim..=n).map(|d| binomial(n, d) << (n - d)).sum();
    let budget = per_cube * cubes.len();

    let mut positions: Vec<Vec<T>> = Vec::new();
    let k = sampling.per_cell;
    let side = T::pow2(T::lit(x.base_level() as f64));
    let mut corners = std::collections::BTreeSet::new();
    for cell in x.cells() {
        if k > 0 {
            let total = k.pow(n as u32);
            for idx in 0..total {
                let mut rem = idx;
                let p: Vec<T> = (0..n)
                    .map(|i| {
                        let j = rem % k;
                        rem /= k;
                        (T::lit(cell[i] as f64) + T::lit((j as f64 + 0.5) / k as f64)) * side
                    })
                    .collect();
                positions.push(p);
            }
        }
        if sampling.corners {
            for mask in 0..1u32 << n {
                let c: Vec<i64> = (0..n).map(|i| cell[i] + (mask >> i & 1) as i64).collect();
                corners.insert(c);
            }
        }
    }
    for c in corners {
        positions.push(c.iter().map(|v| T::lit(*v as f64) * side).collect());
    }
    let samples = positions
        .into_iter()
        .enumerate()
        .map(|(id, p)| SamplePoint {
            id,
            trajectory: vec![p.clone()],
            position: p,
            length: T::zero(),
            on_trace: false,
        })
        .collect();
    let d_max = cubes.iter().map(|c| c.size().to_f64()).fold(0.0, f64::max);
    Ok(CascadeState {
        step: 0,
        params: *params,
        config,
        target_dim,
        faces,
        traces: Vec::new(),
        samples,
        snapper: Snapper {
            n,
            base_level: x.base_level(),
        },
        budget,
        d_max,
        cover: cubes,
        log: Vec::new(),
        content_series: Vec::new(),
    })
}

/// The smallest remaining face, ties broken by dimension, anchor and mask.
pub fn pick_active_face<T>(state: &CascadeState<T>) -> Result<DyadicFace> {
    state
        .faces
        .values()
        .next()
        .cloned()
        .ok_or(Error::CascadeFinished)
}

fn ibox_contains(outer: &DyadicFace, inner: &DyadicFace) -> bool {
    let g = outer.cube.level.min(inner.cube.level);
    outer.ibox(g).contains(&inner.ibox(g))
}

impl<T: Real> CascadeState<T> {
    fn tol(&self) -> T {
        T::lit(self.config.snap_tol)
    }

    fn on_any_trace(&self, p: &[T]) -> bool {
        let tol = self.tol();
        self.traces.iter().any(|t| t.contains(p, tol))
    }

    fn covered(&self, g: &DyadicFace) -> bool {
        self.faces.values().any(|f| ibox_contains(f, g))
    }

    /// Projected images of the trace parts inside the relative interior.
    fn trace_images(&self, fb: &FaceBox<T>, o: &[T]) -> Result<Vec<TraceSimplex<T>>> {
        let tol = self.tol();
        let mut out = Vec::new();
        for t in &self.traces {
            if !t.bbox_meets(&fb.lo, &fb.hi, tol) {
                continue;
            }
            match t.vertices.len() {
                1 => {
                    if fb.in_relint(&t.vertices[0], tol) {
                        let q = fb.radial_project(o, &t.vertices[0])?;
                        out.push(TraceSimplex::new(vec![q], TraceKind::Image, false));
                    }
                }
                2 => {
                    let (a, b) = (&t.vertices[0], &t.vertices[1]);
                    let Some((t0, t1)) = clip_segment(a, b, &fb.lo, &fb.hi) else {
                        continue;
                    };
                    let at = |s: T| -> Vec<T> { a.iter().zip(b).map(|(x, y)| *x + (*y - *x) * s).collect() };
                    let (pa, pb) = (at(t0), at(t1));
                    let mid = at((t0 + t1) * T::lit(0.5));
                    if !(fb.in_relint(&pa, tol) || fb.in_relint(&pb, tol) || fb.in_relint(&mid, tol)) {
                        continue;
                    }
                    if linf(&pa, &pb) <= tol {
                        let q = fb.radial_project(o, &mid)?;
                        out.push(TraceSimplex::new(vec![q], TraceKind::Image, false));
                        continue;
                    }
                    match fb.project_segment(o, &pa, &pb) {
                        Ok(pieces) => {
                            for (p, q) in pieces {
                                let verts = if linf(&p, &q) <= tol { vec![p] } else { vec![p, q] };
                                out.push(TraceSimplex::new(verts, TraceKind::Image, false));
                            }
                        }
                        Err(_) => {
                            // the segment passes through the center
                            let p = fb.radial_project(o, &pa).unwrap_or(pa);
                            let q = fb.radial_project(o, &pb).unwrap_or(pb);
                            out.push(TraceSimplex::new(vec![p, q], TraceKind::Image, true));
                        }
                    }
                }
                _ => {
                    let clipped = clip_polygon(&t.vertices, &fb.lo, &fb.hi);
                    if !clipped.iter().any(|p| fb.in_relint(p, tol)) {
                        continue;
                    }
                    let verts = t
                        .vertices
                        .iter()
                        .map(|p| {
                            let c: Vec<T> = p.iter().enumerate().map(|(i, v)| v.max(fb.lo[i]).min(fb.hi[i])).collect();
                            fb.radial_project(o, &c).unwrap_or(c)
                        })
                        .collect();
                    out.push(TraceSimplex::new(verts, TraceKind::Image, true));
                }
            }
        }
        Ok(out)
    }

    fn face_fb(&self, f: &DyadicFace) -> FaceBox<T> {
        face_box(f)
    }

    /// Traces of dimension `⌈m⌉ − 1` may meet remaining faces only in
    /// dimension `⌈m⌉ − 2` or less.
    fn check_trace_faces(&self, traces: &[TraceSimplex<T>], faces: &[DyadicFace]) -> Result<()> {
        let tol = self.tol();
        let limit = self.target_dim as isize - 2;
        for t in traces {
            if t.dim() + 1 > self.target_dim {
                return Err(Error::InternalInvariant(format!(
                    "trace of dimension {} exceeds ⌈m⌉ − 1",
                    t.dim()
                )));
            }
            if (t.dim() as isize) <= limit {
                continue;
            }
            for f in faces {
                let fb = self.face_fb(f);
                let d = t.meet_dim(&fb.lo, &fb.hi, tol);
                if d > limit {
                    return Err(Error::InternalInvariant(format!(
                        "trace meets face {f:?} in dimension {d}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Projects the active face and updates faces, traces and samples.
pub fn cascade_step<T: Real>(state: &mut CascadeState<T>) -> Result<StepLog<T>> {
    let q = pick_active_face(state)?;
    let fb: FaceBox<T> = face_box(&q);
    let tol = state.tol();
    let params = state.params;
    let interior_ids: Vec<usize> = state
        .samples
        .iter()
        .filter(|s| fb.in_relint(&s.position, tol))
        .map(|s| s.id)
        .collect();
    let interior: Vec<Vec<T>> = interior_ids
        .iter()
        .map(|&i| state.samples[i].position.clone())
        .collect();
    let content_before = state.snapper.content(&interior, &params);
    let face_cost = q.cube.cost::<T>(params.m);
    let low_density = content_before < T::lit(state.config.c_maxdensity) * face_cost;
    let choice = choose_projection_center(
        &fb,
        &interior,
        &state.snapper,
        &params,
        state.config.c_scale,
        state.config.center_budget,
        state.config.seed,
        state.step,
    )?;
    let o = choice.center.clone();

    let images = state.trace_images(&fb, &o)?;
    let mut new_traces: Vec<TraceSimplex<T>> = Vec::new();
    let mut moved = Vec::with_capacity(interior_ids.len());
    let mut deposited = 0;
    for (&id, target) in interior_ids.iter().zip(&choice.projected) {
        let from = state.samples[id].position.clone();
        if state.on_any_trace(&from) {
            new_traces.push(TraceSimplex::new(
                vec![from.clone(), target.clone()],
                TraceKind::Insertion,
                false,
            ));
            deposited += 1;
        }
        let s = &mut state.samples[id];
        s.length = s.length + linf(&from, target);
        s.trajectory.push(target.clone());
        s.position = target.clone();
        moved.push((id, target.clone()));
    }
    let image_count = images.len();
    new_traces.extend(images);

    state.faces.remove(&FaceKey::of(&q));
    let mut added_faces = Vec::new();
    let mut disregarded = 0;
    for g in q.facets() {
        let g = g.canonical();
        if state.covered(&g) {
            disregarded += 1;
        } else if g.dim() >= state.target_dim {
            added_faces.push(g);
        } else {
            let gb: FaceBox<T> = face_box(&g);
            for verts in triangulate_box(&gb.lo, &gb.hi) {
                new_traces.push(TraceSimplex::new(verts, TraceKind::Facet, false));
            }
        }
    }
    // new faces must stay an antichain with the others
    for g in &added_faces {
        if state.faces.values().any(|f| ibox_contains(g, f)) {
            return Err(Error::InternalInvariant(format!("new face {g:?} contains a remaining face")));
        }
    }
    for g in &added_faces {
        state.faces.insert(FaceKey::of(g), g.clone());
    }
    let remaining: Vec<DyadicFace> = state.faces.values().cloned().collect();
    state.check_trace_faces(&new_traces, &remaining)?;
    let old = std::mem::take(&mut state.traces);
    state.check_trace_faces(&old, &added_faces)?;
    state.traces = old;
    let new_trace_count = new_traces.len() - image_count - deposited;
    state.traces.extend(new_traces);

    let log = StepLog {
        step: state.step,
        face: q.clone(),
        dim: q.dim(),
        size: q.size().to_f64(),
        center: o,
        ratio: choice.ratio,
        accepted: choice.accepted,
        low_density,
        candidates_tried: choice.candidates_tried,
        content_before: content_before.as_f64(),
        moved,
        deposited,
        image_traces: image_count,
        new_faces: added_faces.len(),
        new_traces: new_trace_count,
        disregarded,
    };
    state.step += 1;
    if state.config.record_content_series {
        let all: Vec<Vec<T>> = state.samples.iter().map(|s| s.position.clone()).collect();
        state.content_series.push(state.snapper.content(&all, &params).as_f64());
    }
    state.log.push(log.clone());
    Ok(log)
}

/// Summary of a finished cascade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport<T> {
    pub steps: usize,
    pub budget: usize,
    pub d_max: f64,
    pub max_trajectory_length: f64,
    /// `2·n·d_max`.
    pub trajectory_bound: f64,
    pub trajectory_bound_holds: bool,
    pub initial_content: f64,
    /// Snapped content of the final samples.
    pub final_content_upper: f64,
    pub trace_simplex_count: usize,
    pub approximate_traces: usize,
    pub off_trace_samples: usize,
    pub all_on_traces: bool,
    /// Consecutive moving faces that are neither nested nor doubling.
    pub monotonicity_violations: usize,
    pub rejected_centers: usize,
    pub high_density_steps: usize,
    pub log: Vec<StepLog<T>>,
    pub content_series: Vec<f64>,
}

/// Per-sample sequence of faces that moved it.
pub fn face_sequences<T>(log: &[StepLog<T>], samples: usize) -> Vec<Vec<usize>> {
    let mut seq = vec![Vec::new(); samples];
    for (k, step) in log.iter().enumerate() {
        for (id, _) in &step.moved {
            seq[*id].push(k);
        }
    }
    seq
}

fn monotonicity_violations<T>(log: &[StepLog<T>], samples: usize) -> usize {
    let mut bad = 0;
    for seq in face_sequences(log, samples) {
        for w in seq.windows(2) {
            let (prev, next) = (&log[w[0]].face, &log[w[1]].face);
            let nested = ibox_contains(prev, next);
            let doubled = next.size() >= prev.size().mul_pow2(1);
            if !(nested || doubled) {
                bad += 1;
            }
        }
    }
    bad
}

/// Steps until no face is left, then checks the final configuration.
pub fn run_cascade<T: Real>(mut state: CascadeState<T>) -> Result<(CascadeState<T>, CascadeReport<T>)> {
    let params = state.params;
    let initial: Vec<Vec<T>> = state.samples.iter().map(|s| s.position.clone()).collect();
    let initial_content = state.snapper.content(&initial, &params).as_f64();
    while !state.faces.is_empty() {
        if state.step >= state.budget {
            return Err(Error::InternalInvariant(format!(
                "cascade exceeded its budget of {} steps",
                state.budget
            )));
        }
        cascade_step(&mut state)?;
    }
    let tol = state.tol();
    let mut off = 0;
    for i in 0..state.samples.len() {
        let on = state.on_any_trace(&state.samples[i].position);
        state.samples[i].on_trace = on;
        if !on {
            off += 1;
        }
    }
    let max_len = state.samples.iter().map(|s| s.length.as_f64()).fold(0.0, f64::max);
    let bound = 2.0 * params.n as f64 * state.d_max;
    let finals: Vec<Vec<T>> = state.samples.iter().map(|s| s.position.clone()).collect();
    let report = CascadeReport {
        steps: state.step,
        budget: state.budget,
        d_max: state.d_max,
        max_trajectory_length: max_len,
        trajectory_bound: bound,
        trajectory_bound_holds: max_len <= bound + 1e-6 * state.d_max.max(1.0) + tol.as_f64(),
        initial_content,
        final_content_upper: state.snapper.content(&finals, &params).as_f64(),
        trace_simplex_count: state.traces.len(),
        approximate_traces: state.traces.iter().filter(|t| t.approximate).count(),
        off_trace_samples: off,
        all_on_traces: off == 0,
        monotonicity_violations: monotonicity_violations(&state.log, state.samples.len()),
        rejected_centers: state.log.iter().filter(|l| !l.accepted).count(),
        high_density_steps: state.log.iter().filter(|l| !l.low_density).count(),
        log: state.log.clone(),
        content_series: state.content_series.clone(),
    };
    Ok((state, report))
}

/// Faces of `cube` with dimension at least `d`, canonical.
pub(crate) fn faces_from(cube: &DyadicCube, d: usize) -> Vec<DyadicFace> {
    (d..=cube.n())
        .flat_map(|k| enumerate_faces(cube, k))
        .map(|f| f.canonical())
        .collect()
}

/// Integer box of a face at `grid`.
pub(crate) fn grid_box(f: &DyadicFace, grid: i32) -> IBox {
    f.ibox(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::CoverTag;

    fn one_cell(m: f64) -> (VoxelSet, CoverFamily, ContentParams<f64>) {
        let x = VoxelSet::new(2, 0, vec![vec![0, 0]]).unwrap();
        let cover = CoverFamily::from_cubes(vec![DyadicCube::new(0, vec![0, 0])], CoverTag::CollarLayer(1));
        (x, cover, ContentParams::new(m, 2).unwrap())
    }

    #[test]
    fn one_cell_finishes_on_edges() {
        let (x, cover, p) = one_cell(1.5);
        let st = init_cascade(&x, &cover, &p, SamplingSpec::default(), CascadeConfig::default()).unwrap();
        assert_eq!(st.samples.len(), 4 + 4);
        let (st, rep) = run_cascade(st).unwrap();
        assert_eq!(rep.steps, 1);
        assert!(rep.all_on_traces);
        assert_eq!(st.traces.iter().filter(|t| t.kind == TraceKind::Facet).count(), 4);
        assert!(rep.trajectory_bound_holds);
    }

    #[test]
    fn empty_set_terminates() {
        let x = VoxelSet::empty(2, 0);
        let cover = CoverFamily::default();
        let p = ContentParams::new(1.5, 2).unwrap();
        let st = init_cascade(&x, &cover, &p, SamplingSpec::default(), CascadeConfig::default()).unwrap();
        let (_, rep) = run_cascade(st).unwrap();
        assert_eq!(rep.steps, 0);
        assert_eq!(rep.max_trajectory_length, 0.0);
    }

    #[test]
    fn small_m_goes_down_to_vertices() {
        let (x, cover, p) = one_cell(0.7);
        let st = init_cascade(&x, &cover, &p, SamplingSpec::default(), CascadeConfig::default()).unwrap();
        let (st, rep) = run_cascade(st).unwrap();
        assert_eq!(rep.steps, 5);
        assert!(rep.all_on_traces);
        assert!(st.traces.iter().all(|t| t.dim() == 0 || t.kind == TraceKind::Insertion));
        assert_eq!(rep.monotonicity_violations, 0);
    }

    #[test]
    fn picks_smallest_face_first() {
        let x = VoxelSet::new(2, 0, vec![vec![0, 0], vec![2, 0]]).unwrap();
        let cover = CoverFamily::from_cubes(
            vec![DyadicCube::new(1, vec![1, 0]), DyadicCube::new(0, vec![0, 0])],
            CoverTag::Qp,
        );
        let p = ContentParams::new(1.5, 2).unwrap();
        let st = init_cascade(&x, &cover, &p, SamplingSpec::default(), CascadeConfig::default()).unwrap();
        assert_eq!(pick_active_face(&st).unwrap().cube, DyadicCube::new(0, vec![0, 0]));
    }

    #[test]
    fn deterministic_given_seed() {
        let x = VoxelSet::new(2, 0, vec![vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap();
        let cover = CoverFamily::from_cubes(vec![DyadicCube::new(1, vec![0, 0])], CoverTag::Qp);
        let p = ContentParams::new(1.5, 2).unwrap();
        let run = || {
            let st = init_cascade(&x, &cover, &p, SamplingSpec::default(), CascadeConfig::default()).unwrap();
            run_cascade(st).unwrap().1
        };
        assert_eq!(run(), run());
    }
}
