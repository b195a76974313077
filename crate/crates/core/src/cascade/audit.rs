use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{face_box, CascadeState, FacePool, FaceBox};
use crate::dyadic::DyadicFace;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub face: DyadicFace,
    pub step: usize,
    pub kind: String,
    pub value: f64,
    pub bound: f64,
}

/// Replay of the admissible-set content series of every active face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub faces_audited: usize,
    /// Active faces that are not in the activatable pool.
    pub outside_pool: usize,
    pub c_adm_observed: usize,
    pub max_growth: f64,
    /// `3^n · C_scale`.
    pub growth_bound: f64,
    pub max_changes: usize,
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

struct Tracked<T> {
    face: DyadicFace,
    step: usize,
    members: Vec<usize>,
    boxes: Vec<FaceBox<T>>,
    lo: Vec<T>,
    hi: Vec<T>,
    changes: usize,
}

/// Replays sample motion and checks, for every face `Q` that was active,
/// that the snapped content of `A(Q)` only changes at steps activating a
/// member, grows by at most `3^n·C_scale` per change, changes at most
/// `|A(Q)|` times, and stays under `ε·hc(Q)·C_adm·(3^n·C_scale)^C_adm`.
pub fn density_evolution_audit<T: Real>(
    state: &CascadeState<T>,
    pool: &FacePool,
    epsilon: f64,
) -> AuditReport {
    let params = state.params;
    let n = params.n;
    let tol = T::lit(state.config.snap_tol);
    let growth_bound = 3f64.powi(n as i32) * state.config.c_scale;
    let mut violations = Vec::new();
    let mut outside_pool = 0;
    let mut tracked: Vec<Tracked<T>> = Vec::new();
    let mut c_adm = 0;
    for (k, step) in state.log.iter().enumerate() {
        let Some(t) = pool.position(&step.face) else {
            outside_pool += 1;
            continue;
        };
        let members = pool.admissible_indices(t);
        c_adm = c_adm.max(members.len());
        let boxes: Vec<FaceBox<T>> = members.iter().map(|&i| face_box(&pool.faces[i])).collect();
        let mut lo = boxes[0].lo.clone();
        let mut hi = boxes[0].hi.clone();
        for b in &boxes[1..] {
            for i in 0..n {
                lo[i] = lo[i].min(b.lo[i]);
                hi[i] = hi[i].max(b.hi[i]);
            }
        }
        tracked.push(Tracked {
            face: step.face.clone(),
            step: k,
            members,
            boxes,
            lo,
            hi,
            changes: 0,
        });
    }
    // pool faces whose relative interior contains a point
    let pool_boxes: Vec<FaceBox<T>> = pool.faces.iter().map(face_box).collect();
    let locate = |p: &[T]| -> Option<usize> { pool_boxes.iter().position(|b| b.in_relint(p, tol)) };

    let mut positions: Vec<Vec<T>> = state.samples.iter().map(|s| s.trajectory[0].clone()).collect();
    let content_of = |tr: &Tracked<T>, pos: &[Vec<T>]| -> T {
        let pts: Vec<Vec<T>> = pos
            .iter()
            .filter(|p| (0..n).all(|i| tr.lo[i] - tol <= p[i] && p[i] <= tr.hi[i] + tol))
            .filter(|p| tr.boxes.iter().any(|b| b.in_relint(p, tol)))
            .cloned()
            .collect();
        state.snapper.content(&pts, &params)
    };
    let mut max_growth = 0.0f64;
    let mut by_member: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (ti, tr) in tracked.iter().enumerate() {
        for &m in &tr.members {
            by_member.entry(m).or_default().push(ti);
        }
    }
    for (k, step) in state.log.iter().enumerate() {
        let active = pool.position(&step.face);
        let mut touched: Vec<usize> = Vec::new();
        if let Some(a) = active {
            touched.push(a);
        }
        for (id, to) in &step.moved {
            for p in [&positions[*id], to] {
                if let Some(f) = locate(p) {
                    touched.push(f);
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let mut affected: Vec<usize> = touched
            .iter()
            .filter_map(|f| by_member.get(f))
            .flatten()
            .copied()
            .filter(|&ti| tracked[ti].step >= k)
            .collect();
        affected.sort_unstable();
        affected.dedup();
        let before: Vec<T> = affected.iter().map(|&ti| content_of(&tracked[ti], &positions)).collect();
        for (id, to) in &step.moved {
            positions[*id] = to.clone();
        }
        for (&ti, h0) in affected.iter().zip(before) {
            let h1 = content_of(&tracked[ti], &positions);
            let tr = &mut tracked[ti];
            let changed = (h1 - h0).abs() > T::lit(1e-12) * h0.max(h1);
            if !changed {
                continue;
            }
            tr.changes += 1;
            let in_set = active.is_some_and(|a| tr.members.contains(&a));
            if !in_set {
                violations.push(AuditViolation {
                    face: tr.face.clone(),
                    step: k,
                    kind: "change_outside_admissible_set".into(),
                    value: h1.as_f64(),
                    bound: h0.as_f64(),
                });
            }
            if h1 > h0 {
                let g = if h0 > T::zero() { (h1 / h0).as_f64() } else { f64::INFINITY };
                max_growth = max_growth.max(g);
                if g > growth_bound {
                    violations.push(AuditViolation {
                        face: tr.face.clone(),
                        step: k,
                        kind: "growth".into(),
                        value: g,
                        bound: growth_bound,
                    });
                }
            }
        }
    }
    let mut max_changes = 0;
    let log10_growth = growth_bound.log10();
    for tr in &tracked {
        max_changes = max_changes.max(tr.changes);
        if tr.changes > tr.members.len() {
            violations.push(AuditViolation {
                face: tr.face.clone(),
                step: tr.step,
                kind: "change_count".into(),
                value: tr.changes as f64,
                bound: tr.members.len() as f64,
            });
        }
        let h = state.log[tr.step].content_before;
        let cost = tr.face.cube.cost::<f64>(params.m.as_f64());
        let log_bound = epsilon.log10() + cost.log10() + (c_adm as f64).log10() + c_adm as f64 * log10_growth;
        if h > 0.0 && h.log10() >= log_bound {
            violations.push(AuditViolation {
                face: tr.face.clone(),
                step: tr.step,
                kind: "final_density".into(),
                value: h.log10(),
                bound: log_bound,
            });
        }
    }
    AuditReport {
        faces_audited: tracked.len(),
        outside_pool,
        c_adm_observed: c_adm,
        max_growth,
        growth_bound,
        max_changes,
        violations,
    }
}
