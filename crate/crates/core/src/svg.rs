//! Static SVG pictures of planar inputs, covers and cascade runs.

use std::fmt::Write;

use crate::cover::{CoverFamily, CoverTag};
use crate::dyadic::VoxelSet;
use crate::error::{Error, Result};

/// What to draw on top of the cells of `X`.
#[derive(Clone, Debug, Default)]
pub struct Overlays {
    pub covers: Vec<CoverFamily>,
    /// Sample polylines, one point list per sample.
    pub trajectories: Vec<Vec<Vec<f64>>>,
    /// Trace simplices by vertices (points, segments or triangles).
    pub traces: Vec<Vec<Vec<f64>>>,
}

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 10.0;

fn tag_color(tag: CoverTag) -> String {
    match tag {
        CoverTag::Qpp => "#1f77b4".into(),
        CoverTag::Qp => "#d62728".into(),
        CoverTag::CollarLayer(k) => {
            let g = (40 + 30 * k.min(6)) as u8;
            format!("#{g:02x}{g:02x}{g:02x}")
        }
    }
}

struct View {
    lo: [f64; 2],
    scale: f64,
    height: f64,
}

impl View {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo[0]) * self.scale
    }
    fn y(&self, v: f64) -> f64 {
        self.height - MARGIN - (v - self.lo[1]) * self.scale
    }
}

fn cmp_points(a: &[Vec<f64>], b: &[Vec<f64>]) -> std::cmp::Ordering {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

/// Renders `x` with the overlays. Output depends only on the inputs.
pub fn render_svg(x: &VoxelSet, overlays: &Overlays) -> Result<String> {
    if x.n() != 2 {
        return Err(Error::UnsupportedDimension(format!("SVG output needs n = 2, got {}", x.n())));
    }
    let side = 2f64.powi(x.base_level());
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut grow = |p: &[f64]| {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    };
    for c in x.cells() {
        grow(&[c[0] as f64 * side, c[1] as f64 * side]);
        grow(&[(c[0] + 1) as f64 * side, (c[1] + 1) as f64 * side]);
    }
    for cover in &overlays.covers {
        for q in cover.cubes() {
            let (a, b) = q.bounds::<f64>();
            grow(&a);
            grow(&b);
        }
    }
    for p in overlays.trajectories.iter().chain(&overlays.traces).flatten() {
        grow(p);
    }
    if !lo[0].is_finite() {
        lo = [0.0, 0.0];
        hi = [1.0, 1.0];
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (CANVAS - 2.0 * MARGIN) / extent;
    let width = (hi[0] - lo[0]) * scale + 2.0 * MARGIN;
    let height = (hi[1] - lo[1]) * scale + 2.0 * MARGIN;
    let v = View { lo, scale, height };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    s.push_str("<g id=\"cells\" fill=\"#bbbbbb\" stroke=\"none\">\n");
    for c in x.cells() {
        let (x0, y0) = (c[0] as f64 * side, c[1] as f64 * side);
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#,
            v.x(x0),
            v.y(y0 + side),
            side * scale,
            side * scale
        );
    }
    s.push_str("</g>\n");
    for (k, cover) in overlays.covers.iter().enumerate() {
        let mut members = cover.members.clone();
        members.sort_by(|a, b| {
            (a.tag.to_string(), a.level, &a.anchor).cmp(&(b.tag.to_string(), b.level, &b.anchor))
        });
        let _ = writeln!(s, r#"<g id="cover-{k}" fill="none" stroke-width="1.5">"#);
        for m in &members {
            let (a, b) = m.cube().bounds::<f64>();
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" stroke="{}" data-tag="{}"/>"#,
                v.x(a[0]),
                v.y(b[1]),
                (b[0] - a[0]) * scale,
                (b[1] - a[1]) * scale,
                tag_color(m.tag),
                m.tag
            );
        }
        s.push_str("</g>\n");
    }
    if !overlays.trajectories.is_empty() {
        s.push_str("<g id=\"trajectories\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"0.8\">\n");
        for t in &overlays.trajectories {
            let pts: Vec<String> = t.iter().map(|p| format!("{:.3},{:.3}", v.x(p[0]), v.y(p[1]))).collect();
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        s.push_str("</g>\n");
    }
    if !overlays.traces.is_empty() {
        let mut traces = overlays.traces.clone();
        traces.sort_by(|a, b| cmp_points(a, b));
        s.push_str("<g id=\"traces\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2.5\">\n");
        for t in &traces {
            let pts: Vec<String> = t.iter().map(|p| format!("{:.3},{:.3}", v.x(p[0]), v.y(p[1]))).collect();
            match t.len() {
                1 => {
                    let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="2"/>"#, v.x(t[0][0]), v.y(t[0][1]));
                }
                2 => {
                    let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
                }
                _ => {
                    let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
                }
            }
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicCube;

    fn x() -> VoxelSet {
        VoxelSet::new(2, 0, vec![vec![0, 0], vec![3, 1]]).unwrap()
    }

    #[test]
    fn cells_only() {
        let s = render_svg(&x(), &Overlays::default()).unwrap();
        assert_eq!(s.matches("<rect").count(), 2);
        assert!(!s.contains("polyline"));
    }

    #[test]
    fn one_rect_per_member() {
        let cover = CoverFamily::from_cubes(
            vec![DyadicCube::new(0, vec![0, 0]), DyadicCube::new(1, vec![1, 0])],
            CoverTag::Qp,
        );
        let o = Overlays {
            covers: vec![cover],
            ..Default::default()
        };
        let s = render_svg(&x(), &o).unwrap();
        assert_eq!(s.matches("data-tag=\"qp\"").count(), 2);
        assert_eq!(s, render_svg(&x(), &o).unwrap());
    }

    #[test]
    fn three_d_refused() {
        let x = VoxelSet::new(3, 0, vec![vec![0, 0, 0]]).unwrap();
        assert!(matches!(
            render_svg(&x, &Overlays::default()),
            Err(Error::UnsupportedDimension(_))
        ));
    }
}
