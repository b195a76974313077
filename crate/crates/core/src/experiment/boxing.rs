use serde::{Deserialize, Serialize};

use crate::content::{hc_dyadic, hc_small_m, ContentParams};
use crate::dyadic::VoxelSet;
use crate::error::{Error, Result};
use crate::goodballs::constants_at;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMethod {
    /// Ratio of dyadic contents.
    Dyadic,
    /// Ratio of the exact contents for `m ≤ 1`, from enclosing balls.
    EnclosingBalls,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxingRow {
    pub m: f64,
    pub hc_domain: f64,
    pub hc_boundary: f64,
    /// Ratio the bound is checked against.
    pub ratio: f64,
    pub method: RatioMethod,
    /// Dyadic ratio, recorded for every `m`.
    pub dyadic_ratio: f64,
    /// `c₂(⌈m⌉)`, or `None` when it overflows.
    pub bound: Option<f64>,
    pub log10_bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxingReport {
    pub n: usize,
    pub cells: usize,
    pub boundary_cells: usize,
    pub rows: Vec<BoxingRow>,
}

impl BoxingReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Content of a connected domain against content of its outer cell layer.
///
/// For `m ≤ 1` the dyadic ratio is not the quantity the bound speaks
/// about (`c₂(1) = 1` leaves no room for the dyadic sandwich), so the
/// check uses the exact low-exponent contents there.
pub fn boxing_ratio(omega: &VoxelSet, ms: &[f64]) -> Result<BoxingReport> {
    let n = omega.n();
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(format!("boxing study runs in n = 2 or 3, got {n}")));
    }
    if omega.is_empty() {
        return Err(Error::Input("domain is empty".into()));
    }
    if !omega.is_face_connected() {
        return Err(Error::Input(format!(
            "domain has {} face-connected components",
            omega.components(false).len()
        )));
    }
    let boundary = omega.boundary_layer();
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        if !(m > 0.0 && m <= n as f64) {
            return Err(Error::Domain(format!("m = {m} outside (0, {n}]")));
        }
        let params = ContentParams::new(m, n)?;
        let hd = hc_dyadic(omega, &params).value;
        let hb = hc_dyadic(&boundary, &params).value;
        let dyadic_ratio = hd / hb;
        let (hc_domain, hc_boundary, method) = if m <= 1.0 {
            (hc_small_m(omega, m)?, hc_small_m(&boundary, m)?, RatioMethod::EnclosingBalls)
        } else {
            (hd, hb, RatioMethod::Dyadic)
        };
        let ratio = hc_domain / hc_boundary;
        let k = constants_at(m.ceil())?;
        let holds = match k.c2 {
            Some(c) => ratio <= c * (1.0 + 1e-12),
            None => ratio.log10() <= k.log10_c2,
        };
        rows.push(BoxingRow {
            m,
            hc_domain,
            hc_boundary,
            ratio,
            method,
            dyadic_ratio,
            bound: k.c2,
            log10_bound: k.log10_c2,
            holds,
        });
    }
    Ok(BoxingReport {
        n,
        cells: omega.len(),
        boundary_cells: boundary.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(k: i64, depth: i64) -> VoxelSet {
        let mut cells = Vec::new();
        for x in 0..k {
            for y in 0..k {
                for z in 0..depth {
                    cells.push(vec![x, y, z]);
                }
            }
        }
        VoxelSet::new(3, 0, cells).unwrap()
    }

    #[test]
    fn full_block_ratio_one() {
        let r = boxing_ratio(&block(8, 8), &[2.0]).unwrap();
        assert_eq!(r.rows[0].hc_domain, 16.0);
        assert_eq!(r.rows[0].hc_boundary, 16.0);
        assert!(r.all_hold());
    }

    #[test]
    fn radius_ratio_at_m_one() {
        let d = crate::experiment::connected_domain(3, 8, 40, 5).unwrap();
        let r = boxing_ratio(&d, &[1.0]).unwrap();
        assert!((r.rows[0].ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_slab() {
        let r = boxing_ratio(&block(16, 1), &[2.0]).unwrap();
        // every cell of a one-cell slab is on the boundary
        assert_eq!(r.rows[0].ratio, 1.0);
    }

    #[test]
    fn disconnected_refused() {
        let x = VoxelSet::new(2, 0, vec![vec![0, 0], vec![2, 2]]).unwrap();
        assert!(matches!(boxing_ratio(&x, &[1.5]), Err(Error::Input(_))));
    }
}
