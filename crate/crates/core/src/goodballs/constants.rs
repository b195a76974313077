use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of the constants table.
///
/// `c1`/`c2` are `None` once they overflow `f64`; the `log10_*` columns
/// stay finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub m: f64,
    /// Lower end `1 + 1/m` of the outer-radius window.
    pub window_lo: f64,
    /// Upper end `1 + 2/m` of the outer-radius window.
    pub window_hi: f64,
    /// `30·m·c2(m−1)`.
    pub a: Option<f64>,
    pub log10_a: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub log10_c1: f64,
    pub log10_c2: f64,
    pub overflow: bool,
    /// The weak requirement `A > 2/(window_lo − 1)` holds.
    pub a_meets_weak: bool,
    /// The strong requirement `A > c2(m−1)·window_hi^(m−1)·2/(window_hi − window_lo)` holds.
    pub a_meets_strong: bool,
    /// Which of the two lower bounds on `A` is larger.
    pub a_binding: String,
    /// `window_hi^m < 10`.
    pub window_pow_below_10: bool,
    /// Guaranteed contraction `1 − 1/(2·3^m·window_hi^m)` per emptying step.
    pub q_factor: f64,
}

impl ConstantsRow {
    pub fn a_value(&self) -> f64 {
        self.a.unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub rows: Vec<ConstantsRow>,
}

impl ConstantsTable {
    pub fn row(&self, m: f64) -> Option<&ConstantsRow> {
        self.rows.iter().find(|r| r.m == m)
    }
}

/// `log10(10^a + 10^b)` without overflow.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + 10f64.powf(lo - hi)).log10()
}

/// `(log10 c1, log10 c2, direct c1, direct c2)` at `m`.
fn recurse(m: f64) -> (f64, f64, Option<f64>, Option<f64>) {
    if m <= 1.0 {
        return (0.0, 0.0, Some(1.0), Some(1.0));
    }
    let (l1p, l2p, d1p, d2p) = recurse(m - 1.0);
    let e = 1.0 / (m - 1.0);
    // K = 3·c1(m−1) / (15·c2(m−1))^(1/(m−1))
    let log_k = 3f64.log10() + l1p - e * (15f64.log10() + l2p);
    let log_inner1 = log_add((180.0 * m).log10() + l2p, log_k);
    let log_inner2 = log_add((90.0 * m).log10() + l2p, log_k);
    let l1 = log_add(0.0, (20.0 * m).log10() + m * 3f64.log10() + log_inner1);
    let l2 = log_add(0.0, 20f64.log10() + m * 3f64.log10() + m * log_inner2);
    let direct = match (d1p, d2p) {
        (Some(c1p), Some(c2p)) => {
            let k = 3.0 * c1p / (15.0 * c2p).powf(e);
            let c1 = 1.0 + 20.0 * m * 3f64.powf(m) * (180.0 * m * c2p + k);
            let c2 = 1.0 + 20.0 * 3f64.powf(m) * (90.0 * m * c2p + k).powf(m);
            (c1.is_finite().then_some(c1), c2.is_finite().then_some(c2))
        }
        _ => (None, None),
    };
    (l1, l2, direct.0, direct.1)
}

/// Constants for a single exponent, recursing through `m − 1, m − 2, …`
/// down to the base `m ≤ 1` where both filling constants are 1.
pub fn constants_at(m: f64) -> Result<ConstantsRow> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Input(format!("exponent must be positive, got {m}")));
    }
    let (l1, l2, c1, c2) = recurse(m);
    let (_, l2p, _, c2p) = recurse(m - 1.0);
    let window_lo = 1.0 + 1.0 / m;
    let window_hi = 1.0 + 2.0 / m;
    let log10_a = (30.0 * m).log10() + l2p;
    let a = c2p.map(|c| 30.0 * m * c).filter(|v| v.is_finite());
    let weak = 2.0 / (window_lo - 1.0);
    let log_strong = l2p + (m - 1.0) * window_hi.log10() + (2.0 / (window_hi - window_lo)).log10();
    let a_meets_weak = log10_a > weak.log10();
    let a_meets_strong = log10_a > log_strong;
    let a_binding = if log_strong > weak.log10() { "strong" } else { "weak" }.to_string();
    Ok(ConstantsRow {
        m,
        window_lo,
        window_hi,
        a,
        log10_a,
        c1,
        c2,
        log10_c1: l1,
        log10_c2: l2,
        overflow: c1.is_none() || c2.is_none(),
        a_meets_weak,
        a_meets_strong,
        a_binding,
        window_pow_below_10: window_hi.powf(m) < 10.0,
        q_factor: 1.0 - 1.0 / (2.0 * 3f64.powf(m) * window_hi.powf(m)),
    })
}

/// Rows at `m = 0.5` and every integer `1..=m_max`.
pub fn constants_table(m_max: u32) -> Result<ConstantsTable> {
    if m_max < 1 {
        return Err(Error::Input("m_max must be at least 1".into()));
    }
    let mut rows = vec![constants_at(0.5)?];
    for m in 1..=m_max {
        rows.push(constants_at(m as f64)?);
    }
    Ok(ConstantsTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_rows() {
        let r = constants_at(0.5).unwrap();
        assert_eq!((r.c1, r.c2), (Some(1.0), Some(1.0)));
        let r = constants_at(1.0).unwrap();
        assert_eq!((r.c1, r.c2), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn second_row() {
        let r = constants_at(2.0).unwrap();
        assert!((r.c1.unwrap() - 129673.0).abs() < 1e-6 * 129673.0);
        assert!((r.c2.unwrap() - 5844968.2).abs() < 1e-6 * 5844968.2);
        assert_eq!(r.a, Some(60.0));
        assert!((r.log10_c2 - 5844968.2f64.log10()).abs() < 1e-12);
        assert!(r.a_meets_weak && r.a_meets_strong);
    }

    #[test]
    fn deep_rows_overflow_gracefully() {
        let t = constants_table(6).unwrap();
        let last = t.rows.last().unwrap();
        assert!(last.overflow);
        assert!(last.log10_c2.is_finite());
        for w in t.rows.windows(2) {
            assert!(w[1].log10_c1 >= w[0].log10_c1);
            assert!(w[1].log10_c2 >= w[0].log10_c2);
        }
        assert!(t.rows.iter().all(|r| r.window_pow_below_10));
    }
}
