use serde::{Deserialize, Serialize};

use crate::content::{restricted_content, ContentParams, Region};
use crate::error::{Error, Result};
use crate::goodballs::{
    collection_for_points, constants_at, empty_balls_step, good_balls_at_points, vitali_select,
    EmptyingReport, GoodBall, SelectionReport,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionSpec {
    pub m: f64,
    /// Finest snapping level for the ball family.
    pub level: i32,
    pub max_balls: usize,
    /// Tolerance on the drop, relative to the content of the cloud.
    pub relative_tau: f64,
}

impl SelectionSpec {
    pub fn new(m: f64) -> Self {
        SelectionSpec {
            m,
            level: 0,
            max_balls: 15,
            relative_tau: 1e-9,
        }
    }
}

/// Family, good balls, Vitali selection, verification and emptying of one
/// point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRun {
    pub n: usize,
    pub points: usize,
    pub collection_size: usize,
    pub collection_level: i32,
    pub content: f64,
    pub exact: bool,
    pub candidates: usize,
    pub selected: Vec<GoodBall<f64>>,
    pub verification: SelectionReport,
    pub emptying: EmptyingReport,
}

impl SelectionRun {
    pub fn passed(&self) -> bool {
        self.exact
            && self.verification.all_pass()
            && self.emptying.subtractive_holds
            && self.emptying.factor_holds
    }
}

pub fn run_selection(points: Vec<Vec<f64>>, n: usize, spec: &SelectionSpec) -> Result<SelectionRun> {
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::Input(format!("every point needs {n} coordinates")));
    }
    let params = ContentParams::new(spec.m, n)?;
    let constants = constants_at(spec.m)?;
    let x = Region::from_points(n, points);
    let (coll, level) = collection_for_points(&x, spec.level, spec.max_balls, &params)?;
    let base = restricted_content(&x, &coll, &params)?;
    let candidates = good_balls_at_points(&x, &coll, &params, &constants)?;
    let selected = vitali_select(&candidates, &x)?;
    let tau = spec.relative_tau * base.value.max(f64::MIN_POSITIVE);
    let step = empty_balls_step(&x, &selected, &coll, &params, &constants, tau)?;
    Ok(SelectionRun {
        n,
        points: x.points.len(),
        collection_size: coll.len(),
        collection_level: level,
        content: base.value,
        exact: base.exact,
        candidates: candidates.len(),
        selected,
        verification: step.verification,
        emptying: step.report,
    })
}
