use serde::{Deserialize, Serialize};

use super::pipeline::{run_pipeline, PipelineSpec};
use crate::dyadic::VoxelSet;
use crate::error::Result;

/// Observed growth ratios of the first candidate center, over many runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub runs: usize,
    pub steps: usize,
    pub max_ratio: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    /// Largest admissible-set size over all runs.
    pub c_adm_observed: usize,
    /// The 99th percentile rounded up to an integer, at least one.
    pub suggested_c_scale: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Runs the pipeline accepting the first candidate center at every step
/// and records how much it grew the snapped content.
pub fn calibrate_c_scale(inputs: &[VoxelSet], base: &PipelineSpec) -> Result<CalibrationReport> {
    let mut spec = base.clone();
    spec.constants.c_scale = Some(f64::INFINITY);
    spec.keep_log = true;
    let mut ratios = Vec::new();
    let mut c_adm = 0;
    for x in inputs {
        let r = run_pipeline::<f64>(x, &spec)?;
        ratios.extend(r.cascade.log.iter().map(|l| l.ratio).filter(|v| v.is_finite()));
        c_adm = c_adm.max(r.admissible.c_adm_max);
    }
    ratios.sort_by(f64::total_cmp);
    let p99 = quantile(&ratios, 0.99);
    Ok(CalibrationReport {
        runs: inputs.len(),
        steps: ratios.len(),
        max_ratio: ratios.last().copied().unwrap_or(0.0),
        p50: quantile(&ratios, 0.5),
        p90: quantile(&ratios, 0.9),
        p99,
        c_adm_observed: c_adm,
        suggested_c_scale: p99.ceil().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::random_cells;

    #[test]
    fn ratios_are_sorted_quantiles() {
        let xs: Vec<VoxelSet> = (0..3).map(|s| random_cells(2, 16, 0.05, s).unwrap()).collect();
        let r = calibrate_c_scale(&xs, &PipelineSpec::new(1.5)).unwrap();
        assert!(r.steps > 0);
        assert!(r.p50 <= r.p90 && r.p90 <= r.p99 && r.p99 <= r.max_ratio);
        assert!(r.suggested_c_scale >= 1.0);
    }
}
