use serde::{Deserialize, Serialize};

use crate::cascade::{
    density_evolution_audit, init_cascade, run_cascade, AuditReport, CascadeConfig, CascadeReport,
    FacePool, SamplingSpec,
};
use crate::content::{hc_cubes, hc_dyadic, ContentParams};
use crate::cover::{
    build_collar_cover, build_qp_cover, choose_epsilon, CalibratedConstants, ChainCheck, CollarChecks,
    EpsilonConfig, EpsilonMode,
};
use crate::dyadic::{DyadicCube, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Knobs of one cover-and-cascade run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub m: f64,
    pub epsilon_mode: EpsilonMode,
    pub constants: CalibratedConstants,
    pub cascade: CascadeConfig,
    pub sampling: SamplingSpec,
    /// Additive slack in the visited-content bound.
    pub delta: f64,
    /// Keep the per-step log in the report.
    pub keep_log: bool,
}

impl PipelineSpec {
    pub fn new(m: f64) -> Self {
        PipelineSpec {
            m,
            epsilon_mode: EpsilonMode::Practical,
            constants: CalibratedConstants::default(),
            cascade: CascadeConfig::default(),
            sampling: SamplingSpec::default(),
            delta: 1e-6,
            keep_log: false,
        }
    }
}

/// Admissible-set geometry over every activatable face of the final cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleSummary {
    pub faces: usize,
    pub size_failures: usize,
    pub distance_failures: usize,
    pub c_adm_max: usize,
    pub smallest_ratio: f64,
    pub largest_distance_ratio: f64,
}

impl AdmissibleSummary {
    pub fn holds(&self) -> bool {
        self.size_failures == 0 && self.distance_failures == 0
    }
}

/// The three end-to-end guarantees at desk scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FillingBullets {
    pub on_polyhedron: bool,
    /// Content of the union of cover cubes some sample passed through.
    pub visited_content: f64,
    /// `1.1·3^m·6^n·(2^m/ε)·hc(X) + δ`.
    pub visited_bound: f64,
    pub content_holds: bool,
    pub displacement: f64,
    pub displacement_bound: f64,
    pub displacement_holds: bool,
}

impl FillingBullets {
    pub fn all_hold(&self) -> bool {
        self.on_polyhedron && self.content_holds && self.displacement_holds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport<T> {
    pub n: usize,
    pub m: f64,
    pub cells: usize,
    pub hc_x: f64,
    pub epsilon: EpsilonConfig<T>,
    pub qpp_size: usize,
    pub qp_size: usize,
    pub collar_size: usize,
    pub chain: ChainCheck<T>,
    pub collar: CollarChecks<T>,
    pub cascade: CascadeReport<T>,
    pub admissible: AdmissibleSummary,
    pub audit: AuditReport,
    pub bullets: FillingBullets,
}

impl<T> PipelineReport<T> {
    pub fn passed(&self) -> bool {
        self.chain.holds
            && self.collar.all_hold()
            && self.bullets.all_hold()
            && self.cascade.monotonicity_violations == 0
            && self.admissible.holds()
            && self.audit.passes()
    }
}

fn summarize_admissible(pool: &FacePool) -> AdmissibleSummary {
    use rayon::prelude::*;
    let sets: Vec<_> = pool
        .faces
        .par_iter()
        .filter_map(|f| pool.admissible(f))
        .collect();
    AdmissibleSummary {
        faces: sets.len(),
        size_failures: sets.iter().filter(|a| !a.sizes_hold).count(),
        distance_failures: sets.iter().filter(|a| !a.distance_holds).count(),
        c_adm_max: sets.iter().map(|a| a.c_adm_observed).max().unwrap_or(0),
        smallest_ratio: sets.iter().map(|a| a.smallest_ratio).fold(1.0, f64::min),
        largest_distance_ratio: sets.iter().map(|a| a.largest_distance_ratio).fold(0.0, f64::max),
    }
}

/// Runs near-optimal cover, enlargement, collars and the cascade on `x`,
/// then checks the filling guarantees, admissible sets and density audit.
pub fn run_pipeline<T: Real>(x: &VoxelSet, spec: &PipelineSpec) -> Result<PipelineReport<T>> {
    let n = x.n();
    if n > 4 {
        return Err(Error::UnsupportedDimension(format!("pipeline runs for n ≤ 4, got {n}")));
    }
    let params = ContentParams::new(T::lit(spec.m), n).map_err(|e| e.in_stage("params"))?;
    let eps: EpsilonConfig<T> = choose_epsilon(n, params.m, spec.epsilon_mode, &spec.constants)
        .map_err(|e| e.in_stage("epsilon"))?;
    if eps.underflow {
        return Err(Error::Configuration("[epsilon] strict threshold underflows the scalar".into()));
    }
    let (qp, qpp, chain) = build_qp_cover(x, &eps, &params).map_err(|e| e.in_stage("qp"))?;
    let (collar, checks) =
        build_collar_cover(&qp, &qpp, x, &eps, &params).map_err(|e| e.in_stage("collar"))?;
    let mut config = spec.cascade.clone();
    config.c_maxdensity = spec.constants.c_maxdensity.unwrap_or(config.c_maxdensity);
    config.c_scale = spec.constants.c_scale.unwrap_or(config.c_scale);
    let state = init_cascade(x, &collar, &params, spec.sampling, config).map_err(|e| e.in_stage("init"))?;
    let (state, mut cascade) = run_cascade(state).map_err(|e| e.in_stage("cascade"))?;
    let pool = FacePool::build(&collar, &params);
    let admissible = summarize_admissible(&pool);
    let audit = density_evolution_audit(&state, &pool, eps.epsilon.as_f64());

    let tol = state.config.snap_tol;
    let cubes = collar.cubes();
    let bounds: Vec<(Vec<f64>, Vec<f64>)> = cubes.iter().map(|c| c.bounds::<f64>()).collect();
    let visited: Vec<DyadicCube> = cubes
        .iter()
        .zip(&bounds)
        .filter(|(_, (lo, hi))| {
            state.samples.iter().any(|s| {
                s.trajectory
                    .iter()
                    .any(|p| (0..n).all(|i| lo[i] - tol <= p[i].as_f64() && p[i].as_f64() <= hi[i] + tol))
            })
        })
        .map(|(c, _)| c.clone())
        .collect();
    let base = cubes.iter().map(|c| c.level).min().unwrap_or(0).min(x.base_level());
    let visited_content = hc_cubes(n, base, &visited, params.m)
        .map_err(|e| e.in_stage("visited"))?
        .value
        .as_f64();
    let hc_x = hc_dyadic(x, &params).value.as_f64();
    let eps64 = eps.epsilon.as_f64();
    let visited_bound =
        1.1 * 3f64.powf(spec.m) * 6f64.powi(n as i32) * 2f64.powf(spec.m) / eps64 * hc_x + spec.delta;
    let bullets = FillingBullets {
        on_polyhedron: cascade.all_on_traces,
        visited_content,
        visited_bound,
        content_holds: visited_content <= visited_bound,
        displacement: cascade.max_trajectory_length,
        displacement_bound: cascade.trajectory_bound,
        displacement_holds: cascade.trajectory_bound_holds,
    };
    if !spec.keep_log {
        cascade.log.clear();
    }
    Ok(PipelineReport {
        n,
        m: spec.m,
        cells: x.len(),
        hc_x,
        qpp_size: qpp.len(),
        qp_size: qp.len(),
        collar_size: collar.len(),
        epsilon: eps,
        chain,
        collar: checks,
        cascade,
        admissible,
        audit,
        bullets,
    })
}
