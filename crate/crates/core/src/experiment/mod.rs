//! End-to-end experiments over synthetic inputs.

mod boxing;
mod calibrate;
mod generate;
mod pipeline;
mod report;
mod selection;

pub use boxing::{boxing_ratio, BoxingReport, BoxingRow, RatioMethod};
pub use calibrate::{calibrate_c_scale, CalibrationReport};
pub use generate::{
    ball_configuration, connected_domain, point_clusters, random_cells, rng, spiral_around_block,
    two_scale_cells, GeneratorSpec,
};
pub use pipeline::{run_pipeline, AdmissibleSummary, FillingBullets, PipelineReport, PipelineSpec};
pub use report::{
    load_points, load_voxels, run_batch, run_experiment, ExperimentKind, ExperimentSpec, InputSource,
    PointCloud, Provenance, RunReport, Source, ENGINE_VERSION,
};
pub use selection::{run_selection, SelectionRun, SelectionSpec};
