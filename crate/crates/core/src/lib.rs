//! Exact dyadic Hausdorff content, density-controlled covers, radial
//! projection filling and good-ball selection in ℓ∞.

pub mod cascade;
pub mod content;
pub mod cover;
pub mod dyadic;
pub mod error;
pub mod experiment;
pub mod goodballs;
pub mod json;
pub mod scalar;
pub mod svg;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision forms of the generic types.
pub type Region = content::Region<f64>;
pub type ContentParams = content::ContentParams<f64>;
pub type ContentResult = content::ContentResult<f64>;
pub type RestrictedContentResult = content::RestrictedContentResult<f64>;
pub type EpsilonConfig = cover::EpsilonConfig<f64>;
pub type CascadeState = cascade::CascadeState<f64>;
pub type CascadeReport = cascade::CascadeReport<f64>;
pub type GoodBall = goodballs::GoodBall<f64>;
pub type EmptyingStep = goodballs::EmptyingStep<f64>;
pub type ReductionReport = goodballs::ReductionReport<f64>;
pub type PipelineReport = experiment::PipelineReport<f64>;
