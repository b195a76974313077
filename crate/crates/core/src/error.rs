use thiserror::Error;

/// Errors raised by the engine.
///
/// Variants split into two families: input problems (bad data, bad
/// configuration, unsupported request) and internal invariant failures,
/// which indicate a bug or a broken proven guarantee.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("projection undefined: {0}")]
    UndefinedProjection(String),
    #[error("projection center search failed: {0}")]
    SearchFailure(String),
    #[error("cascade already finished")]
    CascadeFinished,
    #[error("net too sparse: {0}")]
    NetResolution(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

impl Error {
    /// True for errors that signal a violated invariant rather than bad input.
    pub fn is_invariant(&self) -> bool {
        matches!(
            self,
            Error::InternalInvariant(_) | Error::SearchFailure(_) | Error::NetResolution(_)
        )
    }
}

impl Error {
    /// Prefixes the message with the pipeline stage that raised it.
    pub fn in_stage(self, stage: &str) -> Error {
        let tag = |s: String| format!("[{stage}] {s}");
        match self {
            Error::Input(s) => Error::Input(tag(s)),
            Error::Capacity(s) => Error::Capacity(tag(s)),
            Error::Resolution(s) => Error::Resolution(tag(s)),
            Error::Coverage(s) => Error::Coverage(tag(s)),
            Error::Domain(s) => Error::Domain(tag(s)),
            Error::Configuration(s) => Error::Configuration(tag(s)),
            Error::Precondition(s) => Error::Precondition(tag(s)),
            Error::UnsupportedDimension(s) => Error::UnsupportedDimension(tag(s)),
            Error::UndefinedProjection(s) => Error::UndefinedProjection(tag(s)),
            Error::SearchFailure(s) => Error::SearchFailure(tag(s)),
            Error::NetResolution(s) => Error::NetResolution(tag(s)),
            Error::InternalInvariant(s) => Error::InternalInvariant(tag(s)),
            Error::CascadeFinished => Error::CascadeFinished,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
