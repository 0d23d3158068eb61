use alloc::string::String;

/// Errors raised by the measurement and classification primitives.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A numeric parameter or input shape is outside its allowed domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A crop rectangle has no overlap with the image.
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    /// Iris landmarks collapse to a point.
    #[error("degenerate iris: {0}")]
    DegenerateIris(String),
    /// Training data cannot support a fit (e.g. a single class).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    /// A measurement stage failed; `stage` names it.
    #[error("measurement failed at {stage}: {source}")]
    Measurement {
        stage: &'static str,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    /// ROC AUC is undefined without both classes.
    #[error("AUC undefined: {0}")]
    UndefinedAuc(String),
    /// A synthetic scene violates its invariants.
    #[error("invalid scene: {0}")]
    Scene(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Measurement {
            stage,
            source: alloc::boxed::Box::new(self),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
