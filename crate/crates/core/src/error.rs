use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// [`Error::kind`] gives a stable machine-readable tag that the CLI emits in
/// its stderr error JSON.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("scene has no ground-truth points")]
    EmptyScene,
    #[error("insufficient points: need at least {required}, got {actual}")]
    InsufficientPoints { required: usize, actual: usize },
    #[error("no plane found: best inlier count {best} < required {required}")]
    NoPlaneFound { best: usize, required: usize },

    #[error("partial cloud is empty")]
    EmptyPartial,
    #[error("partial cloud has {partial} points but completion output size is {output}")]
    PartialTooLarge { partial: usize, output: usize },
    #[error("invalid pass count T={0}; at least 2 passes are required")]
    InvalidPassCount(usize),
    #[error("ensemble pass {pass} has {actual} points, expected {expected}")]
    CountMismatch {
        pass: usize,
        expected: usize,
        actual: usize,
    },
    #[error("ensemble pass {pass} differs from pass 0 at partial index {index}")]
    PartialMismatch { pass: usize, index: usize },
    #[error("invalid ensemble: {0}")]
    InvalidStack(String),

    #[error("too few points for grasp sampling: need {required}, got {actual}")]
    TooFewPoints { required: usize, actual: usize },
    #[error("no grasp candidates found")]
    NoCandidates,
    #[error("grasp entry {index}: {message}")]
    Schema { index: usize, message: String },

    #[error("candidate list is empty")]
    EmptyCandidates,
    #[error("trial {trial} executed {executed} grasps, fewer than k={k}")]
    InsufficientExecutions {
        trial: usize,
        executed: usize,
        k: usize,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Stable tag of the innermost error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io-error",
            Error::Parse { .. } => "parse-error",
            Error::Format(_) => "format-error",
            Error::LengthMismatch { .. } => "length-mismatch-error",
            Error::InvalidValue(_) => "invalid-value-error",
            Error::InvalidTransform(_) => "invalid-transform-error",
            Error::EmptyScene => "empty-scene-error",
            Error::InsufficientPoints { .. } => "insufficient-points-error",
            Error::NoPlaneFound { .. } => "no-plane-found-error",
            Error::EmptyPartial => "empty-partial-error",
            Error::PartialTooLarge { .. } => "partial-too-large-error",
            Error::InvalidPassCount(_) => "invalid-T-error",
            Error::CountMismatch { .. } => "count-mismatch-error",
            Error::PartialMismatch { .. } => "partial-mismatch-error",
            Error::InvalidStack(_) => "invalid-stack-error",
            Error::TooFewPoints { .. } => "too-few-points-error",
            Error::NoCandidates => "no-candidates-error",
            Error::Schema { .. } => "schema-error",
            Error::EmptyCandidates => "empty-candidates-error",
            Error::InsufficientExecutions { .. } => "insufficient-executions-error",
            Error::Context { source, .. } => source.kind(),
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context_with(self, f: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context_with(self, f: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
