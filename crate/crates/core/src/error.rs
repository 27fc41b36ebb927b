use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate weak-perspective scale (s = {0}); scale must be positive")]
    DegenerateScale(f64),
    #[error("point {index} projects from non-positive depth {depth}")]
    BehindCamera { index: usize, depth: f64 },
    #[error("requested {requested} landmarks but mesh has only {available} vertices")]
    TooManyLandmarks { requested: usize, available: usize },
    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("hinge axis is unobservable: {0}")]
    UnobservableAxis(String),
    #[error("articulation angle is unobservable: all markers lie on the hinge line")]
    UnobservableAngle,
    #[error("too few markers: need at least {needed}, got {got}")]
    TooFewMarkers { needed: usize, got: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("no solvable frame for {0}")]
    NoSolvableFrame(String),
    #[error("empty frame list")]
    EmptyFrames,
    #[error("frame {frame} has {got} labels, expected {expected}")]
    RaggedFrames {
        frame: usize,
        expected: usize,
        got: usize,
    },
    #[error("prediction coverage incomplete; missing: {}", .missing.join(", "))]
    Coverage { missing: Vec<String> },
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid asset: {0}")]
    Asset(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed file {path}: {message}")]
    Format { path: String, message: String },
    #[error("i/o error on {path}: {cause}")]
    Io { path: String, cause: std::io::Error },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, cause: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            cause,
        }
    }

    pub(crate) fn format(path: impl AsRef<std::path::Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().display().to_string(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical routines themselves rather than of the inputs' shape or files.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateScale(_)
                | Error::BehindCamera { .. }
                | Error::DegenerateInput(_)
                | Error::UnobservableAxis(_)
                | Error::UnobservableAngle
                | Error::TooFewMarkers { .. }
                | Error::NoSolvableFrame(_)
        )
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}
