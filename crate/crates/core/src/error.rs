use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A numeric parameter or geometric input is out of its valid range.
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("frame chain mismatch: expected parent frame '{expected}', found '{found}'")]
    FrameChain { expected: String, found: String },

    #[error("no transform chain between '{from}' and '{to}'")]
    Lookup { from: String, to: String },

    #[error("transform tree: {0}")]
    Tree(String),

    #[error("point is behind the projector lens (depth {depth})")]
    BehindLens { depth: f64 },

    #[error("pixel ray does not intersect the ground plane")]
    NoGroundIntersection,

    #[error("ground footprint undefined: {corner} corner ray misses the ground")]
    FootprintUndefined { corner: &'static str },

    /// Malformed config or path text. `at` names the field or the position.
    #[error("parse error at {at}: {message}")]
    Parse { at: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn parse(at: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { at: at.into(), message: message.into() }
    }

    /// True for errors caused by bad input files or parameters, as opposed to
    /// failures while running the pipeline.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Param(_) | Error::Parse { .. } | Error::Tree(_) | Error::Lookup { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
