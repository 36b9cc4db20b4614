use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ray count {0} must be a positive multiple of 4")]
    InvalidRayCount(usize),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mask has no set pixels")]
    EmptyMask,

    #[error("point ({x}, {y}) lies outside the object")]
    OutsideObject { x: f64, y: f64 },

    #[error("quadrant {0} of the object is empty")]
    EmptyQuadrant(u8),

    #[error("invalid displacement: {0}")]
    InvalidDisplacement(String),

    #[error("invalid ray length {value} at slot {slot}")]
    InvalidRayLength { slot: usize, value: f64 },

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        match err.classify() {
            serde_json::error::Category::Io => Error::Io(err.into()),
            _ => Error::Parse {
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            },
        }
    }
}
