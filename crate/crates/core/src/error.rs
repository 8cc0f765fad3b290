use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("invalid bounding box [{x0}, {y0}, {x1}, {y1}]")]
    InvalidBoundingBox { x0: u32, y0: u32, x1: u32, y1: u32 },

    #[error("malformed trimap: byte value {value} at index {index} (expected 0, 128 or 255)")]
    MalformedTrimap { value: u8, index: usize },

    #[error("alpha value {value} at index {index} is outside [0, 1]")]
    AlphaOutOfRange { value: f64, index: usize },

    #[error("mask has no foreground pixel")]
    EmptyMask,

    #[error("degenerate alpha matte: no pixel lies between the thresholds' sides (no object boundary)")]
    DegenerateAlpha,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid matting request: {0}")]
    InvalidRequest(String),

    #[error("image of {width}x{height} is too small for window radius {window_radius}")]
    ImageTooSmall {
        width: u32,
        height: u32,
        window_radius: u32,
    },

    #[error("conjugate gradient did not converge: relative residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("matting backend `{backend}` failed: {reason}")]
    BackendFailure { backend: String, reason: String },

    #[error("trimap has no unknown region")]
    NoUnknownRegion,

    #[error("unknown pixel ({x}, {y}) is not covered by any patch")]
    UncoveredUnknown { x: u32, y: u32 },

    #[error("empty evaluation region")]
    EmptyRegion,

    #[error("foreground ({fg_w}x{fg_h}) is larger than background ({bg_w}x{bg_h})")]
    ForegroundTooLarge {
        fg_w: u32,
        fg_h: u32,
        bg_w: u32,
        bg_h: u32,
    },

    #[error("RLE counts sum to {sum}, expected {expected}")]
    RleLengthMismatch { sum: u64, expected: u64 },

    #[error("manifest schema violation at `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("duplicate instance id {0}")]
    DuplicateId(u64),

    #[error("instance {instance_id}, pass {pass}: {source}")]
    Stage {
        instance_id: u64,
        pass: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Wraps a stage error with the instance and pass it occurred in.
    pub fn at_stage(self, instance_id: u64, pass: usize) -> Self {
        Error::Stage {
            instance_id,
            pass,
            source: Box::new(self),
        }
    }
}
