//! Error type shared across the pipeline.

use std::fmt;
use std::io;

#[derive(Debug)]
pub enum Error {
    /// Underlying I/O failure while reading or writing pipeline files.
    Io(io::Error),
    /// A volume or header file could not be parsed.
    Parse(String),
    /// NIfTI datatype code outside the supported set.
    UnsupportedDatatype(i16),
    /// Declared dims do not match the number of stored voxels.
    DataLengthMismatch { expected: usize, actual: usize },
    /// Grid and mask dims disagree.
    DimsMismatch { grid: (usize, usize, usize), mask: (usize, usize, usize) },
    /// Mask contains no ROI voxels.
    EmptyRoi,
    /// Resampling produced a mask with no ROI voxels.
    ResampledMaskEmpty,
    /// A value that must be finite is NaN or infinite.
    NonFinite(String),
    /// A parameter violates a documented precondition.
    InvalidParam(String),
    /// Fewer samples than mixture components.
    TooFewSamples { needed: usize, got: usize },
    /// Histograms with different bin counts cannot be compared.
    BinCountMismatch { left: usize, right: usize },
    /// A voxel index that must lie inside the ROI does not.
    OutsideRoi,
    /// ROI has too few voxels for the requested operation.
    RoiTooSmall(String),
    /// Training data contains a single class where two are required.
    SingleClass,
    /// Malformed cohort table or manifest.
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::UnsupportedDatatype(code) => write!(f, "unsupported datatype code {code}"),
            Error::DataLengthMismatch { expected, actual } => {
                write!(f, "data length mismatch: header declares {expected} voxels, file stores {actual}")
            }
            Error::DimsMismatch { grid, mask } => {
                write!(f, "dims mismatch: grid {grid:?} vs mask {mask:?}")
            }
            Error::EmptyRoi => write!(f, "empty ROI: mask has no true voxels"),
            Error::ResampledMaskEmpty => write!(f, "resampled mask empty: ROI vanished at target spacing"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidParam(msg) => write!(f, "invalid parameter: {msg}"),
            Error::TooFewSamples { needed, got } => {
                write!(f, "too few samples: need at least {needed}, got {got}")
            }
            Error::BinCountMismatch { left, right } => {
                write!(f, "histogram bin count mismatch: {left} vs {right}")
            }
            Error::OutsideRoi => write!(f, "voxel lies outside the ROI"),
            Error::RoiTooSmall(msg) => write!(f, "ROI too small: {msg}"),
            Error::SingleClass => write!(f, "training data contains a single class"),
            Error::Table(msg) => write!(f, "table error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}
