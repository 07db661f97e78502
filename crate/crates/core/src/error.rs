use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere along the parse → decode → estimate pipeline.
///
/// Variants that originate from a position in the input carry the byte
/// offset so that callers can report where a damaged file stopped making
/// sense.
#[derive(Debug, Error)]
pub enum Error {
    #[error("stream does not start with SOI (0xFFD8)")]
    MissingSoi,

    #[error("headerless fragment: an external decode context must be supplied")]
    HeaderlessFragment,

    #[error("unsupported marker 0xFF{marker:02X} at offset {offset}")]
    UnsupportedMarker { marker: u8, offset: usize },

    #[error("malformed segment at offset {offset}: {reason}")]
    MalformedSegment { offset: usize, reason: String },

    #[error("unresolved {kind} table reference {id} at offset {offset}")]
    UnresolvedTableReference {
        kind: &'static str,
        id: u8,
        offset: usize,
    },

    #[error("unsupported sampling factors {h}x{v} for component {component}")]
    UnsupportedSampling { component: u8, h: u8, v: u8 },

    #[error("multiple scans are not supported (second scan at offset {offset})")]
    MultipleScans { offset: usize },

    #[error("no SOF0/SOF1 frame header before the scan")]
    MissingFrame,

    #[error("no SOS segment found")]
    MissingScan,

    #[error("corrupt Huffman stream at offset {offset}: no code matches")]
    CorruptHuffmanStream { offset: usize },

    #[error("DC predictor overflow ({value}) at offset {offset}")]
    PredictorOverflow { value: i32, offset: usize },

    #[error("scan decoded to {n} MCUs, at least 2 are required")]
    EmptyScan { n: usize },

    #[error("width {width} is not a positive multiple of the MCU width {k}")]
    WidthNotMultipleOfK { width: u32, k: u32 },

    #[error("row length mismatch: {left} vs {right} samples")]
    DimensionMismatch { left: usize, right: usize },

    #[error("MCU index {index} out of range 1..{n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("unknown IDCT kernel {0:?}")]
    UnknownIdct(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid netpbm data: {0}")]
    InvalidPnm(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Byte offset into the input at which the error was detected, if known.
    pub fn offset(&self) -> Option<usize> {
        match self {
            Error::UnsupportedMarker { offset, .. }
            | Error::MalformedSegment { offset, .. }
            | Error::UnresolvedTableReference { offset, .. }
            | Error::MultipleScans { offset }
            | Error::CorruptHuffmanStream { offset }
            | Error::PredictorOverflow { offset, .. } => Some(*offset),
            _ => None,
        }
    }

    pub(crate) fn malformed(offset: usize, reason: impl Into<String>) -> Self {
        Error::MalformedSegment {
            offset,
            reason: reason.into(),
        }
    }
}
