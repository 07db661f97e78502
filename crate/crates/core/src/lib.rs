//! Width estimation for baseline JPEG data whose frame header is missing or
//! untrusted.
//!
//! The scan is decoded into a sequence of MCUs; for every MCU the one whose
//! top edge best continues its bottom edge is taken as the MCU directly
//! below it, and the most frequent index offset, times the MCU width, is the
//! estimated image width.
//!
//! ```no_run
//! let bytes = std::fs::read("photo.jpg").unwrap();
//! let (_, seq) = mcuwidth::decode_file(&bytes).unwrap();
//! let report = mcuwidth::estimate_width(&seq).unwrap();
//! println!("{}", report.estimated_width);
//! ```

pub mod bits;
pub mod cli;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod huffman;
pub mod idct;
pub mod marker;
pub mod parser;
pub mod raster;
pub mod synth;

pub use decoder::{decode_file, decode_mcus, reconstruct_image, DecodeWarning, McuDecoder, McuEdgeProfile, McuSequence};
pub use error::{Error, Result};
pub use estimator::{
    candidate_widths, distance_row, estimate_width, minimizers, pairwise_distance, CandidateHistogram, EstimationReport,
    EstimatorOptions, WidthEstimator,
};
pub use eval::{evaluate_corpus, is_correct_estimate, target_width, EvalSummary, Evaluator, FileVerdict};
pub use idct::{IdctRegistry, InverseDct};
pub use marker::MarkerSegment;
pub use parser::{parse_stream, strip_dimensions, DecodeContext};
pub use raster::Raster;
pub use synth::{generate_periodic_corpus, generate_synthetic_corpus, ContentClass, SyntheticImage};
