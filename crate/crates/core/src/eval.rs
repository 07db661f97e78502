//! Corpus evaluation: run the estimator on files with intact headers and
//! score each estimate against the width recorded in the header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::decoder::McuDecoder;
use crate::error::{Error, Result};
use crate::estimator::{EstimationReport, WidthEstimator};
use crate::parser::{parse_stream, strip_dimensions};

/// Smallest multiple of `k` not below `w_true`: the width the MCU grid
/// actually covers.
pub fn target_width(w_true: u32, k: u32) -> u32 {
    w_true.div_ceil(k) * k
}

pub fn is_correct_estimate(w_est: u32, w_true: u32, k: u32) -> bool {
    w_est == target_width(w_true, k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileVerdict {
    pub path: String,
    /// Width from the intact header; absent if the header could not be read.
    pub w_true: Option<u32>,
    #[serde(rename = "K")]
    pub k: Option<u32>,
    pub w_estimated: Option<u32>,
    pub target: Option<u32>,
    pub correct: bool,
    pub tie_broken: bool,
    pub error: Option<String>,
}

impl FileVerdict {
    fn failed(path: String, w_true: Option<u32>, k: Option<u32>, error: &Error) -> Self {
        Self {
            path,
            w_true,
            k,
            w_estimated: None,
            target: w_true.zip(k).map(|(w, k)| target_width(w, k)),
            correct: false,
            tie_broken: false,
            error: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    #[serde(rename = "N")]
    pub total: usize,
    #[serde(rename = "M")]
    pub correct: usize,
    pub acc: f64,
    pub verdicts: Vec<FileVerdict>,
}

impl EvalSummary {
    /// Sorts verdicts by path and tallies them.
    pub fn from_verdicts(mut verdicts: Vec<FileVerdict>) -> Self {
        verdicts.sort_by(|a, b| a.path.cmp(&b.path));
        let total = verdicts.len();
        let correct = verdicts.iter().filter(|v| v.correct).count();
        let acc = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
        Self {
            total,
            correct,
            acc,
            verdicts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Plain-text table with one row for the corpus: `N`, `M`, `acc(%)`,
    /// followed by the files that were not estimated correctly.
    pub fn to_table(&self, label: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:>8} {:>8} {:>8}", "", "N", "M", "acc(%)");
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>8} {:>8.2}",
            label,
            self.total,
            self.correct,
            self.acc * 100.0
        );
        let misses: Vec<&FileVerdict> = self.verdicts.iter().filter(|v| !v.correct).collect();
        if !misses.is_empty() {
            let _ = writeln!(out, "\nincorrect:");
            for v in misses {
                let shown = |o: Option<u32>| o.map_or_else(|| "-".to_string(), |w| w.to_string());
                let _ = write!(
                    out,
                    "  {}  estimated {} target {}",
                    v.path,
                    shown(v.w_estimated),
                    shown(v.target)
                );
                if let Some(e) = &v.error {
                    let _ = write!(out, "  error: {e}");
                }
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Clone, Default)]
pub struct Evaluator {
    pub decoder: McuDecoder,
    pub estimator: WidthEstimator,
    /// Zero the header dimensions before estimating.
    pub strip: bool,
}

impl Evaluator {
    /// Runs the estimator on `bytes` the way a headerless recovery would:
    /// optionally with the frame dimensions removed. Returns the report and
    /// the ground truth read from the untouched header.
    pub fn estimate_bytes(&self, bytes: &[u8]) -> Result<EstimationReport> {
        let stripped;
        let input = if self.strip {
            stripped = strip_dimensions(bytes)?;
            &stripped[..]
        } else {
            bytes
        };
        let ctx = parse_stream(input)?;
        let seq = self
            .decoder
            .decode_mcus_at(&ctx, ctx.scan(input), ctx.scan_data.start)?;
        self.estimator.estimate(&seq)
    }

    pub fn evaluate_bytes(&self, path: &str, bytes: &[u8]) -> FileVerdict {
        let header = match parse_stream(bytes) {
            Ok(ctx) => ctx,
            Err(e) => return FileVerdict::failed(path.to_string(), None, None, &e),
        };
        let k = header.mcu_width() as u32;
        let Some(w_true) = header.declared_width else {
            let e = Error::malformed(0, "no ground-truth width in header");
            return FileVerdict::failed(path.to_string(), None, Some(k), &e);
        };
        match self.estimate_bytes(bytes) {
            Ok(report) => FileVerdict {
                path: path.to_string(),
                w_true: Some(w_true),
                k: Some(k),
                w_estimated: Some(report.estimated_width),
                target: Some(target_width(w_true, k)),
                correct: is_correct_estimate(report.estimated_width, w_true, k),
                tie_broken: report.tie_broken,
                error: None,
            },
            Err(e) => FileVerdict::failed(path.to_string(), Some(w_true), Some(k), &e),
        }
    }

    /// Evaluates every file in `paths` in parallel; unreadable or
    /// undecodable files are scored as incorrect.
    pub fn evaluate_corpus<P: AsRef<Path> + Sync>(&self, paths: &[P]) -> Result<EvalSummary> {
        if paths.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let verdicts = paths
            .par_iter()
            .map(|p| {
                let p = p.as_ref();
                let label = p.display().to_string();
                match fs::read(p) {
                    Ok(bytes) => self.evaluate_bytes(&label, &bytes),
                    Err(e) => FileVerdict::failed(label, None, None, &Error::Io(e)),
                }
            })
            .collect();
        Ok(EvalSummary::from_verdicts(verdicts))
    }

    /// In-memory variant of [`evaluate_corpus`](Self::evaluate_corpus).
    pub fn evaluate_named(&self, files: &[(String, Vec<u8>)]) -> Result<EvalSummary> {
        if files.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let verdicts = files
            .par_iter()
            .map(|(name, bytes)| self.evaluate_bytes(name, bytes))
            .collect();
        Ok(EvalSummary::from_verdicts(verdicts))
    }
}

pub fn evaluate_corpus<P: AsRef<Path> + Sync>(paths: &[P], strip: bool) -> Result<EvalSummary> {
    Evaluator {
        strip,
        ..Evaluator::default()
    }
    .evaluate_corpus(paths)
}

/// `.jpg`/`.jpeg` files directly inside `dir`, sorted by name.
pub fn collect_jpegs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("jpg") || e.eq_ignore_ascii_case("jpeg"))
        })
        .collect();
    out.sort();
    Ok(out)
}
