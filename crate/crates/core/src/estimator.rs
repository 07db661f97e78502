//! Width estimation by voting over vertically adjacent MCU pairs.
//!
//! For every MCU `i` the bottom pixel row is compared with the top row of
//! each later MCU `j`. The closest matches are taken as the likely vertical
//! neighbours and each one votes for the width `(j − i)·K`. The most voted
//! width wins; ties go to the smallest width.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::decoder::McuSequence;
use crate::error::{Error, Result};

/// Rows whose second-best distance is within this of the minimum are
/// counted as near-ties (diagnostic only).
pub const NEAR_TIE_EPSILON: f64 = 1e-9;

/// Mean over the `k` pixels of the Euclidean distance between
/// corresponding pixels of two rows of `c`-component samples.
///
/// Accumulates in `f64`, pixels ascending and components ascending, so the
/// result is reproducible bit for bit.
pub fn pairwise_distance(bottom: &[u8], top: &[u8], k: usize, c: usize) -> Result<f64> {
    if bottom.len() != k * c || top.len() != k * c {
        return Err(Error::DimensionMismatch {
            left: bottom.len(),
            right: top.len(),
        });
    }
    Ok(distance_unchecked(bottom, top, k, c))
}

#[inline]
fn distance_unchecked(bottom: &[u8], top: &[u8], k: usize, c: usize) -> f64 {
    let mut sum = 0.0f64;
    for (b, t) in bottom.chunks_exact(c).zip(top.chunks_exact(c)) {
        let mut sq = 0u32;
        for ch in 0..c {
            let d = i32::from(b[ch]) - i32::from(t[ch]);
            sq += (d * d) as u32;
        }
        sum += f64::from(sq).sqrt();
    }
    sum / k as f64
}

/// Distances from MCU `i` to every later MCU: `values[m] = d(i, i+1+m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub i: usize,
    pub values: Vec<f64>,
}

/// Indices `j` attaining the minimum of a [`DistanceRow`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimizerSet {
    pub i: usize,
    pub indices: BTreeSet<usize>,
}

pub fn distance_row(seq: &McuSequence, i: usize) -> Result<DistanceRow> {
    let n = seq.len();
    if i < 1 || i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let (k, c) = (seq.mcu_width, seq.components);
    let bottom = &seq.profiles[i - 1].bottom_row;
    let values = seq.profiles[i..]
        .iter()
        .map(|p| distance_unchecked(bottom, &p.top_row, k, c))
        .collect();
    Ok(DistanceRow { i, values })
}

/// Every `j` whose distance equals the row minimum exactly. An empty row
/// yields an empty set.
pub fn minimizers(row: &DistanceRow) -> MinimizerSet {
    let min = row.values.iter().copied().fold(f64::INFINITY, f64::min);
    let indices = row
        .values
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == min)
        .map(|(m, _)| row.i + 1 + m)
        .collect();
    MinimizerSet { i: row.i, indices }
}

pub fn candidate_widths(set: &MinimizerSet, k: usize) -> BTreeSet<u32> {
    set.indices.iter().map(|&j| ((j - set.i) * k) as u32).collect()
}

/// Vote counts per candidate width, ascending by width.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateHistogram {
    pub widths: Vec<u32>,
    pub freqs: Vec<u64>,
}

impl CandidateHistogram {
    pub fn total_votes(&self) -> u64 {
        self.freqs.iter().sum()
    }

    pub fn frequency(&self, width: u32) -> u64 {
        self.widths
            .binary_search(&width)
            .map(|i| self.freqs[i])
            .unwrap_or(0)
    }

    /// Each count divided by the number of MCU pairs that can produce that
    /// width, `n − m` for width `m·K`. Diagnostic only.
    pub fn normalized(&self, n: usize, k: usize) -> Vec<f64> {
        self.widths
            .iter()
            .zip(&self.freqs)
            .map(|(&w, &f)| {
                let m = w as usize / k;
                f as f64 / (n - m) as f64
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.widths.iter().copied().zip(self.freqs.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub estimated_width: u32,
    pub mode_frequency: u64,
    pub n: usize,
    pub mcu_width: usize,
    pub histogram: CandidateHistogram,
    pub tie_broken: bool,
    /// Rows whose minimum was matched within [`NEAR_TIE_EPSILON`] by a
    /// different, not exactly equal, distance.
    pub near_ties: usize,
    pub elapsed: Duration,
}

#[derive(Serialize)]
struct ReportJson {
    estimated_width: u32,
    mode_frequency: u64,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    tie_broken: bool,
    elapsed_ms: f64,
    histogram: Vec<HistogramEntry>,
}

#[derive(Serialize)]
struct HistogramEntry {
    width: u32,
    frequency: u64,
}

impl EstimationReport {
    pub fn to_json(&self) -> String {
        let json = ReportJson {
            estimated_width: self.estimated_width,
            mode_frequency: self.mode_frequency,
            n: self.n,
            k: self.mcu_width,
            tie_broken: self.tie_broken,
            elapsed_ms: self.elapsed.as_secs_f64() * 1000.0,
            histogram: self
                .histogram
                .iter()
                .map(|(width, frequency)| HistogramEntry { width, frequency })
                .collect(),
        };
        serde_json::to_string_pretty(&json).expect("report serializes")
    }

    /// `width,frequency,normalized_frequency` rows, ascending by width.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("width,frequency,normalized_frequency\n");
        let norm = self.histogram.normalized(self.n, self.mcu_width);
        for ((w, f), nf) in self.histogram.iter().zip(norm) {
            let _ = writeln!(out, "{w},{f},{nf}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EstimatorOptions {
    /// Only consider pairs with `(j − i)·K ≤ max_width`.
    pub max_width: Option<usize>,
    /// Evaluate distance rows on the rayon pool.
    pub parallel: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WidthEstimator {
    pub options: EstimatorOptions,
}

/// Per-row result: how many rows each offset `m = j − i` won, plus the
/// near-tie diagnostic.
struct Votes {
    counts: Vec<u64>,
    near_ties: usize,
}

impl Votes {
    fn new(n: usize) -> Self {
        Self {
            counts: vec![0; n],
            near_ties: 0,
        }
    }

    fn merge(mut self, other: Votes) -> Votes {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.near_ties += other.near_ties;
        self
    }
}

impl WidthEstimator {
    pub fn new(options: EstimatorOptions) -> Self {
        Self { options }
    }

    pub fn estimate(&self, seq: &McuSequence) -> Result<EstimationReport> {
        let started = Instant::now();
        let n = seq.len();
        if n < 2 {
            return Err(Error::EmptyScan { n });
        }
        let k = seq.mcu_width;
        let reach = match self.options.max_width {
            Some(w) => (w / k).max(1),
            None => n,
        };

        let votes = if self.options.parallel {
            (0..n - 1)
                .into_par_iter()
                .fold(|| Votes::new(n), |acc, i| self.vote_row(seq, i, reach, acc))
                .reduce(|| Votes::new(n), Votes::merge)
        } else {
            (0..n - 1).fold(Votes::new(n), |acc, i| self.vote_row(seq, i, reach, acc))
        };

        let mut histogram = CandidateHistogram::default();
        for (m, &f) in votes.counts.iter().enumerate() {
            if f > 0 {
                histogram.widths.push((m * k) as u32);
                histogram.freqs.push(f);
            }
        }
        let mode_frequency = histogram.freqs.iter().copied().max().unwrap_or(0);
        // Widths ascend, so the first maximum is the smallest tied width.
        let mode_at = histogram
            .freqs
            .iter()
            .position(|&f| f == mode_frequency)
            .expect("at least one vote per row");
        let tie_broken = histogram.freqs.iter().filter(|&&f| f == mode_frequency).count() > 1;
        if tie_broken {
            log::warn!(
                "frequency tie at {mode_frequency} votes; choosing smallest width {}",
                histogram.widths[mode_at]
            );
        }
        Ok(EstimationReport {
            estimated_width: histogram.widths[mode_at],
            mode_frequency,
            n,
            mcu_width: k,
            histogram,
            tie_broken,
            near_ties: votes.near_ties,
            elapsed: started.elapsed(),
        })
    }

    /// Adds row `i`'s (0-based) minimizer offsets to `acc`.
    fn vote_row(&self, seq: &McuSequence, i: usize, reach: usize, mut acc: Votes) -> Votes {
        let (k, c) = (seq.mcu_width, seq.components);
        let bottom = &seq.profiles[i].bottom_row;
        let last = (i + reach).min(seq.len() - 1);
        let mut min = f64::INFINITY;
        let mut second = f64::INFINITY;
        let mut winners: Vec<usize> = Vec::new();
        for j in i + 1..=last {
            let d = distance_unchecked(bottom, &seq.profiles[j].top_row, k, c);
            if d < min {
                second = min;
                min = d;
                winners.clear();
                winners.push(j - i);
            } else if d == min {
                winners.push(j - i);
            } else if d < second {
                second = d;
            }
        }
        if second - min <= NEAR_TIE_EPSILON {
            acc.near_ties += 1;
        }
        for m in winners {
            acc.counts[m] += 1;
        }
        acc
    }
}

/// Estimates with default options (full search range, parallel rows).
pub fn estimate_width(seq: &McuSequence) -> Result<EstimationReport> {
    WidthEstimator::new(EstimatorOptions {
        max_width: None,
        parallel: true,
    })
    .estimate(seq)
}
