//! Entropy decoding of a baseline scan into the ordered MCU sequence.
//!
//! The decoder never consults the declared frame size: it keeps decoding
//! MCUs until the scan runs out, so the MCU count `n` is a property of the
//! data alone. For width estimation only the first and last pixel rows of
//! each MCU are kept.

use std::sync::Arc;

use log::warn;

use crate::bits::{BitReader, Restart};
use crate::error::{Error, Result};
use crate::huffman::{DecodeFailure, HuffmanDecoder};
use crate::idct::{self, InverseDct};
use crate::marker;
use crate::parser::{parse_stream, DecodeContext, ZIGZAG};
use crate::raster::{ycbcr_to_rgb, Raster};

/// First and last pixel rows of one MCU, `K·C` interleaved samples each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McuEdgeProfile {
    /// 1-based decode position.
    pub index: usize,
    pub top_row: Vec<u8>,
    pub bottom_row: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McuSequence {
    pub profiles: Vec<McuEdgeProfile>,
    /// K: MCU width in pixels.
    pub mcu_width: usize,
    /// C: samples per pixel.
    pub components: usize,
    pub warnings: Vec<DecodeWarning>,
}

impl McuSequence {
    /// Builds a sequence from rows given in decode order, checking shapes.
    pub fn from_rows(rows: Vec<(Vec<u8>, Vec<u8>)>, mcu_width: usize, components: usize) -> Result<Self> {
        let width = mcu_width * components;
        let mut profiles = Vec::with_capacity(rows.len());
        for (i, (top_row, bottom_row)) in rows.into_iter().enumerate() {
            for row in [&top_row, &bottom_row] {
                if row.len() != width {
                    return Err(Error::DimensionMismatch {
                        left: row.len(),
                        right: width,
                    });
                }
            }
            profiles.push(McuEdgeProfile {
                index: i + 1,
                top_row,
                bottom_row,
            });
        }
        if profiles.len() < 2 {
            return Err(Error::EmptyScan { n: profiles.len() });
        }
        Ok(Self {
            profiles,
            mcu_width,
            components,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Profile for 1-based `index`.
    pub fn get(&self, index: usize) -> Option<&McuEdgeProfile> {
        index.checked_sub(1).and_then(|i| self.profiles.get(i))
    }
}

/// Recoverable anomalies met while decoding. Offsets are byte positions in
/// the buffer handed to the decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeWarning {
    /// The scan ended inside an MCU; the partial MCU was dropped.
    Truncated { offset: usize },
    /// Bytes of data were skipped to reach the next restart marker.
    SkippedToRestart { offset: usize, skipped: usize },
    /// A restart marker arrived out of sequence or mid-interval.
    UnexpectedRestart { offset: usize, marker: u8 },
    /// The interval ended but no restart marker followed.
    MissingRestart { offset: usize },
}

/// Fully assembled MCU pixel grid (`K × 8·Vmax`, `C` interleaved).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McuPixels {
    pub index: usize,
    pub grid: Vec<u8>,
}

/// Decoded quantized coefficients, one `Vec` of blocks per MCU, in
/// component order and row-major within each component.
#[derive(Debug, Clone)]
pub struct CoefficientScan {
    pub mcus: Vec<Vec<[i32; 64]>>,
    pub warnings: Vec<DecodeWarning>,
}

#[derive(Clone)]
pub struct McuDecoder {
    idct: Arc<dyn InverseDct>,
}

impl Default for McuDecoder {
    fn default() -> Self {
        Self::new(idct::default_idct())
    }
}

struct ComponentTables {
    dc: HuffmanDecoder,
    ac: HuffmanDecoder,
    blocks: usize,
}

enum Interrupt {
    Exhausted,
    Corrupt,
    Overflow(i32),
}

impl From<DecodeFailure> for Interrupt {
    fn from(f: DecodeFailure) -> Self {
        match f {
            DecodeFailure::Exhausted => Interrupt::Exhausted,
            DecodeFailure::NoMatch => Interrupt::Corrupt,
        }
    }
}

impl McuDecoder {
    pub fn new(idct: Arc<dyn InverseDct>) -> Self {
        Self { idct }
    }

    pub fn idct_name(&self) -> &'static str {
        self.idct.name()
    }

    /// Edge profiles for every complete MCU in `scan`.
    pub fn decode_mcus(&self, ctx: &DecodeContext, scan: &[u8]) -> Result<McuSequence> {
        self.decode_mcus_at(ctx, scan, 0)
    }

    /// As [`decode_mcus`](Self::decode_mcus), reporting offsets relative to
    /// `base` (the position of `scan` within its file).
    pub fn decode_mcus_at(&self, ctx: &DecodeContext, scan: &[u8], base: usize) -> Result<McuSequence> {
        let k = ctx.mcu_width();
        let c = ctx.component_count();
        let rows = k * c;
        let last = (ctx.mcu_height() - 1) * rows;
        let mut profiles = Vec::new();
        let mut grid = vec![0u8; k * ctx.mcu_height() * c];
        let warnings = self.walk(ctx, scan, base, |blocks| {
            self.assemble(ctx, blocks, &mut grid);
            profiles.push(McuEdgeProfile {
                index: profiles.len() + 1,
                top_row: grid[..rows].to_vec(),
                bottom_row: grid[last..last + rows].to_vec(),
            });
        })?;
        if profiles.len() < 2 {
            return Err(Error::EmptyScan { n: profiles.len() });
        }
        Ok(McuSequence {
            profiles,
            mcu_width: k,
            components: c,
            warnings,
        })
    }

    /// Full pixel grids for every complete MCU.
    pub fn decode_full(&self, ctx: &DecodeContext, scan: &[u8]) -> Result<(Vec<McuPixels>, Vec<DecodeWarning>)> {
        let mut out = Vec::new();
        let mut grid = vec![0u8; ctx.mcu_width() * ctx.mcu_height() * ctx.component_count()];
        let warnings = self.walk(ctx, scan, 0, |blocks| {
            self.assemble(ctx, blocks, &mut grid);
            out.push(McuPixels {
                index: out.len() + 1,
                grid: grid.clone(),
            });
        })?;
        Ok((out, warnings))
    }

    /// Quantized coefficients as stored in the stream (DC already
    /// un-differenced), before dequantization.
    pub fn decode_coefficients(&self, ctx: &DecodeContext, scan: &[u8]) -> Result<CoefficientScan> {
        let mut mcus = Vec::new();
        let warnings = self.walk(ctx, scan, 0, |blocks| mcus.push(blocks.to_vec()))?;
        Ok(CoefficientScan { mcus, warnings })
    }

    /// Lays the MCUs out row-major at `width_px` in the decoded component
    /// domain (YCbCr for color). Missing MCUs in the last row are mid-gray.
    pub fn reconstruct_components(&self, ctx: &DecodeContext, scan: &[u8], width_px: usize) -> Result<Raster> {
        let k = ctx.mcu_width();
        if width_px == 0 || !width_px.is_multiple_of(k) {
            return Err(Error::WidthNotMultipleOfK {
                width: width_px as u32,
                k: k as u32,
            });
        }
        let (mcus, _) = self.decode_full(ctx, scan)?;
        if mcus.len() < 2 {
            return Err(Error::EmptyScan { n: mcus.len() });
        }
        let per_row = width_px / k;
        let mh = ctx.mcu_height();
        let c = ctx.component_count();
        let mcu_rows = mcus.len().div_ceil(per_row);
        let mut raster = Raster::filled(width_px, mcu_rows * mh, c, 128);
        for (i, mcu) in mcus.iter().enumerate() {
            let (x0, y0) = ((i % per_row) * k, (i / per_row) * mh);
            for y in 0..mh {
                let src = &mcu.grid[y * k * c..(y + 1) * k * c];
                let dst = ((y0 + y) * width_px + x0) * c;
                raster.data[dst..dst + k * c].copy_from_slice(src);
            }
        }
        Ok(raster)
    }

    /// Display raster: RGB for three components, gray for one.
    pub fn reconstruct_image(&self, ctx: &DecodeContext, scan: &[u8], width_px: usize) -> Result<Raster> {
        let mut raster = self.reconstruct_components(ctx, scan, width_px)?;
        if raster.channels == 3 {
            for px in raster.data.chunks_exact_mut(3) {
                px.copy_from_slice(&ycbcr_to_rgb(px[0], px[1], px[2]));
            }
        }
        Ok(raster)
    }

    /// Dequantizes, transforms and upsamples one MCU into `grid`.
    fn assemble(&self, ctx: &DecodeContext, blocks: &[[i32; 64]], grid: &mut [u8]) {
        let k = ctx.mcu_width();
        let c_count = ctx.component_count();
        let (h_max, v_max) = (ctx.h_max(), ctx.v_max());
        let mut b = 0;
        let mut samples = [0u8; 64];
        let mut deq = [0i32; 64];
        for (ci, comp) in ctx.components.iter().enumerate() {
            let (h, v) = ctx.sampling(ci);
            let q = &ctx.quant_tables[usize::from(comp.quant_table_id)]
                .as_ref()
                .expect("validated context")
                .values;
            // Replication factors from component samples to MCU pixels.
            let (sx, sy) = (h_max / h, v_max / v);
            for by in 0..v {
                for bx in 0..h {
                    for i in 0..64 {
                        deq[i] = blocks[b][i] * i32::from(q[i]);
                    }
                    self.idct.inverse(&deq, &mut samples);
                    b += 1;
                    for y in 0..8 {
                        for x in 0..8 {
                            let s = samples[y * 8 + x];
                            let px0 = (bx * 8 + x) * sx;
                            let py0 = (by * 8 + y) * sy;
                            for dy in 0..sy {
                                for dx in 0..sx {
                                    grid[((py0 + dy) * k + px0 + dx) * c_count + ci] = s;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Core scan loop; calls `on_mcu` with each complete MCU's quantized
    /// blocks and returns the anomalies encountered.
    fn walk<F>(&self, ctx: &DecodeContext, scan: &[u8], base: usize, mut on_mcu: F) -> Result<Vec<DecodeWarning>>
    where
        F: FnMut(&[[i32; 64]]),
    {
        ctx.validate()?;
        let tables: Vec<ComponentTables> = ctx
            .components
            .iter()
            .enumerate()
            .map(|(i, comp)| {
                let (h, v) = ctx.sampling(i);
                ComponentTables {
                    dc: HuffmanDecoder::new(ctx.dc_tables[usize::from(comp.dc_table_id)].as_ref().expect("validated")),
                    ac: HuffmanDecoder::new(ctx.ac_tables[usize::from(comp.ac_table_id)].as_ref().expect("validated")),
                    blocks: h * v,
                }
            })
            .collect();

        let interval = usize::from(ctx.restart_interval);
        let mut reader = BitReader::new(scan);
        let mut warnings = Vec::new();
        let mut predictors = vec![0i32; tables.len()];
        let mut blocks = vec![[0i32; 64]; ctx.blocks_per_mcu()];
        let mut since_restart = 0usize;
        let mut next_rst = 0u8;
        let report = |w: DecodeWarning, warnings: &mut Vec<DecodeWarning>| {
            warn!("{w:?}");
            warnings.push(w);
        };

        loop {
            if interval > 0 && since_restart == interval {
                let at = base + reader.position();
                match reader.sync_restart() {
                    Restart::Marker { marker: m, skipped } => {
                        if skipped > 0 {
                            report(DecodeWarning::SkippedToRestart { offset: at, skipped }, &mut warnings);
                        }
                        if m != marker::RST0 + next_rst {
                            report(DecodeWarning::UnexpectedRestart { offset: at, marker: m }, &mut warnings);
                        }
                        next_rst = (m - marker::RST0 + 1) % 8;
                        predictors.fill(0);
                        since_restart = 0;
                    }
                    Restart::End { skipped } => {
                        if skipped > 0 {
                            report(DecodeWarning::MissingRestart { offset: at }, &mut warnings);
                        }
                        break;
                    }
                }
            }

            let start = base + reader.position();
            let start_bits = reader.bits_consumed();
            match decode_mcu(&mut reader, &tables, &mut predictors, &mut blocks) {
                Ok(()) => {
                    on_mcu(&blocks);
                    since_restart += 1;
                }
                Err(Interrupt::Exhausted) => {
                    let clean_end = reader.bits_consumed() == start_bits && is_padding(&mut reader);
                    match reader.pending_marker() {
                        Some((m, at)) if marker::is_rst(m) => {
                            // Restart where none was due: resynchronize on it.
                            if !clean_end {
                                report(DecodeWarning::Truncated { offset: start }, &mut warnings);
                            }
                            report(DecodeWarning::UnexpectedRestart { offset: base + at, marker: m }, &mut warnings);
                            reader.sync_restart();
                            next_rst = (m - marker::RST0 + 1) % 8;
                            predictors.fill(0);
                            since_restart = 0;
                        }
                        _ => {
                            if !clean_end {
                                report(DecodeWarning::Truncated { offset: start }, &mut warnings);
                            }
                            break;
                        }
                    }
                }
                Err(Interrupt::Corrupt) => {
                    return Err(Error::CorruptHuffmanStream {
                        offset: base + reader.position(),
                    })
                }
                Err(Interrupt::Overflow(value)) => {
                    return Err(Error::PredictorOverflow {
                        value,
                        offset: base + reader.position(),
                    })
                }
            }
        }
        Ok(warnings)
    }
}

/// True if the remaining bits are only the one-bit padding that closes an
/// entropy-coded segment.
fn is_padding(reader: &mut BitReader<'_>) -> bool {
    let (bits, avail) = reader.peek(16);
    avail < 8 && (avail == 0 || bits >> (16 - avail) == (1 << avail) - 1)
}

fn decode_mcu(
    reader: &mut BitReader<'_>,
    tables: &[ComponentTables],
    predictors: &mut [i32],
    blocks: &mut [[i32; 64]],
) -> std::result::Result<(), Interrupt> {
    let mut b = 0;
    for (ci, t) in tables.iter().enumerate() {
        for _ in 0..t.blocks {
            let block = &mut blocks[b];
            block.fill(0);
            let size = t.dc.decode(reader)?;
            if size > 11 {
                return Err(Interrupt::Corrupt);
            }
            let diff = reader.receive_extend(u32::from(size)).ok_or(Interrupt::Exhausted)?;
            let dc = predictors[ci] + diff;
            if !(-2048..=2047).contains(&dc) {
                return Err(Interrupt::Overflow(dc));
            }
            predictors[ci] = dc;
            block[0] = dc;

            let mut k = 1;
            while k < 64 {
                let rs = t.ac.decode(reader)?;
                let (run, size) = (usize::from(rs >> 4), u32::from(rs & 0x0F));
                if size == 0 {
                    if run == 15 {
                        k += 16;
                        continue;
                    }
                    break;
                }
                k += run;
                if k > 63 {
                    return Err(Interrupt::Corrupt);
                }
                block[ZIGZAG[k]] = reader.receive_extend(size).ok_or(Interrupt::Exhausted)?;
                k += 1;
            }
            if k > 64 {
                return Err(Interrupt::Corrupt);
            }
            b += 1;
        }
    }
    Ok(())
}

/// Parses `bytes` and decodes its scan with the default kernel.
pub fn decode_file(bytes: &[u8]) -> Result<(DecodeContext, McuSequence)> {
    let ctx = parse_stream(bytes)?;
    let seq = McuDecoder::default().decode_mcus_at(&ctx, ctx.scan(bytes), ctx.scan_data.start)?;
    Ok((ctx, seq))
}

pub fn decode_mcus(ctx: &DecodeContext, scan: &[u8]) -> Result<McuSequence> {
    McuDecoder::default().decode_mcus(ctx, scan)
}

pub fn reconstruct_image(ctx: &DecodeContext, scan: &[u8], width_px: usize) -> Result<Raster> {
    McuDecoder::default().reconstruct_image(ctx, scan, width_px)
}
