//! Marker-level parsing of a baseline JPEG stream into a [`DecodeContext`].
//!
//! The declared frame dimensions are kept as optional metadata only; nothing
//! downstream of the parser needs them to decode the scan.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::marker::{self, MarkerSegment};

/// Natural-order position of each zigzag index.
pub const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentSpec {
    pub component_id: u8,
    pub h_sampling: u8,
    pub v_sampling: u8,
    pub quant_table_id: u8,
    pub dc_table_id: u8,
    pub ac_table_id: u8,
}

/// Canonical Huffman table as transmitted in DHT: code counts per length
/// 1..=16 followed by the symbols in code order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanSpec {
    pub counts: [u8; 16],
    pub symbols: Vec<u8>,
}

impl HuffmanSpec {
    pub fn new(counts: [u8; 16], symbols: Vec<u8>) -> Result<Self> {
        let total: usize = counts.iter().map(|&c| usize::from(c)).sum();
        if total != symbols.len() || total > 256 {
            return Err(Error::malformed(0, "Huffman symbol count mismatch"));
        }
        // Code space check: at every length the codes assigned so far must fit.
        let mut code: u32 = 0;
        for (i, &c) in counts.iter().enumerate() {
            code += u32::from(c);
            if code > (1 << (i + 1)) {
                return Err(Error::malformed(0, "Huffman code space overfull"));
            }
            code <<= 1;
        }
        Ok(Self { counts, symbols })
    }
}

/// Quantization table in natural (row-major) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantTable {
    pub values: [u16; 64],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeContext {
    pub components: Vec<ComponentSpec>,
    pub dc_tables: [Option<HuffmanSpec>; 4],
    pub ac_tables: [Option<HuffmanSpec>; 4],
    pub quant_tables: [Option<QuantTable>; 4],
    /// MCUs per restart interval, 0 when restart markers are not used.
    pub restart_interval: u16,
    pub declared_width: Option<u32>,
    pub declared_height: Option<u32>,
    /// Entropy-coded bytes of the scan within the parsed buffer.
    pub scan_data: Range<usize>,
}

impl DecodeContext {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Effective sampling factors. A single-component scan is never
    /// interleaved, so its MCU is one data unit whatever the header says.
    pub fn sampling(&self, index: usize) -> (usize, usize) {
        if self.components.len() == 1 {
            (1, 1)
        } else {
            let c = &self.components[index];
            (usize::from(c.h_sampling), usize::from(c.v_sampling))
        }
    }

    pub fn h_max(&self) -> usize {
        (0..self.components.len())
            .map(|i| self.sampling(i).0)
            .max()
            .unwrap_or(1)
    }

    pub fn v_max(&self) -> usize {
        (0..self.components.len())
            .map(|i| self.sampling(i).1)
            .max()
            .unwrap_or(1)
    }

    /// K: MCU width in pixels.
    pub fn mcu_width(&self) -> usize {
        8 * self.h_max()
    }

    pub fn mcu_height(&self) -> usize {
        8 * self.v_max()
    }

    /// Data units per MCU.
    pub fn blocks_per_mcu(&self) -> usize {
        (0..self.components.len())
            .map(|i| {
                let (h, v) = self.sampling(i);
                h * v
            })
            .sum()
    }

    pub fn scan<'a>(&self, bytes: &'a [u8]) -> &'a [u8] {
        &bytes[self.scan_data.clone()]
    }

    /// Checks the cross-references between components and tables.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.components.len(), 1 | 3) {
            return Err(Error::malformed(
                0,
                format!("unsupported component count {}", self.components.len()),
            ));
        }
        for c in &self.components {
            check_sampling(c)?;
            let lookups = [
                ("quantization", c.quant_table_id, self.quant_tables.get(usize::from(c.quant_table_id)).map(Option::is_some)),
                ("DC Huffman", c.dc_table_id, self.dc_tables.get(usize::from(c.dc_table_id)).map(Option::is_some)),
                ("AC Huffman", c.ac_table_id, self.ac_tables.get(usize::from(c.ac_table_id)).map(Option::is_some)),
            ];
            for (kind, id, present) in lookups {
                if present != Some(true) {
                    return Err(Error::UnresolvedTableReference { kind, id, offset: 0 });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Report a missing SOI as [`Error::HeaderlessFragment`] so the caller
    /// knows to fall back to an externally supplied context.
    pub allow_headerless: bool,
}

pub fn parse_stream(bytes: &[u8]) -> Result<DecodeContext> {
    parse_stream_with(bytes, ParseOptions::default())
}

pub fn parse_stream_with(bytes: &[u8], options: ParseOptions) -> Result<DecodeContext> {
    let (ctx, _) = parse_header(bytes, options)?;
    Ok(ctx)
}

/// Header segments from SOI through SOS, in stream order.
pub fn header_segments(bytes: &[u8]) -> Result<Vec<MarkerSegment>> {
    let (_, segments) = parse_header(bytes, ParseOptions::default())?;
    Ok(segments)
}

/// Copy of `bytes` with the frame header's height and width fields zeroed.
pub fn strip_dimensions(bytes: &[u8]) -> Result<Vec<u8>> {
    let (_, segments) = parse_header(bytes, ParseOptions::default())?;
    let sof = segments
        .iter()
        .find(|s| matches!(s.marker(), marker::SOF0 | marker::SOF1))
        .ok_or(Error::MissingFrame)?;
    let mut out = bytes.to_vec();
    // marker(2) length(2) precision(1) height(2) width(2)
    out[sof.offset + 5..sof.offset + 9].fill(0);
    Ok(out)
}

struct Frame {
    components: Vec<ComponentSpec>,
    width: u16,
    height: u16,
}

fn parse_header(bytes: &[u8], options: ParseOptions) -> Result<(DecodeContext, Vec<MarkerSegment>)> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != marker::SOI {
        return Err(if options.allow_headerless {
            Error::HeaderlessFragment
        } else {
            Error::MissingSoi
        });
    }

    let mut segments = Vec::new();
    let mut dc_tables: [Option<HuffmanSpec>; 4] = Default::default();
    let mut ac_tables: [Option<HuffmanSpec>; 4] = Default::default();
    let mut quant_tables: [Option<QuantTable>; 4] = Default::default();
    let mut restart_interval = 0u16;
    let mut frame: Option<Frame> = None;
    let mut pos = 0;

    loop {
        if pos >= bytes.len() {
            return Err(Error::MissingScan);
        }
        let (seg, next) = marker::read_segment(bytes, pos)?;
        let m = seg.marker();
        let offset = seg.offset;
        match m {
            marker::SOF0 | marker::SOF1 => {
                if frame.is_some() {
                    return Err(Error::malformed(offset, "duplicate frame header"));
                }
                frame = Some(parse_sof(&seg.payload, offset)?);
            }
            m if marker::is_unsupported_frame(m) => {
                return Err(Error::UnsupportedMarker { marker: m, offset });
            }
            marker::DHT => parse_dht(&seg.payload, offset, &mut dc_tables, &mut ac_tables)?,
            marker::DQT => parse_dqt(&seg.payload, offset, &mut quant_tables)?,
            marker::DRI => {
                if seg.payload.len() != 2 {
                    return Err(Error::malformed(offset, "DRI payload must be 2 bytes"));
                }
                restart_interval = u16::from_be_bytes([seg.payload[0], seg.payload[1]]);
            }
            marker::SOS => {
                let mut frame = frame.ok_or(Error::MissingFrame)?;
                parse_sos(&seg.payload, offset, &mut frame.components)?;
                segments.push(seg);
                let scan_start = next;
                let scan_end = find_scan_end(bytes, scan_start)?;
                let ctx = DecodeContext {
                    components: frame.components,
                    dc_tables,
                    ac_tables,
                    quant_tables,
                    restart_interval,
                    declared_width: (frame.width != 0).then_some(u32::from(frame.width)),
                    declared_height: (frame.height != 0).then_some(u32::from(frame.height)),
                    scan_data: scan_start..scan_end,
                };
                check_tables(&ctx, offset)?;
                return Ok((ctx, segments));
            }
            marker::EOI => return Err(Error::MissingScan),
            // SOI, APPn, COM, DNL and anything unknown with a length: skip.
            _ => {}
        }
        segments.push(seg);
        pos = next;
    }
}

fn check_sampling(c: &ComponentSpec) -> Result<()> {
    if !(1..=2).contains(&c.h_sampling) || !(1..=2).contains(&c.v_sampling) {
        return Err(Error::UnsupportedSampling {
            component: c.component_id,
            h: c.h_sampling,
            v: c.v_sampling,
        });
    }
    Ok(())
}

fn check_tables(ctx: &DecodeContext, offset: usize) -> Result<()> {
    ctx.validate().map_err(|e| match e {
        Error::UnresolvedTableReference { kind, id, .. } => {
            Error::UnresolvedTableReference { kind, id, offset }
        }
        other => other,
    })
}

fn parse_sof(p: &[u8], offset: usize) -> Result<Frame> {
    if p.len() < 6 {
        return Err(Error::malformed(offset, "SOF too short"));
    }
    if p[0] != 8 {
        return Err(Error::malformed(offset, format!("unsupported sample precision {}", p[0])));
    }
    let height = u16::from_be_bytes([p[1], p[2]]);
    let width = u16::from_be_bytes([p[3], p[4]]);
    let nf = usize::from(p[5]);
    if p.len() != 6 + 3 * nf {
        return Err(Error::malformed(offset, "SOF length does not match component count"));
    }
    if !matches!(nf, 1 | 3) {
        return Err(Error::malformed(offset, format!("unsupported component count {nf}")));
    }
    let mut components = Vec::with_capacity(nf);
    for c in p[6..].chunks_exact(3) {
        let spec = ComponentSpec {
            component_id: c[0],
            h_sampling: c[1] >> 4,
            v_sampling: c[1] & 0x0F,
            quant_table_id: c[2],
            dc_table_id: 0,
            ac_table_id: 0,
        };
        check_sampling(&spec)?;
        if spec.quant_table_id > 3 {
            return Err(Error::malformed(offset, "quantization table id > 3"));
        }
        components.push(spec);
    }
    Ok(Frame {
        components,
        width,
        height,
    })
}

fn parse_dht(
    p: &[u8],
    offset: usize,
    dc: &mut [Option<HuffmanSpec>; 4],
    ac: &mut [Option<HuffmanSpec>; 4],
) -> Result<()> {
    let mut rest = p;
    while !rest.is_empty() {
        if rest.len() < 17 {
            return Err(Error::malformed(offset, "DHT table truncated"));
        }
        let class = rest[0] >> 4;
        let id = usize::from(rest[0] & 0x0F);
        if class > 1 || id > 3 {
            return Err(Error::malformed(offset, "invalid DHT class/id"));
        }
        let mut counts = [0u8; 16];
        counts.copy_from_slice(&rest[1..17]);
        let total: usize = counts.iter().map(|&c| usize::from(c)).sum();
        let symbols = rest
            .get(17..17 + total)
            .ok_or_else(|| Error::malformed(offset, "DHT symbols truncated"))?
            .to_vec();
        let spec = HuffmanSpec::new(counts, symbols).map_err(|e| match e {
            Error::MalformedSegment { reason, .. } => Error::MalformedSegment { offset, reason },
            other => other,
        })?;
        if class == 0 {
            dc[id] = Some(spec);
        } else {
            ac[id] = Some(spec);
        }
        rest = &rest[17 + total..];
    }
    Ok(())
}

fn parse_dqt(p: &[u8], offset: usize, tables: &mut [Option<QuantTable>; 4]) -> Result<()> {
    let mut rest = p;
    while !rest.is_empty() {
        let precision = rest[0] >> 4;
        let id = usize::from(rest[0] & 0x0F);
        if precision > 1 || id > 3 {
            return Err(Error::malformed(offset, "invalid DQT precision/id"));
        }
        let size = if precision == 0 { 64 } else { 128 };
        let raw = rest
            .get(1..1 + size)
            .ok_or_else(|| Error::malformed(offset, "DQT table truncated"))?;
        let mut values = [0u16; 64];
        for (k, &natural) in ZIGZAG.iter().enumerate() {
            let v = if precision == 0 {
                u16::from(raw[k])
            } else {
                u16::from_be_bytes([raw[2 * k], raw[2 * k + 1]])
            };
            if v == 0 {
                return Err(Error::malformed(offset, "zero quantization entry"));
            }
            values[natural] = v;
        }
        tables[id] = Some(QuantTable { values });
        rest = &rest[1 + size..];
    }
    Ok(())
}

fn parse_sos(p: &[u8], offset: usize, components: &mut [ComponentSpec]) -> Result<()> {
    let ns = usize::from(*p.first().ok_or_else(|| Error::malformed(offset, "empty SOS"))?);
    if p.len() != 1 + 2 * ns + 3 {
        return Err(Error::malformed(offset, "SOS length does not match component count"));
    }
    if ns != components.len() {
        // The frame's components are spread over several scans.
        return Err(Error::MultipleScans { offset });
    }
    for sel in p[1..1 + 2 * ns].chunks_exact(2) {
        let comp = components
            .iter_mut()
            .find(|c| c.component_id == sel[0])
            .ok_or_else(|| Error::malformed(offset, format!("scan references unknown component {}", sel[0])))?;
        comp.dc_table_id = sel[1] >> 4;
        comp.ac_table_id = sel[1] & 0x0F;
    }
    let (ss, se, a) = (p[1 + 2 * ns], p[2 + 2 * ns], p[3 + 2 * ns]);
    if ss != 0 || se != 63 || a != 0 {
        return Err(Error::malformed(offset, "spectral selection is not sequential"));
    }
    Ok(())
}

/// End of the entropy-coded data starting at `start`: the first marker that
/// is neither a stuffed zero nor a restart marker, or the end of the buffer.
/// A second SOS after it means a multi-scan file, which is rejected.
fn find_scan_end(bytes: &[u8], start: usize) -> Result<usize> {
    let mut i = start;
    let end = loop {
        if i + 1 >= bytes.len() {
            break bytes.len();
        }
        if bytes[i] != 0xFF {
            i += 1;
            continue;
        }
        match bytes[i + 1] {
            0x00 => i += 2,
            0xFF => i += 1,
            m if marker::is_rst(m) => i += 2,
            _ => break i,
        }
    };

    // Anything after the scan must not start another scan.
    let mut pos = end;
    while pos + 1 < bytes.len() {
        match marker::read_segment(bytes, pos) {
            Ok((seg, next)) => match seg.marker() {
                marker::EOI => break,
                marker::SOS => return Err(Error::MultipleScans { offset: seg.offset }),
                _ => pos = next,
            },
            Err(_) => break,
        }
    }
    Ok(end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sof0(width: u16, height: u16, comps: &[(u8, u8, u8)]) -> Vec<u8> {
        let mut p = vec![8];
        p.extend_from_slice(&height.to_be_bytes());
        p.extend_from_slice(&width.to_be_bytes());
        p.push(comps.len() as u8);
        for &(id, hv, tq) in comps {
            p.extend_from_slice(&[id, hv, tq]);
        }
        seg(marker::SOF0, &p)
    }

    fn seg(m: u8, payload: &[u8]) -> Vec<u8> {
        MarkerSegment {
            marker_code: 0xFF00 | u16::from(m),
            payload: payload.to_vec(),
            offset: 0,
        }
        .to_bytes()
    }

    fn dqt(id: u8) -> Vec<u8> {
        let mut p = vec![id];
        p.extend_from_slice(&[1u8; 64]);
        seg(marker::DQT, &p)
    }

    fn dht(class: u8, id: u8) -> Vec<u8> {
        // One 1-bit code for symbol 0.
        let mut p = vec![(class << 4) | id, 1];
        p.extend_from_slice(&[0u8; 15]);
        p.push(0);
        seg(marker::DHT, &p)
    }

    fn sos(comps: &[(u8, u8)]) -> Vec<u8> {
        let mut p = vec![comps.len() as u8];
        for &(id, t) in comps {
            p.extend_from_slice(&[id, t]);
        }
        p.extend_from_slice(&[0, 63, 0]);
        seg(marker::SOS, &p)
    }

    fn gray_file(width: u16, height: u16, scan: &[u8]) -> Vec<u8> {
        let mut f = vec![0xFF, 0xD8];
        f.extend(seg(0xE0, b"JFIF\0\x01\x01\0\0\x01\0\x01\0\0"));
        f.extend(dqt(0));
        f.extend(sof0(width, height, &[(1, 0x11, 0)]));
        f.extend(dht(0, 0));
        f.extend(dht(1, 0));
        f.extend(sos(&[(1, 0x00)]));
        f.extend_from_slice(scan);
        f.extend_from_slice(&[0xFF, 0xD9]);
        f
    }

    #[test]
    fn scan_range_stops_before_eoi() {
        let scan = [0x12, 0xFF, 0x00, 0x34, 0xFF, 0xD3, 0x56];
        let f = gray_file(375, 500, &scan);
        let ctx = parse_stream(&f).unwrap();
        assert_eq!(ctx.scan(&f), &scan);
        assert_eq!(ctx.scan_data.end, f.len() - 2);
        assert_eq!(ctx.declared_width, Some(375));
        assert_eq!(ctx.declared_height, Some(500));
        assert_eq!(ctx.mcu_width(), 8);
    }

    #[test]
    fn zero_width_means_absent() {
        let f = gray_file(0, 0, &[0]);
        let ctx = parse_stream(&f).unwrap();
        assert_eq!(ctx.declared_width, None);
        assert_eq!(ctx.declared_height, None);
    }

    #[test]
    fn missing_soi() {
        let f = gray_file(8, 8, &[0]);
        assert!(matches!(parse_stream(&f[2..]), Err(Error::MissingSoi)));
        let opts = ParseOptions { allow_headerless: true };
        assert!(matches!(
            parse_stream_with(&f[2..], opts),
            Err(Error::HeaderlessFragment)
        ));
    }

    #[test]
    fn progressive_rejected() {
        let mut f = gray_file(8, 8, &[0]);
        let sof_at = f.windows(2).position(|w| w == [0xFF, 0xC0]).unwrap();
        f[sof_at + 1] = marker::SOF2;
        assert!(matches!(
            parse_stream(&f),
            Err(Error::UnsupportedMarker { marker: 0xC2, offset }) if offset == sof_at
        ));
    }

    #[test]
    fn unresolved_table() {
        let mut f = vec![0xFF, 0xD8];
        f.extend(dqt(0));
        f.extend(sof0(16, 16, &[(1, 0x11, 0)]));
        f.extend(dht(0, 0));
        f.extend(sos(&[(1, 0x00)]));
        f.extend_from_slice(&[0, 0xFF, 0xD9]);
        assert!(matches!(
            parse_stream(&f),
            Err(Error::UnresolvedTableReference { kind: "AC Huffman", id: 0, .. })
        ));
    }

    #[test]
    fn bad_sampling_rejected() {
        let mut f = vec![0xFF, 0xD8];
        f.extend(dqt(0));
        f.extend(sof0(16, 16, &[(1, 0x41, 0), (2, 0x11, 0), (3, 0x11, 0)]));
        assert!(matches!(
            parse_stream(&f),
            Err(Error::UnsupportedSampling { h: 4, v: 1, .. })
        ));
    }

    #[test]
    fn second_scan_rejected() {
        let mut f = gray_file(8, 8, &[0]);
        f.truncate(f.len() - 2);
        f.extend(sos(&[(1, 0x00)]));
        f.extend_from_slice(&[0, 0xFF, 0xD9]);
        assert!(matches!(parse_stream(&f), Err(Error::MultipleScans { .. })));
    }

    #[test]
    fn overrunning_length() {
        let mut f = gray_file(8, 8, &[0]);
        f.truncate(30);
        assert!(matches!(parse_stream(&f), Err(Error::MalformedSegment { .. })));
    }

    #[test]
    fn strip_zeroes_only_dimensions() {
        let f = gray_file(512, 64, &[1, 2, 3]);
        let s = strip_dimensions(&f).unwrap();
        assert_eq!(s.len(), f.len());
        let ctx = parse_stream(&s).unwrap();
        assert_eq!(ctx.declared_width, None);
        let diff: Vec<usize> = (0..f.len()).filter(|&i| f[i] != s[i]).collect();
        assert!(diff.len() <= 4);
        assert_eq!(strip_dimensions(&s).unwrap(), s);
    }

    #[test]
    fn segments_round_trip() {
        let f = gray_file(24, 16, &[9]);
        for seg in header_segments(&f).unwrap() {
            assert_eq!(seg.to_bytes(), &f[seg.offset..seg.offset + seg.encoded_len()]);
        }
    }
}
