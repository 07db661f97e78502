//! Marker codes and length-delimited marker segments.

use crate::error::{Error, Result};

pub const SOF0: u8 = 0xC0;
pub const SOF1: u8 = 0xC1;
pub const SOF2: u8 = 0xC2;
pub const DHT: u8 = 0xC4;
pub const DAC: u8 = 0xCC;
pub const RST0: u8 = 0xD0;
pub const RST7: u8 = 0xD7;
pub const SOI: u8 = 0xD8;
pub const EOI: u8 = 0xD9;
pub const SOS: u8 = 0xDA;
pub const DQT: u8 = 0xDB;
pub const DNL: u8 = 0xDC;
pub const DRI: u8 = 0xDD;
pub const APP0: u8 = 0xE0;
pub const APP15: u8 = 0xEF;
pub const COM: u8 = 0xFE;
pub const TEM: u8 = 0x01;

pub fn is_rst(marker: u8) -> bool {
    (RST0..=RST7).contains(&marker)
}

/// SOF variants other than baseline and extended-sequential Huffman.
pub fn is_unsupported_frame(marker: u8) -> bool {
    matches!(marker, 0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC8..=0xCB | 0xCD..=0xCF) || marker == DAC
}

/// Markers that stand alone without a length field.
pub fn is_standalone(marker: u8) -> bool {
    marker == SOI || marker == EOI || marker == TEM || is_rst(marker)
}

/// One marker plus its payload as it appeared in the stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerSegment {
    /// Full two-byte code, e.g. `0xFFC0`.
    pub marker_code: u16,
    /// Bytes following the length field (empty for standalone markers).
    pub payload: Vec<u8>,
    /// Position of the marker's leading 0xFF in the stream.
    pub offset: usize,
}

impl MarkerSegment {
    pub fn marker(&self) -> u8 {
        (self.marker_code & 0xFF) as u8
    }

    pub fn has_length(&self) -> bool {
        !is_standalone(self.marker())
    }

    /// Number of bytes the segment occupies in the stream.
    pub fn encoded_len(&self) -> usize {
        if self.has_length() {
            4 + self.payload.len()
        } else {
            2
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.marker_code.to_be_bytes());
        if self.has_length() {
            out.extend_from_slice(&((self.payload.len() + 2) as u16).to_be_bytes());
            out.extend_from_slice(&self.payload);
        }
        out
    }
}

/// Reads the segment whose marker starts at or after `offset`, skipping
/// 0xFF fill bytes. Returns the segment and the offset just past it.
pub fn read_segment(bytes: &[u8], offset: usize) -> Result<(MarkerSegment, usize)> {
    let mut pos = offset;
    if bytes.get(pos) != Some(&0xFF) {
        return Err(Error::malformed(pos, "expected marker"));
    }
    // Fill bytes: any run of 0xFF before the code byte.
    while bytes.get(pos + 1) == Some(&0xFF) {
        pos += 1;
    }
    let marker = match bytes.get(pos + 1) {
        Some(&m) if m != 0x00 => m,
        Some(_) => return Err(Error::malformed(pos, "stuffed zero where marker expected")),
        None => return Err(Error::malformed(pos, "truncated marker")),
    };
    let marker_code = 0xFF00 | u16::from(marker);
    if is_standalone(marker) {
        let seg = MarkerSegment {
            marker_code,
            payload: Vec::new(),
            offset: pos,
        };
        return Ok((seg, pos + 2));
    }
    let len_bytes = bytes
        .get(pos + 2..pos + 4)
        .ok_or_else(|| Error::malformed(pos, "truncated length field"))?;
    let len = usize::from(u16::from_be_bytes([len_bytes[0], len_bytes[1]]));
    if len < 2 {
        return Err(Error::malformed(pos, format!("segment length {len} < 2")));
    }
    let end = pos + 2 + len;
    if end > bytes.len() {
        return Err(Error::malformed(
            pos,
            format!("segment length {len} overruns buffer"),
        ));
    }
    let seg = MarkerSegment {
        marker_code,
        payload: bytes[pos + 4..end].to_vec(),
        offset: pos,
    };
    Ok((seg, end))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standalone_and_length_segments() {
        let bytes = [0xFF, 0xD8, 0xFF, 0xFE, 0x00, 0x04, b'h', b'i', 0xFF, 0xD9];
        let (soi, next) = read_segment(&bytes, 0).unwrap();
        assert_eq!(soi.marker(), SOI);
        assert_eq!(next, 2);
        let (com, next) = read_segment(&bytes, next).unwrap();
        assert_eq!(com.marker_code, 0xFFFE);
        assert_eq!(com.payload, b"hi");
        assert_eq!(com.to_bytes(), &bytes[2..8]);
        let (eoi, _) = read_segment(&bytes, next).unwrap();
        assert_eq!(eoi.marker(), EOI);
    }

    #[test]
    fn fill_bytes_are_skipped() {
        let bytes = [0xFF, 0xFF, 0xFF, 0xD9];
        let (seg, next) = read_segment(&bytes, 0).unwrap();
        assert_eq!(seg.offset, 2);
        assert_eq!(next, 4);
    }

    #[test]
    fn overrun_is_malformed() {
        let bytes = [0xFF, 0xDB, 0x00, 0x40, 0x00];
        assert!(matches!(
            read_segment(&bytes, 0),
            Err(Error::MalformedSegment { offset: 0, .. })
        ));
    }

    #[test]
    fn frame_classification() {
        assert!(!is_unsupported_frame(SOF0));
        assert!(!is_unsupported_frame(SOF1));
        assert!(is_unsupported_frame(SOF2));
        assert!(is_unsupported_frame(0xC9));
        assert!(!is_unsupported_frame(DHT));
    }
}
