//! Bit-level access to entropy-coded scan data.
//!
//! Scan bytes carry 0xFF00 stuffing; any other 0xFF-prefixed pair is a
//! marker. The reader stops feeding data bits at a marker and leaves it
//! pending so the decoder can decide whether it is a restart point.

use crate::marker;

pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u64,
    nbits: u32,
    pending_marker: Option<(u8, usize)>,
    consumed: u64,
}

/// Result of moving to a restart point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restart {
    /// Found restart marker `marker` after skipping `skipped` data bytes.
    Marker { marker: u8, skipped: usize },
    /// The scan ended (EOI, another marker, or end of data) first.
    End { skipped: usize },
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self {
            data,
            pos: 0,
            acc: 0,
            nbits: 0,
            pending_marker: None,
            consumed: 0,
        }
    }

    fn fill(&mut self) {
        while self.nbits <= 56 && self.pending_marker.is_none() && self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b == 0xFF {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => self.pos += 2,
                    Some(0xFF) => {
                        self.pos += 1;
                        continue;
                    }
                    Some(&m) => {
                        self.pending_marker = Some((m, self.pos));
                        return;
                    }
                    None => {
                        // Lone trailing 0xFF: treat as truncated data.
                        self.pos += 1;
                        return;
                    }
                }
            } else {
                self.pos += 1;
            }
            self.acc |= u64::from(b) << (56 - self.nbits);
            self.nbits += 8;
        }
    }

    /// Next `n` (≤ 16) bits, zero-padded past the available data, together
    /// with how many real bits are buffered.
    pub fn peek(&mut self, n: u32) -> (u32, u32) {
        if self.nbits < n {
            self.fill();
        }
        ((self.acc >> (64 - n)) as u32, self.nbits)
    }

    pub fn consume(&mut self, n: u32) {
        debug_assert!(n <= self.nbits);
        self.acc <<= n;
        self.nbits -= n;
        self.consumed += u64::from(n);
    }

    /// Total data bits consumed so far.
    pub fn bits_consumed(&self) -> u64 {
        self.consumed
    }

    pub fn read_bits(&mut self, n: u32) -> Option<u32> {
        if n == 0 {
            return Some(0);
        }
        let (v, avail) = self.peek(n);
        if avail < n {
            return None;
        }
        self.consume(n);
        Some(v)
    }

    /// Reads `size` magnitude bits and sign-extends them (JPEG EXTEND).
    pub fn receive_extend(&mut self, size: u32) -> Option<i32> {
        if size == 0 {
            return Some(0);
        }
        let v = self.read_bits(size)? as i32;
        Some(if v < (1 << (size - 1)) {
            v - (1 << size) + 1
        } else {
            v
        })
    }

    /// Approximate byte offset of the next unread bit within the scan.
    pub fn position(&self) -> usize {
        self.pos.saturating_sub((self.nbits / 8) as usize)
    }

    pub fn pending_marker(&self) -> Option<(u8, usize)> {
        self.pending_marker
    }

    /// True once no data bits remain and nothing more can be read.
    pub fn is_exhausted(&mut self) -> bool {
        self.fill();
        self.nbits == 0
    }

    /// Drops buffered bits (byte-alignment padding) and moves past the next
    /// restart marker.
    pub fn sync_restart(&mut self) -> Restart {
        let leftover_bytes = (self.nbits / 8) as usize;
        self.acc = 0;
        self.nbits = 0;
        let mut skipped = leftover_bytes;
        loop {
            match self.pending_marker {
                Some((m, at)) if marker::is_rst(m) => {
                    self.pending_marker = None;
                    self.pos = at + 2;
                    return Restart::Marker { marker: m, skipped };
                }
                Some(_) => return Restart::End { skipped },
                None => {}
            }
            // Scan forward for the next marker.
            while self.pos < self.data.len() {
                if self.data[self.pos] == 0xFF {
                    match self.data.get(self.pos + 1) {
                        Some(0x00) => {
                            self.pos += 2;
                            skipped += 1;
                        }
                        Some(0xFF) => self.pos += 1,
                        Some(&m) => {
                            self.pending_marker = Some((m, self.pos));
                            break;
                        }
                        None => self.pos += 1,
                    }
                } else {
                    self.pos += 1;
                    skipped += 1;
                }
            }
            if self.pending_marker.is_none() {
                return Restart::End { skipped };
            }
        }
    }
}

/// MSB-first bit writer with 0xFF byte stuffing.
#[derive(Default)]
pub struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write_bits(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 24);
        if n == 0 {
            return;
        }
        self.acc = (self.acc << n) | (value & ((1 << n) - 1));
        self.nbits += n;
        while self.nbits >= 8 {
            let b = (self.acc >> (self.nbits - 8)) as u8;
            self.push(b);
            self.nbits -= 8;
        }
        self.acc &= (1 << self.nbits) - 1;
    }

    fn push(&mut self, b: u8) {
        self.out.push(b);
        if b == 0xFF {
            self.out.push(0x00);
        }
    }

    /// Pads the final partial byte with one-bits.
    pub fn flush(&mut self) {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.write_bits((1 << pad) - 1, pad);
        }
    }

    pub fn write_marker(&mut self, m: u8) {
        self.flush();
        self.out.extend_from_slice(&[0xFF, m]);
    }

    pub fn into_bytes(mut self) -> Vec<u8> {
        self.flush();
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stuffed_zero_is_data() {
        let mut r = BitReader::new(&[0xFF, 0x00, 0x80]);
        assert_eq!(r.read_bits(8), Some(0xFF));
        assert_eq!(r.read_bits(1), Some(1));
        assert_eq!(r.read_bits(7), Some(0));
        assert_eq!(r.read_bits(1), None);
    }

    #[test]
    fn marker_stops_data() {
        let mut r = BitReader::new(&[0xAB, 0xFF, 0xD0, 0xCD]);
        assert_eq!(r.read_bits(8), Some(0xAB));
        assert_eq!(r.read_bits(1), None);
        assert_eq!(r.pending_marker(), Some((0xD0, 1)));
        assert_eq!(r.sync_restart(), Restart::Marker { marker: 0xD0, skipped: 0 });
        assert_eq!(r.read_bits(8), Some(0xCD));
    }

    #[test]
    fn sync_skips_extra_bytes() {
        let mut r = BitReader::new(&[0x12, 0x34, 0x56, 0xFF, 0xD3, 0x78]);
        assert_eq!(r.read_bits(4), Some(0x1));
        assert_eq!(r.sync_restart(), Restart::Marker { marker: 0xD3, skipped: 2 });
        assert_eq!(r.read_bits(8), Some(0x78));
    }

    #[test]
    fn receive_extend_signs() {
        // size 3: 000 -> -7, 011 -> -4, 100 -> 4, 111 -> 7
        let mut r = BitReader::new(&[0b0000_1110, 0b0111_1100]);
        assert_eq!(r.receive_extend(3), Some(-7));
        assert_eq!(r.receive_extend(3), Some(-4));
        assert_eq!(r.receive_extend(3), Some(4));
        assert_eq!(r.receive_extend(3), Some(7));
    }

    #[test]
    fn writer_stuffs_and_pads() {
        let mut w = BitWriter::new();
        w.write_bits(0xFF, 8);
        w.write_bits(0b10, 2);
        let bytes = w.into_bytes();
        assert_eq!(bytes, vec![0xFF, 0x00, 0b1011_1111]);
    }

    #[test]
    fn writer_reader_agree() {
        let mut w = BitWriter::new();
        let fields = [(5u32, 3u32), (0x1FF, 9), (0, 1), (0xABCD, 16), (1, 1)];
        for &(v, n) in &fields {
            w.write_bits(v, n);
        }
        let bytes = w.into_bytes();
        let mut r = BitReader::new(&bytes);
        for &(v, n) in &fields {
            assert_eq!(r.read_bits(n), Some(v));
        }
    }
}
