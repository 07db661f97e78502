//! Canonical Huffman code construction, decoding and the standard tables
//! used by the synthetic encoder.

use crate::bits::BitReader;
use crate::parser::HuffmanSpec;

const LOOKAHEAD: u32 = 9;

/// Decoding tables for one DHT entry.
pub struct HuffmanDecoder {
    /// (code length, symbol) for every LOOKAHEAD-bit prefix; length 0 = slow path.
    fast: Vec<(u8, u8)>,
    maxcode: [i32; 17],
    valoffset: [i32; 17],
    symbols: Vec<u8>,
}

pub enum DecodeFailure {
    /// Ran out of data bits (marker or end of scan).
    Exhausted,
    /// The bits present match no code.
    NoMatch,
}

impl HuffmanDecoder {
    pub fn new(spec: &HuffmanSpec) -> Self {
        let mut maxcode = [-1i32; 17];
        let mut valoffset = [0i32; 17];
        let mut fast = vec![(0u8, 0u8); 1 << LOOKAHEAD];
        let mut code = 0i32;
        let mut k = 0usize;
        for len in 1..=16usize {
            let count = usize::from(spec.counts[len - 1]);
            if count > 0 {
                valoffset[len] = k as i32 - code;
                for _ in 0..count {
                    if len as u32 <= LOOKAHEAD {
                        let shift = LOOKAHEAD - len as u32;
                        let base = (code as usize) << shift;
                        for e in &mut fast[base..base + (1 << shift)] {
                            *e = (len as u8, spec.symbols[k]);
                        }
                    }
                    code += 1;
                    k += 1;
                }
                maxcode[len] = code - 1;
            }
            code <<= 1;
        }
        Self {
            fast,
            maxcode,
            valoffset,
            symbols: spec.symbols.clone(),
        }
    }

    pub fn decode(&self, reader: &mut BitReader<'_>) -> Result<u8, DecodeFailure> {
        let (bits, avail) = reader.peek(16);
        let (len, sym) = self.fast[(bits >> (16 - LOOKAHEAD)) as usize];
        if len > 0 {
            if u32::from(len) > avail {
                return Err(DecodeFailure::Exhausted);
            }
            reader.consume(u32::from(len));
            return Ok(sym);
        }
        for len in (LOOKAHEAD + 1)..=16 {
            let code = (bits >> (16 - len)) as i32;
            if code <= self.maxcode[len as usize] {
                if len > avail {
                    return Err(DecodeFailure::Exhausted);
                }
                reader.consume(len);
                let idx = (code + self.valoffset[len as usize]) as usize;
                return Ok(self.symbols[idx]);
            }
        }
        if avail < 16 {
            Err(DecodeFailure::Exhausted)
        } else {
            Err(DecodeFailure::NoMatch)
        }
    }
}

/// (code, length) per symbol, for encoding.
pub struct HuffmanEncoder {
    codes: [(u16, u8); 256],
}

impl HuffmanEncoder {
    pub fn new(spec: &HuffmanSpec) -> Self {
        let mut codes = [(0u16, 0u8); 256];
        let mut code = 0u16;
        let mut k = 0;
        for len in 1..=16u8 {
            for _ in 0..spec.counts[usize::from(len) - 1] {
                codes[usize::from(spec.symbols[k])] = (code, len);
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        Self { codes }
    }

    pub fn code(&self, symbol: u8) -> (u16, u8) {
        let c = self.codes[usize::from(symbol)];
        debug_assert!(c.1 > 0, "symbol {symbol:#x} has no code");
        c
    }
}

fn spec(counts: [u8; 16], symbols: &[u8]) -> HuffmanSpec {
    HuffmanSpec::new(counts, symbols.to_vec()).expect("standard table is valid")
}

pub fn std_dc_luminance() -> HuffmanSpec {
    spec(
        [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
        &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    )
}

pub fn std_dc_chrominance() -> HuffmanSpec {
    spec(
        [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
        &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    )
}

pub fn std_ac_luminance() -> HuffmanSpec {
    spec(
        [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d],
        &[
            0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51,
            0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1,
            0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18,
            0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
            0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57,
            0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
            0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92,
            0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
            0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
            0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8,
            0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2,
            0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
        ],
    )
}

pub fn std_ac_chrominance() -> HuffmanSpec {
    spec(
        [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77],
        &[
            0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07,
            0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09,
            0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25,
            0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38,
            0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56,
            0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
            0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
            0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5,
            0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba,
            0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6,
            0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2,
            0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
        ],
    )
}
