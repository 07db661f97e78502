//! Minimal baseline JPEG writer: standard Huffman tables, IJG-scaled
//! quantization, optional restart markers. Used to synthesize test corpora
//! and coefficient-exact fixtures.

use crate::bits::BitWriter;
use crate::huffman::{self, HuffmanEncoder};
use crate::idct::forward_dct;
use crate::marker;
use crate::parser::{HuffmanSpec, ZIGZAG};
use crate::raster::{rgb_to_ycbcr, Raster};

/// Chroma subsampling for three-component output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsampling {
    /// 4:4:4, K = 8.
    None,
    /// 4:2:2 (luma 2×1), K = 16.
    Horizontal,
    /// 4:2:0 (luma 2×2), K = 16.
    Both,
}

impl Subsampling {
    pub fn luma_factors(self) -> (u8, u8) {
        match self {
            Subsampling::None => (1, 1),
            Subsampling::Horizontal => (2, 1),
            Subsampling::Both => (2, 2),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EncoderConfig {
    pub quality: u8,
    pub subsampling: Subsampling,
    pub restart_interval: u16,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            quality: 90,
            subsampling: Subsampling::Both,
            restart_interval: 0,
        }
    }
}

const STD_LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, 12, 12, 14, 19, 26, 58, 60, 55, 14, 13, 16, 24, 40, 57, 69,
    56, 14, 17, 22, 29, 51, 87, 80, 62, 18, 22, 37, 56, 68, 109, 103, 77, 24, 35, 55, 64, 81, 104,
    113, 92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
];

const STD_CHROMA_QUANT: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99, 24, 26, 56, 99, 99, 99, 99,
    99, 47, 66, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
];

/// IJG quality scaling of a base table (natural order).
pub fn scaled_quant(base: &[u16; 64], quality: u8) -> [u16; 64] {
    let q = u32::from(quality.clamp(1, 100));
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    std::array::from_fn(|i| ((u32::from(base[i]) * scale + 50) / 100).clamp(1, 255) as u16)
}

/// A frame described directly by its quantized coefficients.
#[derive(Debug, Clone)]
pub struct CoefficientImage {
    /// Written to SOF0 as-is; 0 leaves the field empty.
    pub width: u16,
    pub height: u16,
    /// (h, v) per component; one or three components.
    pub sampling: Vec<(u8, u8)>,
    /// Quantization tables (natural order). Only the first two are written:
    /// component 0 uses table 0 and every later component uses table 1.
    pub quant: Vec<[u16; 64]>,
    /// Quantized blocks per MCU, component order, row-major inside each
    /// component, natural coefficient order.
    pub mcus: Vec<Vec<[i32; 64]>>,
    pub restart_interval: u16,
}

struct TableSet {
    dc: HuffmanSpec,
    ac: HuffmanSpec,
}

impl CoefficientImage {
    pub fn to_jpeg(&self) -> Vec<u8> {
        let c = self.sampling.len();
        assert!(c == 1 || c == 3, "one or three components");
        let tables = [
            TableSet {
                dc: huffman::std_dc_luminance(),
                ac: huffman::std_ac_luminance(),
            },
            TableSet {
                dc: huffman::std_dc_chrominance(),
                ac: huffman::std_ac_chrominance(),
            },
        ];
        let table_of = |ci: usize| usize::from(ci > 0);

        let mut out = vec![0xFF, marker::SOI];
        segment(&mut out, marker::APP0, b"JFIF\0\x01\x01\0\0\x01\0\x01\0\0");

        let mut dqt = Vec::new();
        for (ci, q) in self.quant.iter().enumerate().take(c.min(2)) {
            dqt.push(ci as u8);
            dqt.extend(ZIGZAG.iter().map(|&n| q[n].min(255) as u8));
        }
        segment(&mut out, marker::DQT, &dqt);

        let mut sof = vec![8];
        sof.extend_from_slice(&self.height.to_be_bytes());
        sof.extend_from_slice(&self.width.to_be_bytes());
        sof.push(c as u8);
        for (ci, &(h, v)) in self.sampling.iter().enumerate() {
            sof.extend_from_slice(&[ci as u8 + 1, (h << 4) | v, table_of(ci) as u8]);
        }
        segment(&mut out, marker::SOF0, &sof);

        let mut dht = Vec::new();
        for (id, t) in tables.iter().enumerate().take(if c == 1 { 1 } else { 2 }) {
            for (class, spec) in [(0u8, &t.dc), (1u8, &t.ac)] {
                dht.push((class << 4) | id as u8);
                dht.extend_from_slice(&spec.counts);
                dht.extend_from_slice(&spec.symbols);
            }
        }
        segment(&mut out, marker::DHT, &dht);

        if self.restart_interval > 0 {
            segment(&mut out, marker::DRI, &self.restart_interval.to_be_bytes());
        }

        let mut sos = vec![c as u8];
        for ci in 0..c {
            let t = table_of(ci) as u8;
            sos.extend_from_slice(&[ci as u8 + 1, (t << 4) | t]);
        }
        sos.extend_from_slice(&[0, 63, 0]);
        segment(&mut out, marker::SOS, &sos);

        let encoders: Vec<(HuffmanEncoder, HuffmanEncoder)> = tables
            .iter()
            .map(|t| (HuffmanEncoder::new(&t.dc), HuffmanEncoder::new(&t.ac)))
            .collect();
        let blocks_per: Vec<usize> = self
            .sampling
            .iter()
            .map(|&(h, v)| if c == 1 { 1 } else { usize::from(h * v) })
            .collect();

        let mut w = BitWriter::new();
        let mut pred = vec![0i32; c];
        let interval = usize::from(self.restart_interval);
        for (m, mcu) in self.mcus.iter().enumerate() {
            if interval > 0 && m > 0 && m % interval == 0 {
                w.write_marker(marker::RST0 + ((m / interval - 1) % 8) as u8);
                pred.fill(0);
            }
            let mut b = 0;
            for ci in 0..c {
                let (dc_enc, ac_enc) = &encoders[table_of(ci)];
                for _ in 0..blocks_per[ci] {
                    let block = &mcu[b];
                    b += 1;
                    let diff = block[0] - pred[ci];
                    pred[ci] = block[0];
                    write_value(&mut w, dc_enc, 0, diff);
                    let mut run = 0u8;
                    for &pos in &ZIGZAG[1..] {
                        let v = block[pos];
                        if v == 0 {
                            run += 1;
                            continue;
                        }
                        while run >= 16 {
                            let (code, len) = ac_enc.code(0xF0);
                            w.write_bits(u32::from(code), u32::from(len));
                            run -= 16;
                        }
                        write_value(&mut w, ac_enc, run, v);
                        run = 0;
                    }
                    if run > 0 {
                        let (code, len) = ac_enc.code(0x00);
                        w.write_bits(u32::from(code), u32::from(len));
                    }
                }
            }
        }
        out.extend(w.into_bytes());
        out.extend_from_slice(&[0xFF, marker::EOI]);
        out
    }
}

fn write_value(w: &mut BitWriter, enc: &HuffmanEncoder, run: u8, value: i32) {
    let size = 32 - value.unsigned_abs().leading_zeros();
    let (code, len) = enc.code((run << 4) | size as u8);
    w.write_bits(u32::from(code), u32::from(len));
    if size > 0 {
        let bits = if value < 0 { value - 1 } else { value };
        w.write_bits(bits as u32 & ((1 << size) - 1), size);
    }
}

fn segment(out: &mut Vec<u8>, m: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, m]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

/// Encodes a gray or RGB raster.
pub fn encode(raster: &Raster, config: &EncoderConfig) -> Vec<u8> {
    to_coefficients(raster, config).to_jpeg()
}

/// Forward path: color conversion, chroma averaging, FDCT, quantization.
pub fn to_coefficients(raster: &Raster, config: &EncoderConfig) -> CoefficientImage {
    let (w, h) = (raster.width, raster.height);
    let gray = raster.channels == 1;
    let (lh, lv) = if gray { (1, 1) } else { config.subsampling.luma_factors() };
    let (mcu_w, mcu_h) = (8 * usize::from(lh), 8 * usize::from(lv));
    let (mx, my) = (w.div_ceil(mcu_w), h.div_ceil(mcu_h));
    let (pw, ph) = (mx * mcu_w, my * mcu_h);

    // Full-resolution planes padded by edge replication.
    let nplanes = if gray { 1 } else { 3 };
    let mut planes = vec![vec![0f64; pw * ph]; nplanes];
    for y in 0..ph {
        for x in 0..pw {
            let px = raster.pixel(x.min(w - 1), y.min(h - 1));
            let i = y * pw + x;
            if gray {
                planes[0][i] = f64::from(px[0]);
            } else {
                let ycc = rgb_to_ycbcr(f64::from(px[0]), f64::from(px[1]), f64::from(px[2]));
                for c in 0..3 {
                    planes[c][i] = ycc[c];
                }
            }
        }
    }

    let sampling: Vec<(u8, u8)> = if gray {
        vec![(1, 1)]
    } else {
        vec![(lh, lv), (1, 1), (1, 1)]
    };
    let luma_q = scaled_quant(&STD_LUMA_QUANT, config.quality);
    let chroma_q = scaled_quant(&STD_CHROMA_QUANT, config.quality);
    let quant: Vec<[u16; 64]> = (0..nplanes).map(|c| if c == 0 { luma_q } else { chroma_q }).collect();

    let mut mcus = Vec::with_capacity(mx * my);
    let mut samples = [0f64; 64];
    let mut coeffs = [0f64; 64];
    for row in 0..my {
        for col in 0..mx {
            let mut blocks = Vec::new();
            for (c, &(h_c, v_c)) in sampling.iter().enumerate() {
                let (sx, sy) = (usize::from(lh / h_c), usize::from(lv / v_c));
                for by in 0..usize::from(v_c) {
                    for bx in 0..usize::from(h_c) {
                        for y in 0..8 {
                            for x in 0..8 {
                                // Box-average the sx×sy source pixels behind this sample.
                                let x0 = col * mcu_w + (bx * 8 + x) * sx;
                                let y0 = row * mcu_h + (by * 8 + y) * sy;
                                let mut acc = 0.0;
                                for dy in 0..sy {
                                    for dx in 0..sx {
                                        acc += planes[c][(y0 + dy) * pw + x0 + dx];
                                    }
                                }
                                samples[y * 8 + x] = acc / (sx * sy) as f64 - 128.0;
                            }
                        }
                        forward_dct(&samples, &mut coeffs);
                        let q = &quant[c];
                        blocks.push(std::array::from_fn(|i| (coeffs[i] / f64::from(q[i])).round() as i32));
                    }
                }
            }
            mcus.push(blocks);
        }
    }

    CoefficientImage {
        width: w as u16,
        height: h as u16,
        sampling,
        quant,
        mcus,
        restart_interval: config.restart_interval,
    }
}
