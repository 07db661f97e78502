//! Interleaved 8-bit rasters and binary netpbm (P5/P6) I/O.

use std::io::{self, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// 1 (gray) or 3 (interleaved color).
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    pub fn crop(&self, width: usize, height: usize) -> Raster {
        let width = width.min(self.width);
        let height = height.min(self.height);
        let mut data = Vec::with_capacity(width * height * self.channels);
        for y in 0..height {
            let start = y * self.width * self.channels;
            data.extend_from_slice(&self.data[start..start + width * self.channels]);
        }
        Raster {
            width,
            height,
            channels: self.channels,
            data,
        }
    }

    /// Single channel `c` as a gray raster.
    pub fn channel(&self, c: usize) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.data.iter().skip(c).step_by(self.channels).copied().collect(),
        }
    }

    /// Largest absolute per-sample difference; `None` if shapes differ.
    pub fn max_abs_diff(&self, other: &Raster) -> Option<u8> {
        if (self.width, self.height, self.channels) != (other.width, other.height, other.channels) {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.abs_diff(*b))
                .max()
                .unwrap_or(0),
        )
    }

    /// Writes P5 for one channel, P6 for three. Header is `P? W H 255\n`
    /// with single-space separators and no comments.
    pub fn write_pnm<W: Write>(&self, mut w: W) -> io::Result<()> {
        let magic = match self.channels {
            1 => "P5",
            3 => "P6",
            c => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidInput,
                    format!("cannot write {c}-channel raster as netpbm"),
                ))
            }
        };
        write!(w, "{magic}\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)
    }

    pub fn to_pnm_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() + 20);
        self.write_pnm(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Parses binary P5/P6 with maxval 255 (comments allowed in the header).
    pub fn read_pnm(bytes: &[u8]) -> Result<Raster> {
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::InvalidPnm("truncated header".into()));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::InvalidPnm("non-ASCII header".into()))?);
        }
        // Exactly one whitespace byte separates the header from the data.
        pos += 1;
        let channels = match fields[0] {
            "P5" => 1,
            "P6" => 3,
            m => return Err(Error::InvalidPnm(format!("unsupported magic {m}"))),
        };
        let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::InvalidPnm(format!("bad number {s:?}")));
        let (width, height, maxval) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
        if maxval != 255 {
            return Err(Error::InvalidPnm(format!("maxval {maxval} unsupported")));
        }
        let len = width * height * channels;
        let data = bytes
            .get(pos..pos + len)
            .ok_or_else(|| Error::InvalidPnm("truncated pixel data".into()))?
            .to_vec();
        Ok(Raster {
            width,
            height,
            channels,
            data,
        })
    }
}

/// JFIF YCbCr → RGB for one pixel.
pub fn ycbcr_to_rgb(y: u8, cb: u8, cr: u8) -> [u8; 3] {
    let y = f64::from(y);
    let cb = f64::from(cb) - 128.0;
    let cr = f64::from(cr) - 128.0;
    let r = y + 1.402 * cr;
    let g = y - 0.344136 * cb - 0.714136 * cr;
    let b = y + 1.772 * cb;
    [clamp_u8(r), clamp_u8(g), clamp_u8(b)]
}

/// JFIF RGB → YCbCr, unrounded.
pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> [f64; 3] {
    [
        0.299 * r + 0.587 * g + 0.114 * b,
        -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0,
        0.5 * r - 0.418688 * g - 0.081312 * b + 128.0,
    ]
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_golden_bytes() {
        let r = Raster {
            width: 2,
            height: 2,
            channels: 1,
            data: vec![0, 64, 128, 255],
        };
        assert_eq!(r.to_pnm_bytes(), b"P5\n2 2\n255\n\x00\x40\x80\xff");
    }

    #[test]
    fn ppm_golden_bytes() {
        let r = Raster {
            width: 1,
            height: 2,
            channels: 3,
            data: vec![1, 2, 3, 4, 5, 6],
        };
        assert_eq!(r.to_pnm_bytes(), b"P6\n1 2\n255\n\x01\x02\x03\x04\x05\x06");
    }

    #[test]
    fn read_accepts_comments() {
        let bytes = b"P5 # made by hand\n3 1\n# max\n255\n\x01\x02\x03";
        let r = Raster::read_pnm(bytes).unwrap();
        assert_eq!((r.width, r.height, r.channels), (3, 1, 1));
        assert_eq!(r.data, vec![1, 2, 3]);
    }

    #[test]
    fn gray_is_fixed_point_of_color_transform() {
        for v in [0u8, 17, 128, 255] {
            assert_eq!(ycbcr_to_rgb(v, 128, 128), [v, v, v]);
            let [y, cb, cr] = rgb_to_ycbcr(f64::from(v), f64::from(v), f64::from(v));
            assert!((y - f64::from(v)).abs() < 1e-9);
            assert!((cb - 128.0).abs() < 1e-9 && (cr - 128.0).abs() < 1e-9);
        }
    }

    #[test]
    fn crop_and_channel() {
        let mut r = Raster::filled(4, 3, 3, 0);
        r.pixel_mut(1, 1).copy_from_slice(&[9, 8, 7]);
        let c = r.crop(2, 2);
        assert_eq!(c.pixel(1, 1), &[9, 8, 7]);
        assert_eq!(c.channel(2).pixel(1, 1), &[7]);
        assert_eq!(r.max_abs_diff(&c), None);
    }
}
