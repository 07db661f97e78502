//! Seeded synthetic corpora with known ground-truth widths.
//!
//! Smooth images (low-frequency fields plus bounded noise) have the strong
//! vertical local similarity the estimator relies on. Periodic images are
//! stripes whose period divides the MCU height, so all MCUs decode to
//! identical pixels and vertical adjacency becomes ambiguous.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::encoder::{encode, EncoderConfig, Subsampling};
use crate::error::{Error, Result};
use crate::raster::Raster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentClass {
    Smooth,
    Periodic,
}

impl ContentClass {
    fn prefix(self) -> &'static str {
        match self {
            ContentClass::Smooth => "smooth",
            ContentClass::Periodic => "periodic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticImage {
    pub name: String,
    pub class: ContentClass,
    pub width: u32,
    pub height: u32,
    pub mcu_width: u32,
    pub bytes: Vec<u8>,
}

/// Height range used when the caller only constrains widths.
pub const DEFAULT_HEIGHTS: RangeInclusive<u32> = 128..=384;

pub fn generate_synthetic_corpus(count: usize, width_range: RangeInclusive<u32>, seed: u64) -> Result<Vec<SyntheticImage>> {
    generate(ContentClass::Smooth, count, width_range, DEFAULT_HEIGHTS, seed)
}

pub fn generate_periodic_corpus(count: usize, width_range: RangeInclusive<u32>, seed: u64) -> Result<Vec<SyntheticImage>> {
    generate(ContentClass::Periodic, count, width_range, DEFAULT_HEIGHTS, seed)
}

pub fn generate(
    class: ContentClass,
    count: usize,
    width_range: RangeInclusive<u32>,
    height_range: RangeInclusive<u32>,
    seed: u64,
) -> Result<Vec<SyntheticImage>> {
    if count == 0 {
        return Err(Error::InvalidRange("count must be at least 1".into()));
    }
    for (what, r) in [("width", &width_range), ("height", &height_range)] {
        if r.start() > r.end() || *r.start() < 16 || *r.end() > 65535 {
            return Err(Error::InvalidRange(format!(
                "{what} range {}..={} must lie within 16..=65535",
                r.start(),
                r.end()
            )));
        }
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..count).map(|_| master.gen()).collect();
    Ok(seeds
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let width = rng.gen_range(width_range.clone());
            let height = rng.gen_range(height_range.clone());
            let layout = match rng.gen_range(0..4) {
                0 => Layout::Gray,
                1 => Layout::Color(Subsampling::None),
                2 => Layout::Color(Subsampling::Horizontal),
                _ => Layout::Color(Subsampling::Both),
            };
            let raster = match class {
                ContentClass::Smooth => smooth_raster(&mut rng, width as usize, height as usize, layout),
                ContentClass::Periodic => periodic_raster(&mut rng, width as usize, height as usize, layout),
            };
            let config = EncoderConfig {
                quality: 90,
                subsampling: layout.subsampling(),
                restart_interval: 0,
            };
            SyntheticImage {
                name: format!("{}_{i:04}.jpg", class.prefix()),
                class,
                width,
                height,
                mcu_width: layout.mcu_width(),
                bytes: encode(&raster, &config),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy)]
enum Layout {
    Gray,
    Color(Subsampling),
}

impl Layout {
    fn channels(self) -> usize {
        match self {
            Layout::Gray => 1,
            Layout::Color(_) => 3,
        }
    }

    fn subsampling(self) -> Subsampling {
        match self {
            Layout::Gray => Subsampling::None,
            Layout::Color(s) => s,
        }
    }

    fn mcu_width(self) -> u32 {
        8 * u32::from(self.subsampling().luma_factors().0)
    }

    fn mcu_height(self) -> usize {
        8 * usize::from(self.subsampling().luma_factors().1)
    }
}

/// A sum of a few random plane waves with wavelengths on the order of the
/// image size.
struct Field {
    base: f64,
    waves: Vec<(f64, f64, f64, f64)>,
}

impl Field {
    fn random(rng: &mut ChaCha8Rng, width: usize, height: usize, amplitude: f64) -> Self {
        let waves = (0..4)
            .map(|_| {
                let fx = rng.gen_range(-3.0..3.0) / width as f64;
                let fy = rng.gen_range(0.3..3.0) / height as f64;
                let amp = rng.gen_range(0.3..1.0) * amplitude;
                (fx, fy, rng.gen_range(0.0..TAU), amp)
            })
            .collect();
        Self {
            base: rng.gen_range(70.0..185.0),
            waves,
        }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        let (x, y) = (x as f64, y as f64);
        self.base
            + self
                .waves
                .iter()
                .map(|&(fx, fy, phase, amp)| amp * (TAU * (fx * x + fy * y) + phase).sin())
                .sum::<f64>()
    }
}

fn smooth_raster(rng: &mut ChaCha8Rng, width: usize, height: usize, layout: Layout) -> Raster {
    let channels = layout.channels();
    let fields: Vec<Field> = (0..channels).map(|_| Field::random(rng, width, height, 35.0)).collect();
    let noise = rng.gen_range(1.0..4.0);
    let mut raster = Raster::filled(width, height, channels, 0);
    for y in 0..height {
        for x in 0..width {
            for (c, f) in fields.iter().enumerate() {
                let v = f.at(x, y) + rng.gen_range(-noise..=noise);
                raster.pixel_mut(x, y)[c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    raster
}

/// Horizontal stripes whose vertical period divides the MCU height. Every
/// MCU, including the edge-padded ones, decodes to the same pixels.
fn periodic_raster(rng: &mut ChaCha8Rng, width: usize, height: usize, layout: Layout) -> Raster {
    let channels = layout.channels();
    let mh = layout.mcu_height();
    let periods: Vec<usize> = [2, 4, 8, 16].into_iter().filter(|p| mh.is_multiple_of(*p)).collect();
    let py = periods[rng.gen_range(0..periods.len())];
    let profile: Vec<Vec<u8>> = (0..channels)
        .map(|_| {
            let amp = rng.gen_range(20.0..60.0);
            let phase = rng.gen_range(0.0..TAU);
            let base = rng.gen_range(90.0..165.0);
            (0..py)
                .map(|y| {
                    let v = base + amp * (TAU * y as f64 / py as f64 + phase).sin();
                    v.round().clamp(0.0, 255.0) as u8
                })
                .collect()
        })
        .collect();
    let mut raster = Raster::filled(width, height, channels, 0);
    for y in 0..height {
        for x in 0..width {
            for (c, column) in profile.iter().enumerate() {
                raster.pixel_mut(x, y)[c] = column[y % py];
            }
        }
    }
    raster
}
