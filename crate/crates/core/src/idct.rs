//! 8×8 inverse DCT kernels behind a common trait, selectable by name.
//!
//! Every kernel maps a dequantized coefficient block (natural order) to 64
//! level-shifted, clamped samples. Kernels may differ by at most one unit per
//! sample from the exact transform.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub trait InverseDct: Send + Sync {
    fn name(&self) -> &'static str;

    /// `coeffs` in natural row-major order; writes row-major samples.
    fn inverse(&self, coeffs: &[i32; 64], out: &mut [u8; 64]);
}

pub fn level_shift_clamp(v: f64) -> u8 {
    (v.round() + 128.0).clamp(0.0, 255.0) as u8
}

fn scale(u: usize) -> f64 {
    if u == 0 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0
    }
}

/// `COS[x][u] = C(u) · cos((2x+1)uπ/16)`.
fn basis() -> [[f64; 8]; 8] {
    let mut t = [[0.0; 8]; 8];
    for (x, row) in t.iter_mut().enumerate() {
        for (u, v) in row.iter_mut().enumerate() {
            *v = scale(u) * ((2 * x + 1) as f64 * u as f64 * PI / 16.0).cos();
        }
    }
    t
}

/// Direct evaluation of the 64-term sum for every output sample.
pub struct DirectIdct {
    cos: [[f64; 8]; 8],
}

impl Default for DirectIdct {
    fn default() -> Self {
        Self { cos: basis() }
    }
}

impl InverseDct for DirectIdct {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn inverse(&self, coeffs: &[i32; 64], out: &mut [u8; 64]) {
        for y in 0..8 {
            for x in 0..8 {
                let mut sum = 0.0;
                for v in 0..8 {
                    for u in 0..8 {
                        sum += self.cos[x][u] * self.cos[y][v] * f64::from(coeffs[v * 8 + u]);
                    }
                }
                out[y * 8 + x] = level_shift_clamp(sum / 4.0);
            }
        }
    }
}

/// Row-column decomposition: two passes of 8-point transforms.
pub struct SeparableIdct {
    cos: [[f64; 8]; 8],
}

impl Default for SeparableIdct {
    fn default() -> Self {
        Self { cos: basis() }
    }
}

impl InverseDct for SeparableIdct {
    fn name(&self) -> &'static str {
        "separable"
    }

    fn inverse(&self, coeffs: &[i32; 64], out: &mut [u8; 64]) {
        let mut tmp = [0.0f64; 64];
        // Rows: horizontal frequencies → x.
        for v in 0..8 {
            let row = &coeffs[v * 8..v * 8 + 8];
            if row[1..].iter().all(|&c| c == 0) {
                let dc = f64::from(row[0]) * self.cos[0][0];
                tmp[v * 8..v * 8 + 8].fill(dc);
                continue;
            }
            for x in 0..8 {
                tmp[v * 8 + x] = self.cos[x].iter().zip(row).map(|(c, &f)| c * f64::from(f)).sum();
            }
        }
        // Columns: vertical frequencies → y.
        for x in 0..8 {
            for y in 0..8 {
                let mut s = 0.0;
                for v in 0..8 {
                    s += self.cos[y][v] * tmp[v * 8 + x];
                }
                out[y * 8 + x] = level_shift_clamp(s / 4.0);
            }
        }
    }
}

type Factory = Box<dyn Fn() -> Arc<dyn InverseDct> + Send + Sync>;

/// Named IDCT kernels.
pub struct IdctRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

impl IdctRegistry {
    pub const DEFAULT: &'static str = "separable";

    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &'static str, factory: F)
    where
        F: Fn() -> Arc<dyn InverseDct> + Send + Sync + 'static,
    {
        self.factories.insert(name, Box::new(factory));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn create(&self, name: &str) -> Result<Arc<dyn InverseDct>> {
        self.factories
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::UnknownIdct(name.to_string()))
    }
}

impl Default for IdctRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("direct", || Arc::new(DirectIdct::default()));
        r.register("separable", || Arc::new(SeparableIdct::default()));
        r
    }
}

impl fmt::Debug for IdctRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

pub fn default_idct() -> Arc<dyn InverseDct> {
    Arc::new(SeparableIdct::default())
}

/// Forward DCT used by the synthetic encoder; input is level-shifted samples.
pub fn forward_dct(samples: &[f64; 64], out: &mut [f64; 64]) {
    let cos = basis();
    let mut tmp = [0.0f64; 64];
    for y in 0..8 {
        for u in 0..8 {
            let mut s = 0.0;
            for x in 0..8 {
                s += cos[x][u] * samples[y * 8 + x];
            }
            tmp[y * 8 + u] = s;
        }
    }
    for u in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for y in 0..8 {
                s += cos[y][v] * tmp[y * 8 + u];
            }
            out[v * 8 + u] = s / 4.0;
        }
    }
}
