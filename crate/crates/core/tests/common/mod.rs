#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use mcuwidth::encoder::CoefficientImage;
use mcuwidth::McuSequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct Fixture {
    pub file: String,
    pub reference: String,
    pub layout: String,
    pub width: u32,
    pub height: u32,
    #[serde(rename = "K")]
    pub k: u32,
    pub class: String,
    pub expect_correct: bool,
}

impl Fixture {
    pub fn path(&self) -> PathBuf {
        fixtures_dir().join(&self.file)
    }

    pub fn bytes(&self) -> Vec<u8> {
        std::fs::read(self.path()).unwrap()
    }

    pub fn reference_bytes(&self) -> Vec<u8> {
        std::fs::read(fixtures_dir().join(&self.reference)).unwrap()
    }
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn fixtures() -> Vec<Fixture> {
    let text = std::fs::read_to_string(fixtures_dir().join("fixtures.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn fixture(name: &str) -> Fixture {
    fixtures().into_iter().find(|f| f.file == name).unwrap()
}

/// Top and bottom edge rows per MCU, in decode order.
pub type Rows = Vec<(Vec<u8>, Vec<u8>)>;

/// Brute-force estimator written straight from the definition: for every
/// MCU, every later MCU whose top row is at minimal distance from its bottom
/// row votes for the width implied by the index gap.
pub fn oracle_histogram(rows: &[(Vec<u8>, Vec<u8>)], k: usize, c: usize) -> BTreeMap<u32, u64> {
    let n = rows.len();
    let dist = |b: &[u8], t: &[u8]| {
        let mut total = 0.0f64;
        for px in 0..k {
            let mut sq = 0i64;
            for ch in 0..c {
                let d = i64::from(b[px * c + ch]) - i64::from(t[px * c + ch]);
                sq += d * d;
            }
            total += (sq as f64).sqrt();
        }
        total / k as f64
    };
    let mut hist = BTreeMap::new();
    for i in 0..n.saturating_sub(1) {
        let ds: Vec<f64> = (i + 1..n).map(|j| dist(&rows[i].1, &rows[j].0)).collect();
        let best = ds.iter().cloned().fold(f64::INFINITY, f64::min);
        for (off, d) in ds.iter().enumerate() {
            if *d == best {
                *hist.entry(((off + 1) * k) as u32).or_insert(0) += 1;
            }
        }
    }
    hist
}

/// Width with the highest count; the smallest such width on a tie.
pub fn oracle_mode(hist: &BTreeMap<u32, u64>) -> (u32, u64) {
    let mut best = (0, 0);
    for (&w, &f) in hist {
        if f > best.1 {
            best = (w, f);
        }
    }
    best
}

/// Random top/bottom rows over a small alphabet so that exact ties are
/// common.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, k: usize, c: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let alphabet: Vec<u8> = (0..rng.gen_range(2..6)).map(|_| rng.gen()).collect();
    let row = |rng: &mut ChaCha8Rng| -> Vec<u8> { (0..k * c).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect() };
    (0..n).map(|_| (row(rng), row(rng))).collect()
}

pub fn random_sequence(seed: u64) -> (Rows, McuSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=50);
    let k = if rng.gen() { 8 } else { 16 };
    let c = if rng.gen() { 1 } else { 3 };
    let rows = random_rows(&mut rng, n, k, c);
    let seq = McuSequence::from_rows(rows.clone(), k, c).unwrap();
    (rows, seq)
}

/// Grayscale stream of `n` MCUs that all decode to the same flat block.
pub fn constant_jpeg(n: usize, width_mcus: usize) -> Vec<u8> {
    let mut block = [0i32; 64];
    block[0] = -5;
    CoefficientImage {
        width: (width_mcus * 8) as u16,
        height: (n.div_ceil(width_mcus) * 8) as u16,
        sampling: vec![(1, 1)],
        quant: vec![[2; 64]],
        mcus: vec![vec![block]; n],
        restart_interval: 0,
    }
    .to_jpeg()
}
