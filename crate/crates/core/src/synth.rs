//! Seeded synthetic data: a linearly separable threat table with the same
//! columns as the real one, and a bar-orientation image corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, LabeledImage};
use crate::dataset::{ThreatRecord, ThreatTable};
use crate::imaging::GrayImage;

pub const THREAT_TYPES: [&str; 5] = [
    "Malware",
    "Data Breach",
    "Ransomware",
    "Social Engineering",
    "Phishing",
];

pub const SECTORS: [&str; 5] = [
    "Data Breach",
    "Ransomware",
    "Phishing",
    "Social Engineering",
    "Malware",
];

/// Rows whose label is `1` iff
/// `(attempts + impact) / 200 + 0.1·[Ransomware] − 0.1·[sector Phishing] > 0.5`,
/// keeping only rows at least `gap` away from that boundary.
pub fn separable_threat_table(rows: usize, gap: f64, seed: u64) -> ThreatTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(rows);
    while records.len() < rows {
        let threat = THREAT_TYPES[rng.gen_range(0..THREAT_TYPES.len())];
        let sector = SECTORS[rng.gen_range(0..SECTORS.len())];
        let attempts: u64 = rng.gen_range(0..=100);
        let impact: u8 = rng.gen_range(0..=100);
        let mut score = (attempts as f64 + impact as f64) / 200.0;
        if threat == "Ransomware" {
            score += 0.1;
        }
        if sector == "Phishing" {
            score -= 0.1;
        }
        if (score - 0.5).abs() < gap {
            continue;
        }
        records.push(ThreatRecord::new(
            threat,
            sector,
            attempts,
            impact,
            u8::from(score > 0.5),
        ));
    }
    ThreatTable::new(format!("synthetic-{seed}"), records)
}

/// Bar images: class 0 holds a bright vertical bar, class 1 a horizontal one,
/// both over uniform background noise. Labels alternate 0, 1, 0, ...
pub fn bar_corpus(samples: usize, side: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..samples)
        .map(|i| {
            let label = i % 2;
            let image = bar_image(&mut rng, side, label == 0);
            LabeledImage {
                name: format!("bar_{i:04}.pgm"),
                image,
                label,
            }
        })
        .collect();
    Corpus { samples }
}

/// One bar image drawn from `rng`.
pub fn bar_image(rng: &mut impl Rng, side: usize, vertical: bool) -> GrayImage {
    let pos = rng.gen_range(1..side - 1);
    let intensity = rng.gen_range(180.0..255.0);
    let mut pixels: Vec<f64> = (0..side * side).map(|_| rng.gen_range(0.0..60.0)).collect();
    for k in 0..side {
        let idx = if vertical { k * side + pos } else { pos * side + k };
        pixels[idx] = intensity;
    }
    GrayImage::new(side, side, pixels).expect("square image")
}
