// SPDX-License-Identifier: Apache-2.0

//! Synthetic captures painted with mock-segmenter palette colors.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sightline_core::gateway::palette_color;
use sightline_core::{ClassTaxonomy, DepthImage, LabelMap, RgbImage};

pub const BACKGROUND_RGB: [u8; 3] = [128, 128, 128];

/// (class, x0, y0, x1, y1, depth mm) on a 160x120 grid.
pub const WALKTHROUGH: &[(&str, u32, u32, u32, u32, u16)] = &[
    ("table", 60, 10, 100, 36, 2500),
    ("chair", 10, 45, 50, 110, 1500),
    ("flowerpot", 115, 55, 145, 105, 3200),
];

pub const WALKTHROUGH_SCRIPT: &str = "\
# long press, tap the chair, swipe over to the flowerpot, double tap it
long_press
tap 0.1875 0.65
swipe 0.1875 0.75 0.8125 0.75 11
double_tap 0.8125 0.75
";

/// Chair, table and flowerpot on an unlabeled background, scaled by `scale`
/// from 160x120. Every seventh chair pixel has no depth reading.
pub fn walkthrough(scale: u32) -> (RgbImage, DepthImage) {
    let tax = ClassTaxonomy::builtin();
    let (w, h) = (160 * scale, 120 * scale);
    let mut rgb = RgbImage::filled(w, h, BACKGROUND_RGB).unwrap();
    let mut depth = vec![4500u16; (w * h) as usize];
    for &(class, x0, y0, x1, y1, mm) in WALKTHROUGH {
        let color = palette_color(tax.id_of(class).unwrap());
        for y in y0 * scale..y1 * scale {
            for x in x0 * scale..x1 * scale {
                rgb.set_pixel(x, y, color);
                let i = (y * w + x) as usize;
                depth[i] = if class == "chair" && i.is_multiple_of(7) { 0 } else { mm };
            }
        }
    }
    (rgb, DepthImage::new(w, h, depth).unwrap())
}

/// Label map of `classes` (0 = background) that is either uniform noise or
/// 4x4 blocks with noise, so both speckle and large blobs occur.
pub fn random_label_map(rng: &mut ChaCha8Rng, width: u32, height: u32, classes: u16) -> LabelMap {
    let blocky = rng.random_bool(0.5);
    let (bw, bh) = (width.div_ceil(4), height.div_ceil(4));
    let blocks: Vec<u16> = (0..bw * bh).map(|_| rng.random_range(0..classes)).collect();
    let labels = (0..width * height)
        .map(|i| {
            let (x, y) = (i % width, i / width);
            if blocky && !rng.random_bool(0.1) {
                blocks[((y / 4) * bw + x / 4) as usize]
            } else {
                rng.random_range(0..classes)
            }
        })
        .collect();
    LabelMap::new(width, height, labels).unwrap()
}

pub fn random_depth(rng: &mut ChaCha8Rng, width: u32, height: u32, invalid_fraction: f64) -> DepthImage {
    let values = (0..width * height)
        .map(|_| if rng.random_bool(invalid_fraction) { 0 } else { rng.random_range(300..8000) })
        .collect();
    DepthImage::new(width, height, values).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
