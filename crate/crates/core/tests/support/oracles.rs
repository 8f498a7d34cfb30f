// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference implementations, written independently of the
//! library code they check.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRegion {
    pub class_id: u16,
    /// Member pixels in raster order.
    pub pixels: Vec<(u32, u32)>,
}

impl OracleRegion {
    pub fn area(&self) -> u64 {
        self.pixels.len() as u64
    }

    pub fn bbox(&self) -> (u32, u32, u32, u32) {
        let min_x = self.pixels.iter().map(|p| p.0).min().unwrap();
        let max_x = self.pixels.iter().map(|p| p.0).max().unwrap();
        let min_y = self.pixels.iter().map(|p| p.1).min().unwrap();
        let max_y = self.pixels.iter().map(|p| p.1).max().unwrap();
        (min_x, min_y, max_x - min_x + 1, max_y - min_y + 1)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.pixels.contains(&(x, y))
    }
}

/// Breadth-first flood fill over 4-neighbours, then the documented ordering:
/// area descending, bbox top, bbox left, first raster pixel.
pub fn flood_fill(labels: &[u16], width: u32, height: u32, min_area: u64) -> Vec<OracleRegion> {
    let (w, h) = (width as i64, height as i64);
    let mut seen = vec![false; labels.len()];
    let mut out = Vec::new();
    for start in 0..labels.len() {
        if seen[start] || labels[start] == 0 {
            continue;
        }
        let class = labels[start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if !seen[j] && labels[j] == class {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if (members.len() as u64) < min_area {
            continue;
        }
        members.sort_unstable();
        out.push(OracleRegion {
            class_id: class,
            pixels: members.iter().map(|&i| ((i as i64 % w) as u32, (i as i64 / w) as u32)).collect(),
        });
    }
    out.sort_by_key(|r| {
        let (x, y, _, _) = r.bbox();
        let first = r.pixels[0];
        (std::cmp::Reverse(r.area()), y, x, first.1, first.0)
    });
    out
}

/// The oracle region containing a pixel, by scanning every member list.
pub fn scan_membership(regions: &[OracleRegion], x: u32, y: u32) -> Option<usize> {
    regions.iter().position(|r| r.contains(x, y))
}

/// Exact mean of non-zero depths over the member pixels.
pub fn brute_mean_depth(region: &OracleRegion, depth: &[u16], width: u32) -> Option<f64> {
    let vals: Vec<f64> = region
        .pixels
        .iter()
        .map(|&(x, y)| depth[(y * width + x) as usize])
        .filter(|&d| d != 0)
        .map(f64::from)
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Metrics straight from (predicted_yes, actual_yes) pairs.
#[derive(Debug)]
pub struct BruteMetrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn brute_pope(pairs: &[(bool, bool)]) -> BruteMetrics {
    let n = pairs.len();
    let correct = pairs.iter().filter(|(p, a)| p == a).count();
    let predicted_pos: Vec<_> = pairs.iter().filter(|(p, _)| *p).collect();
    let actual_pos: Vec<_> = pairs.iter().filter(|(_, a)| *a).collect();
    let precision = (!predicted_pos.is_empty())
        .then(|| predicted_pos.iter().filter(|(_, a)| *a).count() as f64 / predicted_pos.len() as f64);
    let recall = (!actual_pos.is_empty())
        .then(|| actual_pos.iter().filter(|(p, _)| *p).count() as f64 / actual_pos.len() as f64);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    BruteMetrics { accuracy: correct as f64 / n as f64, precision, recall, f1 }
}

/// MME score from a flat per-question correctness vector, two per image.
pub fn brute_mme(flat: &[bool]) -> f64 {
    let images = flat.len() / 2;
    let correct = flat.iter().filter(|&&c| c).count();
    let both = flat.chunks(2).filter(|c| c.iter().all(|&x| x)).count();
    let acc = correct as f64 / flat.len() as f64;
    let acc_plus = both as f64 / images as f64;
    100.0 * (acc + acc_plus)
}

/// Whole-word occurrences of `name` (plural "s"/"es" suffix allowed).
pub fn word_mentions(text: &str, name: &str) -> usize {
    let bytes = text.as_bytes();
    let mut n = 0;
    let mut from = 0;
    while let Some(pos) = text[from..].find(name) {
        let start = from + pos;
        let mut end = start + name.len();
        let before_ok = start == 0 || !bytes[start - 1].is_ascii_alphanumeric();
        for suffix in ["es", "s"] {
            if text[end..].starts_with(suffix)
                && text[end + suffix.len()..].bytes().next().is_none_or(|b| !b.is_ascii_alphanumeric())
            {
                end += suffix.len();
                break;
            }
        }
        let after_ok = text[end..].bytes().next().is_none_or(|b| !b.is_ascii_alphanumeric());
        if before_ok && after_ok {
            n += 1;
        }
        from = start + 1;
    }
    n
}

/// Parses "N noun, N noun" back into (count, noun) pairs.
pub fn parse_object_list(list: &str) -> Vec<(u32, String)> {
    list.split(", ")
        .map(|item| {
            let (n, noun) = item.split_once(' ').expect("count and noun");
            (n.parse().expect("integer count"), noun.to_string())
        })
        .collect()
}

pub fn unique<T: std::hash::Hash + Eq>(items: impl IntoIterator<Item = T>) -> bool {
    let mut seen = HashSet::new();
    items.into_iter().all(|i| seen.insert(i))
}
