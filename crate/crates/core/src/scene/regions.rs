// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::LabelMap;
use crate::taxonomy::{ClassTaxonomy, BACKGROUND_ID};

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.w && y < self.y + self.h
    }
}

/// One 4-connected component of a single class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRegion {
    pub region_id: u32,
    pub class_id: u16,
    pub class_name: String,
    pub pixel_area: u64,
    pub bbox: BBox,
    /// Mean member pixel position.
    pub centroid: (f64, f64),
    pub mean_depth_mm: Option<u32>,
}

/// Per-pixel region id raster; 0 means no region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionIndex {
    width: u32,
    height: u32,
    ids: Vec<u32>,
}

impl RegionIndex {
    pub fn empty(width: u32, height: u32) -> Self {
        Self { width, height, ids: vec![0; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn at(&self, x: u32, y: u32) -> u32 {
        self.ids[(y * self.width + x) as usize]
    }

    pub fn get(&self, x: u32, y: u32) -> Result<u32> {
        if x >= self.width || y >= self.height {
            return Err(Error::invalid_input(format!(
                "point ({x},{y}) outside {}x{} raster",
                self.width, self.height
            )));
        }
        Ok(self.at(x, y))
    }
}

/// Speckle threshold: 0.1% of the image, at least one pixel.
pub fn default_min_area(width: u32, height: u32) -> u64 {
    let pixels = width as u64 * height as u64;
    pixels.div_ceil(1000).max(1)
}

struct Component {
    class_id: u16,
    area: u64,
    min_x: u32,
    min_y: u32,
    max_x: u32,
    max_y: u32,
    sum_x: u64,
    sum_y: u64,
    first: usize,
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        let p = parent[i as usize];
        parent[i as usize] = parent[p as usize];
        i = p;
    }
    i
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Splits a label map into 4-connected same-class components.
///
/// Components smaller than `min_area` are dropped and left as 0 in the
/// returned index. Survivors are numbered from 1 by descending area, then by
/// the top, then left edge of their bounding box, then by their first pixel in
/// raster order.
pub fn extract_regions(
    labels: &LabelMap,
    taxonomy: &ClassTaxonomy,
    min_area: u64,
) -> Result<(Vec<ObjectRegion>, RegionIndex)> {
    labels.validate(taxonomy)?;
    let (w, h) = (labels.width() as usize, labels.height() as usize);
    let lab = labels.labels();

    // Pass 1: provisional labels with union-find over left/up neighbours.
    let mut provisional = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let class = lab[i];
            if class == BACKGROUND_ID {
                continue;
            }
            let left = (x > 0 && lab[i - 1] == class).then(|| provisional[i - 1]);
            let up = (y > 0 && lab[i - w] == class).then(|| provisional[i - w]);
            provisional[i] = match (left, up) {
                (Some(l), Some(u)) => {
                    union(&mut parent, l, u);
                    l
                }
                (Some(l), None) => l,
                (None, Some(u)) => u,
                (None, None) => {
                    let next = parent.len() as u32;
                    parent.push(next);
                    next
                }
            };
        }
    }

    // Pass 2: resolve roots and gather statistics.
    let mut slot_of_root = vec![u32::MAX; parent.len()];
    let mut comps: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if provisional[i] == 0 {
                continue;
            }
            let root = find(&mut parent, provisional[i]);
            let slot = match slot_of_root[root as usize] {
                u32::MAX => {
                    slot_of_root[root as usize] = comps.len() as u32;
                    comps.push(Component {
                        class_id: lab[i],
                        area: 0,
                        min_x: x as u32,
                        min_y: y as u32,
                        max_x: x as u32,
                        max_y: y as u32,
                        sum_x: 0,
                        sum_y: 0,
                        first: i,
                    });
                    comps.len() - 1
                }
                s => s as usize,
            };
            let c = &mut comps[slot];
            c.area += 1;
            c.min_x = c.min_x.min(x as u32);
            c.max_x = c.max_x.max(x as u32);
            c.max_y = y as u32;
            c.sum_x += x as u64;
            c.sum_y += y as u64;
            provisional[i] = slot as u32 + 1;
        }
    }

    let mut order: Vec<usize> = (0..comps.len()).filter(|&s| comps[s].area >= min_area).collect();
    order.sort_by_key(|&s| {
        let c = &comps[s];
        (std::cmp::Reverse(c.area), c.min_y, c.min_x, c.first)
    });

    let mut id_of_slot = vec![0u32; comps.len()];
    let mut regions = Vec::with_capacity(order.len());
    for (n, &s) in order.iter().enumerate() {
        let c = &comps[s];
        let region_id = n as u32 + 1;
        id_of_slot[s] = region_id;
        regions.push(ObjectRegion {
            region_id,
            class_id: c.class_id,
            class_name: taxonomy.name(c.class_id).expect("validated").to_string(),
            pixel_area: c.area,
            bbox: BBox { x: c.min_x, y: c.min_y, w: c.max_x - c.min_x + 1, h: c.max_y - c.min_y + 1 },
            centroid: (c.sum_x as f64 / c.area as f64, c.sum_y as f64 / c.area as f64),
            mean_depth_mm: None,
        });
    }

    let ids = provisional
        .into_iter()
        .map(|slot| if slot == 0 { 0 } else { id_of_slot[slot as usize - 1] })
        .collect();
    Ok((regions, RegionIndex { width: w as u32, height: h as u32, ids }))
}

/// O(1) point lookup. `regions` must be the list produced alongside `index`.
pub fn region_at<'a>(
    regions: &'a [ObjectRegion],
    index: &RegionIndex,
    x: u32,
    y: u32,
) -> Result<Option<&'a ObjectRegion>> {
    match index.get(x, y)? {
        0 => Ok(None),
        id => Ok(regions.get(id as usize - 1)),
    }
}
