// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::raster::DepthImage;

use super::regions::{ObjectRegion, RegionIndex};

fn check_dims(index: &RegionIndex, depth: &DepthImage) -> Result<()> {
    if index.width() != depth.width() || index.height() != depth.height() {
        return Err(Error::invalid_input(format!(
            "depth {}x{} does not match region index {}x{}",
            depth.width(),
            depth.height(),
            index.width(),
            index.height()
        )));
    }
    Ok(())
}

/// Rounded (half-up) mean of `sum / count` in whole millimeters.
fn rounded_mean(sum: u64, count: u64) -> Option<u32> {
    (count > 0).then(|| ((2 * sum + count) / (2 * count)) as u32)
}

/// Mean depth over the region's member pixels, skipping 0 (no reading).
/// `None` when no member pixel has a reading.
pub fn mean_depth(region: &ObjectRegion, index: &RegionIndex, depth: &DepthImage) -> Result<Option<u32>> {
    check_dims(index, depth)?;
    let b = region.bbox;
    let (mut sum, mut count) = (0u64, 0u64);
    for y in b.y..b.y + b.h {
        for x in b.x..b.x + b.w {
            if index.at(x, y) == region.region_id {
                let d = depth.at(x, y);
                if d != 0 {
                    sum += d as u64;
                    count += 1;
                }
            }
        }
    }
    Ok(rounded_mean(sum, count))
}

/// Fills `mean_depth_mm` for every region in one pass over the raster.
pub fn annotate_depths(regions: &mut [ObjectRegion], index: &RegionIndex, depth: &DepthImage) -> Result<()> {
    check_dims(index, depth)?;
    let mut acc = vec![(0u64, 0u64); regions.len() + 1];
    for (&id, &d) in index.ids().iter().zip(depth.values()) {
        if id != 0 && d != 0 {
            let slot = &mut acc[id as usize];
            slot.0 += d as u64;
            slot.1 += 1;
        }
    }
    for r in regions.iter_mut() {
        let (sum, count) = acc[r.region_id as usize];
        r.mean_depth_mm = rounded_mean(sum, count);
    }
    Ok(())
}
