// SPDX-License-Identifier: Apache-2.0

use crate::error::Result;
use crate::raster::RgbImage;

use super::regions::{BBox, ObjectRegion};

/// 5% of the longer bbox side, rounded up.
pub fn default_pad(bbox: &BBox) -> u32 {
    (bbox.w.max(bbox.h) as u64 * 5).div_ceil(100) as u32
}

/// Crops the region's bounding box grown by `pad` on every side, clipped to
/// the image.
pub fn bounding_crop(image: &RgbImage, region: &ObjectRegion, pad: u32) -> Result<RgbImage> {
    let b = region.bbox;
    let x0 = b.x.saturating_sub(pad);
    let y0 = b.y.saturating_sub(pad);
    let x1 = b.x.saturating_add(b.w).saturating_add(pad).min(image.width());
    let y1 = b.y.saturating_add(b.h).saturating_add(pad).min(image.height());
    image.sub_image(x0, y0, x1.saturating_sub(x0), y1.saturating_sub(y0))
}
