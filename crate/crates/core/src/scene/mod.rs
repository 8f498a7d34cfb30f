// SPDX-License-Identifier: Apache-2.0

//! Deterministic pixel and region algorithms over segmenter output.

pub(crate) mod analysis;
mod crop;
mod depth;
mod regions;
mod volume;

pub use analysis::{SceneAnalysis, StageTiming, Timings};
pub use crop::{bounding_crop, default_pad};
pub use depth::{annotate_depths, mean_depth};
pub use regions::{default_min_area, extract_regions, region_at, BBox, ObjectRegion, RegionIndex};
pub use volume::{volume_for_distance, VolumeMapping};
