// SPDX-License-Identifier: Apache-2.0

//! Segmentation-grounded scene perception.
//!
//! A capture is segmented into a per-pixel label map, which is turned into
//! tappable [`ObjectRegion`]s and an object inventory. The inventory is
//! rendered as an external-knowledge sentence that augments the prompt sent
//! to a vision-language describer, so the global description stays anchored
//! to objects that were actually segmented. Touch queries resolve against the
//! stored region index without touching a model backend; double taps crop the
//! touched object and ask for a local description.
//!
//! The [`eval`] module reproduces binary-QA (POPE), MME existence/count and
//! judge-scored description benchmarks against any [`Describer`] backend,
//! with and without augmentation.

pub mod error;
pub mod eval;
pub mod exec;
pub mod gateway;
pub mod prompt;
pub mod raster;
pub mod scene;
pub mod session;
pub mod taxonomy;

pub use error::{Error, Result};
pub use exec::Execution;
pub use gateway::{answer_binary, describe, segment, BinaryVerdict, Describer, Segmenter};
pub use prompt::{
    build_global_prompt, build_local_prompt, knowledge_sentence, summarize_regions,
    ObjectInventory, PromptTemplate,
};
pub use raster::{DepthImage, LabelMap, RgbImage};
pub use scene::{
    bounding_crop, extract_regions, mean_depth, volume_for_distance, BBox, ObjectRegion,
    RegionIndex, SceneAnalysis, VolumeMapping,
};
pub use session::{SceneService, Session, SessionStore, TouchResponse};
pub use taxonomy::ClassTaxonomy;
