// SPDX-License-Identifier: Apache-2.0

//! JSON bodies for the model-server HTTP protocol.
//!
//! ```text
//! POST {endpoint}/segment  {"image_png_b64"}           -> {"label_map_png_b64", "taxonomy"}
//! POST {endpoint}/describe {"image_png_b64", "prompt"} -> {"text"}
//! ```
//!
//! Images are base64 (standard alphabet, padded) PNG. Label maps are 16-bit
//! grayscale PNG of class ids.

use std::sync::Arc;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, RgbImage};
use crate::taxonomy::{ClassTaxonomy, TaxonomyEntry};

use super::{Describer, Segmentation, Segmenter};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRequest {
    pub image_png_b64: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentResponse {
    pub label_map_png_b64: String,
    pub taxonomy: Vec<TaxonomyEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescribeRequest {
    pub image_png_b64: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescribeResponse {
    pub text: String,
}

pub fn encode_image(image: &RgbImage) -> Result<String> {
    Ok(STANDARD.encode(image.to_png()?))
}

pub fn decode_image(b64: &str) -> Result<RgbImage> {
    let bytes = STANDARD.decode(b64).map_err(|e| Error::invalid_input(format!("base64: {e}")))?;
    RgbImage::from_encoded(&bytes)
}

impl SegmentRequest {
    pub fn new(image: &RgbImage) -> Result<Self> {
        Ok(Self { image_png_b64: encode_image(image)? })
    }
}

impl SegmentResponse {
    pub fn new(seg: &Segmentation) -> Result<Self> {
        Ok(Self {
            label_map_png_b64: STANDARD.encode(seg.labels.to_png()?),
            taxonomy: seg.taxonomy.entries().to_vec(),
        })
    }

    /// Decodes the response; any malformation is a protocol error.
    pub fn decode(self) -> Result<Segmentation> {
        let bytes = STANDARD
            .decode(&self.label_map_png_b64)
            .map_err(|e| Error::protocol(format!("label map base64: {e}")))?;
        let labels = LabelMap::from_png(&bytes).map_err(|e| Error::protocol(format!("label map: {e}")))?;
        let taxonomy =
            ClassTaxonomy::new(self.taxonomy).map_err(|e| Error::protocol(format!("taxonomy: {e}")))?;
        Ok(Segmentation { labels, taxonomy: Arc::new(taxonomy) })
    }
}

impl DescribeRequest {
    pub fn new(image: &RgbImage, prompt: &str) -> Result<Self> {
        Ok(Self { image_png_b64: encode_image(image)?, prompt: prompt.to_string() })
    }
}

/// Server side of `/segment`, for hosting a local backend over HTTP.
pub fn serve_segment(backend: &dyn Segmenter, req: &SegmentRequest) -> Result<SegmentResponse> {
    let image = decode_image(&req.image_png_b64)?;
    SegmentResponse::new(&super::segment(backend, &image)?)
}

/// Server side of `/describe`.
pub fn serve_describe(backend: &dyn Describer, req: &DescribeRequest) -> Result<DescribeResponse> {
    let image = decode_image(&req.image_png_b64)?;
    Ok(DescribeResponse { text: super::describe(backend, &image, &req.prompt)? })
}
