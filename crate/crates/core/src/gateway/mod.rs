// SPDX-License-Identifier: Apache-2.0

//! Inference backends behind two small traits.
//!
//! Call sites go through [`segment`], [`describe`] and [`answer_binary`],
//! which enforce the contract (size limits, dimension match, non-empty text)
//! regardless of which backend is plugged in.

mod config;
mod http;
mod mock;
pub mod wire;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use config::BackendConfig;
pub use http::{HttpDescriber, HttpSegmenter};
pub use mock::{palette_color, DescribeCall, MockDescriber, MockFailure, MockReply, MockSegmenter};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, RgbImage};
use crate::taxonomy::ClassTaxonomy;

#[derive(Debug, Clone, Default)]
pub struct SegmenterCaps {
    /// Known ahead of time for local backends; HTTP backends report it per
    /// response.
    pub taxonomy: Option<Arc<ClassTaxonomy>>,
    pub max_pixels: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub labels: LabelMap,
    pub taxonomy: Arc<ClassTaxonomy>,
}

pub trait Segmenter: Send + Sync {
    fn capabilities(&self) -> SegmenterCaps;
    fn segment(&self, image: &RgbImage) -> Result<Segmentation>;
}

#[derive(Debug, Clone)]
pub struct DescriberCaps {
    pub max_prompt_chars: usize,
    pub supports_image: bool,
}

impl Default for DescriberCaps {
    fn default() -> Self {
        Self { max_prompt_chars: 8192, supports_image: true }
    }
}

pub trait Describer: Send + Sync {
    fn capabilities(&self) -> DescriberCaps;
    fn describe(&self, image: &RgbImage, prompt: &str) -> Result<String>;
}

impl<T: Segmenter + ?Sized> Segmenter for Arc<T> {
    fn capabilities(&self) -> SegmenterCaps {
        (**self).capabilities()
    }

    fn segment(&self, image: &RgbImage) -> Result<Segmentation> {
        (**self).segment(image)
    }
}

impl<T: Describer + ?Sized> Describer for Arc<T> {
    fn capabilities(&self) -> DescriberCaps {
        (**self).capabilities()
    }

    fn describe(&self, image: &RgbImage, prompt: &str) -> Result<String> {
        (**self).describe(image, prompt)
    }
}

/// Segments `image`, rejecting oversize input and any response whose
/// dimensions or labels break the contract.
pub fn segment(backend: &dyn Segmenter, image: &RgbImage) -> Result<Segmentation> {
    if let Some(max) = backend.capabilities().max_pixels {
        if image.pixel_count() > max {
            return Err(Error::invalid_input(format!(
                "image has {} pixels, segmenter accepts at most {max}",
                image.pixel_count()
            )));
        }
    }
    let seg = backend.segment(image)?;
    if seg.labels.width() != image.width() || seg.labels.height() != image.height() {
        return Err(Error::protocol(format!(
            "segmenter returned {}x{} labels for a {}x{} image",
            seg.labels.width(),
            seg.labels.height(),
            image.width(),
            image.height()
        )));
    }
    seg.labels.validate(&seg.taxonomy).map_err(|e| Error::protocol(e.to_string()))?;
    Ok(seg)
}

/// Describes `image` under `prompt`. Over-long prompts are refused, never
/// truncated.
pub fn describe(backend: &dyn Describer, image: &RgbImage, prompt: &str) -> Result<String> {
    let max = backend.capabilities().max_prompt_chars;
    let len = prompt.chars().count();
    if len > max {
        return Err(Error::invalid_input(format!("prompt has {len} chars, describer accepts {max}")));
    }
    let text = backend.describe(image, prompt)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyResponse);
    }
    Ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryVerdict {
    Yes,
    No,
    Unparseable,
}

impl BinaryVerdict {
    /// Reads the leading word, ignoring case and leading punctuation.
    pub fn parse(text: &str) -> Self {
        let word: String = text
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .chars()
            .take_while(|c| c.is_alphabetic())
            .flat_map(char::to_lowercase)
            .collect();
        match word.as_str() {
            "yes" => BinaryVerdict::Yes,
            "no" => BinaryVerdict::No,
            _ => BinaryVerdict::Unparseable,
        }
    }
}

/// Prompt for a yes/no question, optionally preceded by knowledge text.
pub fn binary_prompt(question: &str, knowledge: &str) -> String {
    if knowledge.is_empty() {
        question.to_string()
    } else {
        format!("{knowledge} {question}")
    }
}

pub fn answer_binary(
    backend: &dyn Describer,
    image: &RgbImage,
    question: &str,
    knowledge: &str,
) -> Result<BinaryVerdict> {
    let text = describe(backend, image, &binary_prompt(question, knowledge))?;
    Ok(BinaryVerdict::parse(&text))
}
