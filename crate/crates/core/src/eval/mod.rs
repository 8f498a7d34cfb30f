// SPDX-License-Identifier: Apache-2.0

//! Hallucination benchmarks: POPE binary QA, MME existence/count and
//! judge-scored description quality.
//!
//! Every runner evaluates the same records with or without an
//! [`Augmenter`]. With one, the only change to what the describer sees is the
//! knowledge text derived from segmenting the image.

pub mod dataset;
pub mod metrics;
mod mme;
mod pope;
mod qa90;
pub mod report;

use serde::{Deserialize, Serialize};

pub use dataset::{Answer, ImageSource, MmeRecord, MmeSubtask, PopeRecord, Qa90Sample, Strategy};
pub use metrics::{mme_score_pairs, pope_metrics, ConfusionCounts, MmeScore, PopeMetrics};
pub use mme::{mme_score, run_mme, MmeReport, MmeSubtaskReport};
pub use pope::{run_pope, PopeReport, PopeSummary};
pub use qa90::{parse_judge_scores, run_qa90, JudgeRubric, JudgedSample, Qa90Report};
pub use report::{compare, summary, EvalReport};

use crate::error::Result;
use crate::exec::Execution;
use crate::gateway::{self, Describer, Segmenter};
use crate::prompt::{knowledge_sentence, summarize_regions, ObjectInventory, PromptTemplate};
use crate::raster::RgbImage;
use crate::scene::extract_regions;
use crate::session::PipelineConfig;

/// Segmentation-derived knowledge for augmented runs.
#[derive(Clone, Copy)]
pub struct Augmenter<'a> {
    pub segmenter: &'a dyn Segmenter,
    pub template: &'a PromptTemplate,
    pub pipeline: &'a PipelineConfig,
}

impl Augmenter<'_> {
    pub fn inventory(&self, image: &RgbImage) -> Result<ObjectInventory> {
        let seg = gateway::segment(self.segmenter, image)?;
        let min_area = self.pipeline.min_area(image.width(), image.height());
        let (regions, _) = extract_regions(&seg.labels, &seg.taxonomy, min_area)?;
        Ok(summarize_regions(&regions, image.pixel_count()))
    }

    pub fn knowledge(&self, image: &RgbImage) -> Result<String> {
        Ok(knowledge_sentence(&self.inventory(image)?, self.template))
    }
}

pub struct EvalContext<'a> {
    pub images: &'a dyn ImageSource,
    pub describer: &'a dyn Describer,
    pub augment: Option<Augmenter<'a>>,
    pub execution: Execution,
    /// Row name in comparison tables.
    pub label: String,
}

impl EvalContext<'_> {
    pub fn augmented(&self) -> bool {
        self.augment.is_some()
    }
}

/// A record that could not be evaluated. Excluded from all counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalError {
    pub index: usize,
    pub image: String,
    pub message: String,
}
