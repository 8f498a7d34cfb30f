// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{self, Describer, Segmenter};
use crate::prompt::{build_global_prompt, build_local_prompt, summarize_regions, PromptTemplate};
use crate::raster::{DepthImage, RgbImage};
use crate::scene::analysis::Stopwatch;
use crate::scene::{annotate_depths, bounding_crop, extract_regions, SceneAnalysis, VolumeMapping};

use super::{Capture, Session, SessionState, TouchResponse};

fn ceil_fraction(fraction: f64, of: u64) -> u64 {
    ((fraction * of as f64) - 1e-9).ceil().max(0.0) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Smallest kept region, as a fraction of the image.
    pub min_area_fraction: f64,
    pub volume: VolumeMapping,
    /// Crop padding as a fraction of the longer bbox side.
    pub crop_pad_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { min_area_fraction: 0.001, volume: VolumeMapping::default(), crop_pad_fraction: 0.05 }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.volume.validate()?;
        if !(0.0..1.0).contains(&self.min_area_fraction) {
            return Err(Error::invalid_config("min_area_fraction must be in [0, 1)"));
        }
        if !(self.crop_pad_fraction >= 0.0 && self.crop_pad_fraction.is_finite()) {
            return Err(Error::invalid_config("crop_pad_fraction must be >= 0"));
        }
        Ok(())
    }

    pub fn min_area(&self, width: u32, height: u32) -> u64 {
        ceil_fraction(self.min_area_fraction, width as u64 * height as u64).max(1)
    }

    pub fn crop_pad(&self, bbox_w: u32, bbox_h: u32) -> u32 {
        ceil_fraction(self.crop_pad_fraction, bbox_w.max(bbox_h) as u64) as u32
    }
}

/// Result of a double tap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDescription {
    pub region_id: u32,
    pub class_name: String,
    pub prompt: String,
    pub crop: (u32, u32),
    pub text: String,
}

/// The capture/touch/inspect pipeline over a pair of backends.
pub struct SceneService {
    segmenter: Arc<dyn Segmenter>,
    describer: Arc<dyn Describer>,
    template: PromptTemplate,
    config: PipelineConfig,
}

impl SceneService {
    pub fn new(
        segmenter: Arc<dyn Segmenter>,
        describer: Arc<dyn Describer>,
        template: PromptTemplate,
        config: PipelineConfig,
    ) -> Result<Self> {
        template.validate()?;
        config.validate()?;
        Ok(Self { segmenter, describer, template, config })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn template(&self) -> &PromptTemplate {
        &self.template
    }

    fn analyze_timed(&self, rgb: &RgbImage, depth: Option<&DepthImage>, clock: &mut Stopwatch) -> Result<SceneAnalysis> {
        if let Some(d) = depth {
            if (d.width(), d.height()) != (rgb.width(), rgb.height()) {
                return Err(Error::invalid_input(format!(
                    "depth {}x{} does not match rgb {}x{}",
                    d.width(),
                    d.height(),
                    rgb.width(),
                    rgb.height()
                )));
            }
        }
        clock.lap("validate");
        let seg = gateway::segment(self.segmenter.as_ref(), rgb)?;
        clock.lap("segment");
        let min_area = self.config.min_area(rgb.width(), rgb.height());
        let (mut regions, index) = extract_regions(&seg.labels, &seg.taxonomy, min_area)?;
        clock.lap("regions");
        if let Some(d) = depth {
            annotate_depths(&mut regions, &index, d)?;
        }
        clock.lap("depth");
        let inventory = summarize_regions(&regions, rgb.pixel_count());
        let global_prompt = build_global_prompt(&inventory, &self.template);
        clock.lap("prompt");
        let global_description = gateway::describe(self.describer.as_ref(), rgb, &global_prompt)?;
        clock.lap("describe");
        Ok(SceneAnalysis {
            analysis_id: uuid::Uuid::new_v4(),
            width: rgb.width(),
            height: rgb.height(),
            regions,
            region_index: Some(index),
            global_prompt,
            global_description,
            timing: Default::default(),
        })
    }

    /// Runs the full pipeline without touching any session.
    pub fn analyze(&self, rgb: &RgbImage, depth: Option<&DepthImage>) -> Result<SceneAnalysis> {
        let mut clock = Stopwatch::start();
        let mut analysis = self.analyze_timed(rgb, depth, &mut clock)?;
        analysis.timing = clock.finish();
        Ok(analysis)
    }

    /// Long press. On failure the session keeps its previous capture.
    pub fn capture(&self, session: &mut Session, rgb: RgbImage, depth: Option<DepthImage>) -> Result<Arc<SceneAnalysis>> {
        let mut clock = Stopwatch::start();
        let mut analysis = self.analyze_timed(&rgb, depth.as_ref(), &mut clock)?;
        analysis.timing = clock.finish();
        let analysis = Arc::new(analysis);
        session.install(Capture { analysis: analysis.clone(), image: Arc::new(rgb), depth: depth.map(Arc::new) });
        Ok(analysis)
    }

    fn pixel_for(analysis: &SceneAnalysis, u: f64, v: f64) -> Result<(u32, u32)> {
        let unit = 0.0..=1.0;
        if !unit.contains(&u) || !unit.contains(&v) {
            return Err(Error::invalid_input(format!("touch ({u}, {v}) outside [0,1]^2")));
        }
        let x = ((u * analysis.width as f64).floor() as u32).min(analysis.width - 1);
        let y = ((v * analysis.height as f64).floor() as u32).min(analysis.height - 1);
        Ok((x, y))
    }

    /// Tap or swipe sample. Never calls a backend.
    pub fn touch(&self, session: &mut Session, u: f64, v: f64) -> Result<TouchResponse> {
        let capture = session.capture().ok_or(Error::NoAnalysis)?;
        let analysis = &capture.analysis;
        let (x, y) = Self::pixel_for(analysis, u, v)?;
        let region = analysis.region_at(x, y)?;
        let distance_mm = region.and_then(|r| r.mean_depth_mm);
        let volume = match (&capture.depth, distance_mm) {
            (Some(_), Some(d)) => Some(self.config.volume.volume(d as f64)?),
            _ => None,
        };
        let region_id = region.map(|r| r.region_id);
        let new_object = region_id.is_some() && region_id != session.last_region_id();
        let response = TouchResponse {
            class_name: region.map(|r| r.class_name.clone()),
            volume,
            new_object,
            vibrate: new_object,
            region_id,
            distance_mm: if capture.depth.is_some() { distance_mm } else { None },
        };
        session.set_last_region(region_id);
        Ok(response)
    }

    /// Double tap: describe the touched object from its bounding crop.
    pub fn inspect(&self, session: &Session, u: f64, v: f64) -> Result<LocalDescription> {
        if session.state() == SessionState::Empty {
            return Err(Error::NoAnalysis);
        }
        let capture = session.capture().expect("analyzed");
        let (x, y) = Self::pixel_for(&capture.analysis, u, v)?;
        let region = capture.analysis.region_at(x, y)?.ok_or(Error::NoObject { u, v })?;
        let pad = self.config.crop_pad(region.bbox.w, region.bbox.h);
        let crop = bounding_crop(&capture.image, region, pad)?;
        let prompt = build_local_prompt(&region.class_name, &self.template)?;
        let text = gateway::describe(self.describer.as_ref(), &crop, &prompt)?;
        Ok(LocalDescription {
            region_id: region.region_id,
            class_name: region.class_name.clone(),
            prompt,
            crop: (crop.width(), crop.height()),
            text,
        })
    }
}
