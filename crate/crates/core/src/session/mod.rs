// SPDX-License-Identifier: Apache-2.0

//! Per-user interaction sessions.
//!
//! A long press runs the full capture pipeline and stores the result. Taps
//! and swipe samples resolve against the stored region index only; double
//! taps crop the touched object and ask the describer about it.

mod script;
mod service;
mod store;

pub use script::{parse_script, replay, Gesture, ReplayEvent};
pub use service::{LocalDescription, PipelineConfig, SceneService};
pub use store::SessionStore;

use std::sync::Arc;
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::raster::{DepthImage, RgbImage};
use crate::scene::SceneAnalysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Empty,
    Analyzed,
}

/// The images and analysis from the latest capture.
#[derive(Debug, Clone)]
pub struct Capture {
    pub analysis: Arc<SceneAnalysis>,
    pub image: Arc<RgbImage>,
    pub depth: Option<Arc<DepthImage>>,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: Uuid,
    capture: Option<Capture>,
    last_region_id: Option<u32>,
    created_at: SystemTime,
    updated_at: SystemTime,
}

impl Session {
    pub fn new() -> Self {
        Self::with_id(Uuid::new_v4())
    }

    pub fn with_id(id: Uuid) -> Self {
        let now = SystemTime::now();
        Self { id, capture: None, last_region_id: None, created_at: now, updated_at: now }
    }

    pub fn id(&self) -> Uuid {
        self.id
    }

    pub fn state(&self) -> SessionState {
        match self.capture {
            Some(_) => SessionState::Analyzed,
            None => SessionState::Empty,
        }
    }

    pub fn capture(&self) -> Option<&Capture> {
        self.capture.as_ref()
    }

    pub fn analysis(&self) -> Option<&Arc<SceneAnalysis>> {
        self.capture.as_ref().map(|c| &c.analysis)
    }

    pub fn last_region_id(&self) -> Option<u32> {
        self.last_region_id
    }

    pub fn created_at(&self) -> SystemTime {
        self.created_at
    }

    pub fn updated_at(&self) -> SystemTime {
        self.updated_at
    }

    fn install(&mut self, capture: Capture) {
        self.capture = Some(capture);
        self.last_region_id = None;
        self.updated_at = SystemTime::now();
    }

    fn set_last_region(&mut self, id: Option<u32>) {
        self.last_region_id = id;
        self.updated_at = SystemTime::now();
    }
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

/// Answer to a tap or swipe sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchResponse {
    pub class_name: Option<String>,
    /// Playback volume in [0, 1]; absent without a depth reading.
    pub volume: Option<f64>,
    pub new_object: bool,
    pub vibrate: bool,
    pub region_id: Option<u32>,
    pub distance_mm: Option<u32>,
}
