// SPDX-License-Identifier: Apache-2.0

use std::time::Instant;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::{Error, Result};

use super::regions::{region_at, ObjectRegion, RegionIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub ms: f64,
}

/// Per-stage durations. Stages are recorded back to back from one clock, so
/// they add up to `total_ms`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<StageTiming>,
    pub total_ms: f64,
}

impl Timings {
    pub fn stage(&self, name: &str) -> Option<f64> {
        self.stages.iter().find(|s| s.stage == name).map(|s| s.ms)
    }

    pub fn stage_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.ms).sum()
    }
}

/// Lap timer feeding [`Timings`].
#[derive(Debug)]
pub(crate) struct Stopwatch {
    start: Instant,
    last: Instant,
    timings: Timings,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        let now = Instant::now();
        Self { start: now, last: now, timings: Timings::default() }
    }

    pub(crate) fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.stages.push(StageTiming {
            stage: stage.to_string(),
            ms: (now - self.last).as_secs_f64() * 1e3,
        });
        self.last = now;
    }

    pub(crate) fn finish(mut self) -> Timings {
        self.timings.total_ms = (self.last - self.start).as_secs_f64() * 1e3;
        self.timings
    }
}

/// Everything produced by one capture. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneAnalysis {
    pub analysis_id: Uuid,
    pub width: u32,
    pub height: u32,
    pub regions: Vec<ObjectRegion>,
    #[serde(skip)]
    pub region_index: Option<RegionIndex>,
    pub global_prompt: String,
    pub global_description: String,
    pub timing: Timings,
}

impl SceneAnalysis {
    pub fn index(&self) -> Result<&RegionIndex> {
        self.region_index
            .as_ref()
            .ok_or_else(|| Error::invalid_input("analysis carries no region index"))
    }

    pub fn region(&self, region_id: u32) -> Option<&ObjectRegion> {
        region_id.checked_sub(1).and_then(|i| self.regions.get(i as usize))
    }

    pub fn region_at(&self, x: u32, y: u32) -> Result<Option<&ObjectRegion>> {
        region_at(&self.regions, self.index()?, x, y)
    }

    /// Checks that the index and region list describe the same partition.
    pub fn validate(&self) -> Result<()> {
        let index = self.index()?;
        let mut counted = vec![0u64; self.regions.len() + 1];
        for &id in index.ids() {
            match counted.get_mut(id as usize) {
                Some(c) => *c += 1,
                None => return Err(Error::invalid_input(format!("index refers to unknown region {id}"))),
            }
        }
        for (i, r) in self.regions.iter().enumerate() {
            if r.region_id as usize != i + 1 {
                return Err(Error::invalid_input(format!("region {} out of sequence", r.region_id)));
            }
            if counted[i + 1] != r.pixel_area {
                return Err(Error::invalid_input(format!(
                    "region {} area {} but index holds {} cells",
                    r.region_id,
                    r.pixel_area,
                    counted[i + 1]
                )));
            }
        }
        Ok(())
    }
}
