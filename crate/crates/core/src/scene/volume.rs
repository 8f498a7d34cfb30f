// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NEAR_MM: f64 = 500.0;
pub const DEFAULT_FAR_MM: f64 = 5000.0;
pub const DEFAULT_VOLUME_FLOOR: f64 = 0.1;

/// Linear distance-to-loudness mapping: full volume at `near_mm`, `floor` at
/// `far_mm` and beyond. Objects never become inaudible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VolumeMapping {
    pub near_mm: f64,
    pub far_mm: f64,
    pub floor: f64,
}

impl Default for VolumeMapping {
    fn default() -> Self {
        Self { near_mm: DEFAULT_NEAR_MM, far_mm: DEFAULT_FAR_MM, floor: DEFAULT_VOLUME_FLOOR }
    }
}

impl VolumeMapping {
    pub fn new(near_mm: f64, far_mm: f64, floor: f64) -> Result<Self> {
        let m = Self { near_mm, far_mm, floor };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.near_mm.is_finite() && self.far_mm.is_finite() && self.near_mm < self.far_mm) {
            return Err(Error::invalid_config(format!(
                "volume mapping needs near < far, got near={} far={}",
                self.near_mm, self.far_mm
            )));
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::invalid_config(format!("volume floor {} not in [0,1]", self.floor)));
        }
        Ok(())
    }

    pub fn volume(&self, distance_mm: f64) -> Result<f64> {
        if distance_mm.is_nan() || distance_mm < 0.0 {
            return Err(Error::invalid_input(format!("distance {distance_mm} must be >= 0")));
        }
        let closeness = ((self.far_mm - distance_mm) / (self.far_mm - self.near_mm)).clamp(0.0, 1.0);
        Ok(self.floor + (1.0 - self.floor) * closeness)
    }
}

/// Volume in `[0.1, 1]` for an object `distance_mm` away.
pub fn volume_for_distance(distance_mm: f64, near_mm: f64, far_mm: f64) -> Result<f64> {
    VolumeMapping::new(near_mm, far_mm, DEFAULT_VOLUME_FLOOR)?.volume(distance_mm)
}
