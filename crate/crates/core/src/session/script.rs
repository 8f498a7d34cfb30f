// SPDX-License-Identifier: Apache-2.0

//! Offline gesture scripts.
//!
//! One gesture per line, `#` starts a comment:
//!
//! ```text
//! long_press
//! tap 0.19 0.75
//! swipe 0.19 0.75 0.81 0.75 12   # from, to, sample count (default 8)
//! double_tap 0.81 0.75
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{DepthImage, RgbImage};
use crate::scene::Timings;

use super::{LocalDescription, SceneService, Session, TouchResponse};

const DEFAULT_SWIPE_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Gesture {
    LongPress,
    Tap { u: f64, v: f64 },
    Swipe { from: (f64, f64), to: (f64, f64), samples: usize },
    DoubleTap { u: f64, v: f64 },
}

impl Gesture {
    /// Touch points a swipe sends, evenly spaced and including both ends.
    pub fn swipe_points(from: (f64, f64), to: (f64, f64), samples: usize) -> Vec<(f64, f64)> {
        if samples <= 1 {
            return vec![from];
        }
        (0..samples)
            .map(|k| {
                let t = k as f64 / (samples - 1) as f64;
                (from.0 + (to.0 - from.0) * t, from.1 + (to.1 - from.1) * t)
            })
            .collect()
    }
}

fn numbers(line_no: usize, args: &[&str]) -> Result<Vec<f64>> {
    args.iter()
        .map(|a| {
            a.parse::<f64>()
                .map_err(|_| Error::invalid_input(format!("line {line_no}: {a:?} is not a number")))
        })
        .collect()
}

pub fn parse_script(text: &str) -> Result<Vec<Gesture>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let verb = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let arity = |n: &[usize]| -> Result<()> {
            if n.contains(&args.len()) {
                Ok(())
            } else {
                Err(Error::invalid_input(format!("line {line_no}: {verb} takes {n:?} arguments")))
            }
        };
        let g = match verb {
            "long_press" => {
                arity(&[0])?;
                Gesture::LongPress
            }
            "tap" | "double_tap" => {
                arity(&[2])?;
                let n = numbers(line_no, &args)?;
                if verb == "tap" {
                    Gesture::Tap { u: n[0], v: n[1] }
                } else {
                    Gesture::DoubleTap { u: n[0], v: n[1] }
                }
            }
            "swipe" => {
                arity(&[4, 5])?;
                let n = numbers(line_no, &args[..4])?;
                let samples = match args.get(4) {
                    Some(s) => s
                        .parse()
                        .ok()
                        .filter(|&k: &usize| k > 0)
                        .ok_or_else(|| Error::invalid_input(format!("line {line_no}: bad sample count {s:?}")))?,
                    None => DEFAULT_SWIPE_SAMPLES,
                };
                Gesture::Swipe { from: (n[0], n[1]), to: (n[2], n[3]), samples }
            }
            other => return Err(Error::invalid_input(format!("line {line_no}: unknown gesture {other:?}"))),
        };
        out.push(g);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "gesture", rename_all = "snake_case")]
pub enum ReplayEvent {
    LongPress {
        regions: Vec<(u32, String, u64)>,
        global_prompt: String,
        global_description: String,
        timing: Timings,
    },
    Tap { u: f64, v: f64, response: TouchResponse },
    SwipeSample { u: f64, v: f64, response: TouchResponse },
    DoubleTap { u: f64, v: f64, description: LocalDescription },
    Error { step: String, message: String },
}

/// Plays `gestures` against a fresh session. Gesture errors become
/// [`ReplayEvent::Error`] entries and the replay continues.
pub fn replay(
    service: &SceneService,
    rgb: &RgbImage,
    depth: Option<&DepthImage>,
    gestures: &[Gesture],
) -> Vec<ReplayEvent> {
    let mut session = Session::new();
    let mut events = Vec::new();
    for g in gestures {
        match g {
            Gesture::LongPress => match service.capture(&mut session, rgb.clone(), depth.cloned()) {
                Ok(a) => events.push(ReplayEvent::LongPress {
                    regions: a.regions.iter().map(|r| (r.region_id, r.class_name.clone(), r.pixel_area)).collect(),
                    global_prompt: a.global_prompt.clone(),
                    global_description: a.global_description.clone(),
                    timing: a.timing.clone(),
                }),
                Err(e) => events.push(ReplayEvent::Error { step: "long_press".into(), message: e.to_string() }),
            },
            &Gesture::Tap { u, v } => match service.touch(&mut session, u, v) {
                Ok(response) => events.push(ReplayEvent::Tap { u, v, response }),
                Err(e) => events.push(ReplayEvent::Error { step: "tap".into(), message: e.to_string() }),
            },
            &Gesture::Swipe { from, to, samples } => {
                for (u, v) in Gesture::swipe_points(from, to, samples) {
                    match service.touch(&mut session, u, v) {
                        Ok(response) => events.push(ReplayEvent::SwipeSample { u, v, response }),
                        Err(e) => events.push(ReplayEvent::Error { step: "swipe".into(), message: e.to_string() }),
                    }
                }
            }
            &Gesture::DoubleTap { u, v } => match service.inspect(&session, u, v) {
                Ok(description) => events.push(ReplayEvent::DoubleTap { u, v, description }),
                Err(e) => events.push(ReplayEvent::Error { step: "double_tap".into(), message: e.to_string() }),
            },
        }
    }
    events
}
