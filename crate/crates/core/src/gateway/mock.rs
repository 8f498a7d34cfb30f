// SPDX-License-Identifier: Apache-2.0

//! Deterministic in-process backends.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::raster::{LabelMap, RgbImage};
use crate::taxonomy::{ClassTaxonomy, BACKGROUND_ID};

use super::{Describer, DescriberCaps, Segmentation, Segmenter, SegmenterCaps};

/// Failure a mock backend can be told to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockFailure {
    Timeout,
    Protocol,
}

impl MockFailure {
    fn to_error(self) -> Error {
        match self {
            MockFailure::Timeout => Error::BackendUnavailable("mock timeout".into()),
            MockFailure::Protocol => Error::protocol("mock malformed response"),
        }
    }
}

/// Fixture color for a class id. Distinct for every id below 256.
pub fn palette_color(class_id: u16) -> [u8; 3] {
    let id = class_id as u32;
    [((id * 53 + 40) % 256) as u8, ((id * 97 + 80) % 256) as u8, ((id * 29 + 120) % 256) as u8]
}

/// Segmenter that returns stored fixtures by image content hash and falls
/// back to reading classes off [`palette_color`]s. Unknown colors are
/// background.
pub struct MockSegmenter {
    taxonomy: Arc<ClassTaxonomy>,
    fixtures: HashMap<String, LabelMap>,
    palette: HashMap<[u8; 3], u16>,
    max_pixels: Option<u64>,
    latency: Option<Duration>,
    failure: Mutex<Option<MockFailure>>,
    calls: AtomicUsize,
}

impl MockSegmenter {
    pub fn new(taxonomy: Arc<ClassTaxonomy>) -> Self {
        let palette = taxonomy
            .entries()
            .iter()
            .filter(|e| e.id != BACKGROUND_ID)
            .map(|e| (palette_color(e.id), e.id))
            .collect();
        Self {
            taxonomy,
            fixtures: HashMap::new(),
            palette,
            max_pixels: None,
            latency: None,
            failure: Mutex::new(None),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn with_fixture(mut self, image: &RgbImage, labels: LabelMap) -> Self {
        self.fixtures.insert(image.content_hash(), labels);
        self
    }

    pub fn with_max_pixels(mut self, max: u64) -> Self {
        self.max_pixels = Some(max);
        self
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = Some(latency);
        self
    }

    pub fn set_failure(&self, failure: Option<MockFailure>) {
        *self.failure.lock().unwrap() = failure;
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn taxonomy(&self) -> &Arc<ClassTaxonomy> {
        &self.taxonomy
    }
}

impl Segmenter for MockSegmenter {
    fn capabilities(&self) -> SegmenterCaps {
        SegmenterCaps { taxonomy: Some(self.taxonomy.clone()), max_pixels: self.max_pixels }
    }

    fn segment(&self, image: &RgbImage) -> Result<Segmentation> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(d) = self.latency {
            std::thread::sleep(d);
        }
        if let Some(f) = *self.failure.lock().unwrap() {
            return Err(f.to_error());
        }
        let labels = match self.fixtures.get(&image.content_hash()) {
            Some(map) => map.clone(),
            None => {
                let labels = image
                    .pixels()
                    .iter()
                    .map(|p| self.palette.get(p).copied().unwrap_or(BACKGROUND_ID))
                    .collect();
                LabelMap::new(image.width(), image.height(), labels)?
            }
        };
        Ok(Segmentation { labels, taxonomy: self.taxonomy.clone() })
    }
}

/// One recorded describer request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescribeCall {
    pub image_hash: String,
    pub width: u32,
    pub height: u32,
    pub prompt: String,
}

type ReplyFn = dyn Fn(&RgbImage, &str) -> String + Send + Sync;

#[derive(Clone)]
pub enum MockReply {
    /// `"MOCK: "` followed by the taxonomy class names mentioned in the
    /// prompt, in order of first mention.
    Echo(Arc<ClassTaxonomy>),
    Constant(String),
    Custom(Arc<ReplyFn>),
}

pub struct MockDescriber {
    reply: MockReply,
    max_prompt_chars: usize,
    latency: Option<Duration>,
    failure: Mutex<Option<MockFailure>>,
    log: Mutex<Vec<DescribeCall>>,
}

impl MockDescriber {
    pub fn new(reply: MockReply) -> Self {
        Self {
            reply,
            max_prompt_chars: DescriberCaps::default().max_prompt_chars,
            latency: None,
            failure: Mutex::new(None),
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn echo(taxonomy: Arc<ClassTaxonomy>) -> Self {
        Self::new(MockReply::Echo(taxonomy))
    }

    pub fn constant(text: impl Into<String>) -> Self {
        Self::new(MockReply::Constant(text.into()))
    }

    pub fn custom(f: impl Fn(&RgbImage, &str) -> String + Send + Sync + 'static) -> Self {
        Self::new(MockReply::Custom(Arc::new(f)))
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = Some(latency);
        self
    }

    pub fn with_max_prompt_chars(mut self, max: usize) -> Self {
        self.max_prompt_chars = max;
        self
    }

    pub fn set_failure(&self, failure: Option<MockFailure>) {
        *self.failure.lock().unwrap() = failure;
    }

    pub fn calls(&self) -> Vec<DescribeCall> {
        self.log.lock().unwrap().clone()
    }

    pub fn clear_calls(&self) {
        self.log.lock().unwrap().clear();
    }
}

fn is_word_char(c: Option<char>) -> bool {
    c.is_some_and(char::is_alphanumeric)
}

/// Byte offset of the first whole-word mention of `name` (plural suffixes
/// "s"/"es" allowed), if any.
fn first_mention(text: &str, name: &str) -> Option<usize> {
    let lower = text.to_lowercase();
    let name = name.to_lowercase();
    let mut from = 0;
    while let Some(pos) = lower[from..].find(&name) {
        let start = from + pos;
        let end = start + name.len();
        let before = lower[..start].chars().next_back();
        let rest = &lower[end..];
        let suffix_len = ["es", "s"]
            .iter()
            .find(|s| rest.starts_with(*s) && !is_word_char(rest[s.len()..].chars().next()))
            .map_or(0, |s| s.len());
        if !is_word_char(before) && !is_word_char(rest[suffix_len..].chars().next()) {
            return Some(start);
        }
        from = start + 1;
        while !lower.is_char_boundary(from) {
            from += 1;
        }
    }
    None
}

/// The echo reply for `prompt` under `taxonomy`.
pub fn echo_reply(taxonomy: &ClassTaxonomy, prompt: &str) -> String {
    let mut found: Vec<(usize, &str)> =
        taxonomy.object_names().filter_map(|n| first_mention(prompt, n).map(|p| (p, n))).collect();
    found.sort();
    if found.is_empty() {
        "MOCK: (none)".to_string()
    } else {
        format!("MOCK: {}", found.iter().map(|f| f.1).collect::<Vec<_>>().join(", "))
    }
}

impl Describer for MockDescriber {
    fn capabilities(&self) -> DescriberCaps {
        DescriberCaps { max_prompt_chars: self.max_prompt_chars, supports_image: true }
    }

    fn describe(&self, image: &RgbImage, prompt: &str) -> Result<String> {
        self.log.lock().unwrap().push(DescribeCall {
            image_hash: image.content_hash(),
            width: image.width(),
            height: image.height(),
            prompt: prompt.to_string(),
        });
        if let Some(d) = self.latency {
            std::thread::sleep(d);
        }
        if let Some(f) = *self.failure.lock().unwrap() {
            return Err(f.to_error());
        }
        Ok(match &self.reply {
            MockReply::Echo(tax) => echo_reply(tax, prompt),
            MockReply::Constant(s) => s.clone(),
            MockReply::Custom(f) => f(image, prompt),
        })
    }
}
