// SPDX-License-Identifier: Apache-2.0

//! Benchmark records, JSON-lines IO and converters from native formats.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }
}

impl FromStr for Answer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" => Ok(Answer::Yes),
            "no" => Ok(Answer::No),
            other => Err(Error::invalid_input(format!("answer {other:?} is neither yes nor no"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Popular,
    Adversarial,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Adversarial, Strategy::Random, Strategy::Popular];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Popular => "popular",
            Strategy::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "popular" => Ok(Strategy::Popular),
            "adversarial" => Ok(Strategy::Adversarial),
            other => Err(Error::invalid_input(format!("unknown POPE strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopeRecord {
    pub image: String,
    pub question: String,
    pub ground_truth: Answer,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MmeSubtask {
    Existence,
    Count,
}

impl MmeSubtask {
    pub fn as_str(self) -> &'static str {
        match self {
            MmeSubtask::Existence => "existence",
            MmeSubtask::Count => "count",
        }
    }
}

impl FromStr for MmeSubtask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "existence" => Ok(MmeSubtask::Existence),
            "count" => Ok(MmeSubtask::Count),
            other => Err(Error::invalid_input(format!("unknown MME subtask {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmeQuestion {
    pub question: String,
    pub ground_truth: Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmeRecord {
    pub image: String,
    pub subtask: MmeSubtask,
    pub questions: Vec<MmeQuestion>,
}

impl MmeRecord {
    pub fn validate(&self) -> Result<()> {
        if self.questions.len() != 2 {
            return Err(Error::invalid_input(format!(
                "MME image {} has {} questions, expected 2",
                self.image,
                self.questions.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qa90Sample {
    pub image: String,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::invalid_input(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(std::fs::File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            Error::invalid_input(format!("{}:{}: {e}", path.display(), i + 1))
        })?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(mut w: impl Write, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Where benchmark images come from.
pub trait ImageSource: Send + Sync {
    fn load(&self, name: &str) -> Result<Arc<RgbImage>>;
}

/// Images on disk under one directory. Names may not escape it.
pub struct DirImageSource {
    root: PathBuf,
}

impl DirImageSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl ImageSource for DirImageSource {
    fn load(&self, name: &str) -> Result<Arc<RgbImage>> {
        let rel = Path::new(name);
        if rel.is_absolute() || rel.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
            return Err(Error::invalid_input(format!("image name {name:?} escapes the image directory")));
        }
        Ok(Arc::new(RgbImage::load(self.root.join(rel))?))
    }
}

#[derive(Default)]
pub struct MemoryImages {
    images: BTreeMap<String, Arc<RgbImage>>,
}

impl MemoryImages {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, image: RgbImage) {
        self.images.insert(name.into(), Arc::new(image));
    }
}

impl ImageSource for MemoryImages {
    fn load(&self, name: &str) -> Result<Arc<RgbImage>> {
        self.images
            .get(name)
            .cloned()
            .ok_or_else(|| Error::invalid_input(format!("no image named {name:?}")))
    }
}

/// Groups items by image name, keeping first-appearance order of images and
/// input order within each group.
pub(crate) fn group_by_image<'a, T>(items: &'a [T], image: impl Fn(&T) -> &str) -> Vec<(&'a str, Vec<usize>)>
where
    T: 'a,
{
    let mut order: Vec<(&str, Vec<usize>)> = Vec::new();
    let mut slot: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for (i, item) in items.iter().enumerate() {
        let name = image(item);
        let s = *slot.entry(name).or_insert_with(|| {
            order.push((name, Vec::new()));
            order.len() - 1
        });
        order[s].1.push(i);
    }
    order
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelBalance {
    pub yes: u64,
    pub no: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopeImport {
    pub records: Vec<PopeRecord>,
    /// questions-per-image -> number of images.
    pub questions_per_image: BTreeMap<usize, usize>,
    pub balance: LabelBalance,
}

#[derive(Deserialize)]
struct NativePopeLine {
    image: String,
    #[serde(alias = "question")]
    text: String,
    #[serde(alias = "answer")]
    label: String,
}

/// Converts the benchmark's own JSON-lines (`image`, `text`, `label`) for one
/// sampling strategy. Any number of questions per image is accepted and
/// reported as a histogram.
pub fn import_pope(native: &str, strategy: Strategy) -> Result<PopeImport> {
    let lines: Vec<NativePopeLine> = parse_jsonl(native)?;
    let mut records = Vec::with_capacity(lines.len());
    let mut balance = LabelBalance::default();
    for (i, l) in lines.into_iter().enumerate() {
        let ground_truth: Answer =
            l.label.parse().map_err(|e| Error::invalid_input(format!("record {}: {e}", i + 1)))?;
        match ground_truth {
            Answer::Yes => balance.yes += 1,
            Answer::No => balance.no += 1,
        }
        records.push(PopeRecord { image: l.image, question: l.text, ground_truth, strategy });
    }
    let mut questions_per_image = BTreeMap::new();
    for (_, idx) in group_by_image(&records, |r| r.image.as_str()) {
        *questions_per_image.entry(idx.len()).or_insert(0) += 1;
    }
    Ok(PopeImport { records, questions_per_image, balance })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmeImport {
    pub records: Vec<MmeRecord>,
    /// Images skipped because they did not have exactly two questions.
    pub rejected: Vec<(String, usize)>,
}

/// Converts MME's tab-separated `image<TAB>question<TAB>answer` lines.
pub fn import_mme(native: &str, subtask: MmeSubtask) -> Result<MmeImport> {
    let mut rows = Vec::new();
    for (i, line) in native.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::invalid_input(format!("line {}: expected 3 tab-separated fields", i + 1)));
        }
        let ground_truth: Answer =
            cols[2].parse().map_err(|e| Error::invalid_input(format!("line {}: {e}", i + 1)))?;
        rows.push((cols[0].trim().to_string(), MmeQuestion { question: cols[1].trim().to_string(), ground_truth }));
    }
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (image, idx) in group_by_image(&rows, |r| r.0.as_str()) {
        if idx.len() == 2 {
            records.push(MmeRecord {
                image: image.to_string(),
                subtask,
                questions: idx.iter().map(|&i| rows[i].1.clone()).collect(),
            });
        } else {
            rejected.push((image.to_string(), idx.len()));
        }
    }
    Ok(MmeImport { records, rejected })
}
