// SPDX-License-Identifier: Apache-2.0

//! External-knowledge prompt construction.
//!
//! Segmented regions are folded into an [`ObjectInventory`] and rendered as a
//! single knowledge sentence ahead of the ordinary prompt and the query. The
//! sentence names every inventoried class exactly once, with its instance
//! count, and nothing else.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::ObjectRegion;

pub const OBJECTS_PLACEHOLDER: &str = "{objects}";
pub const CLASS_PLACEHOLDER: &str = "{class}";

const DEFAULT_TEMPLATE: &str = include_str!("../config/prompt_template.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub knowledge_sentence: String,
    pub empty_knowledge: String,
    pub ordinary_prompt: String,
    pub default_query: String,
    pub local_query: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TEMPLATE).expect("bundled template is valid")
    }
}

impl PromptTemplate {
    pub fn from_toml(text: &str) -> Result<Self> {
        let tpl: Self =
            toml::from_str(text).map_err(|e| Error::invalid_config(format!("prompt template: {e}")))?;
        tpl.validate()?;
        Ok(tpl)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("knowledge_sentence", &self.knowledge_sentence, Some(OBJECTS_PLACEHOLDER)),
            ("empty_knowledge", &self.empty_knowledge, None),
            ("ordinary_prompt", &self.ordinary_prompt, None),
            ("default_query", &self.default_query, None),
            ("local_query", &self.local_query, Some(CLASS_PLACEHOLDER)),
        ];
        for (key, text, required) in fields {
            if text.trim().is_empty() {
                return Err(Error::invalid_config(format!("template {key} is empty")));
            }
            for ph in [OBJECTS_PLACEHOLDER, CLASS_PLACEHOLDER] {
                let n = text.matches(ph).count();
                let want = usize::from(required == Some(ph));
                if n != want {
                    return Err(Error::invalid_config(format!(
                        "template {key} must contain {ph} {want} time(s), found {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryEntry {
    pub class_name: String,
    pub count: u32,
    /// Summed region area over the image area, in (0, 1].
    pub area_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectInventory {
    pub entries: Vec<InventoryEntry>,
}

impl ObjectInventory {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Groups regions by class, largest total area first. Ties keep the order in
/// which classes first appear in `regions`.
pub fn summarize_regions(regions: &[ObjectRegion], image_area: u64) -> ObjectInventory {
    let mut groups: Vec<(String, u32, u64)> = Vec::new();
    for r in regions {
        match groups.iter_mut().find(|g| g.0 == r.class_name) {
            Some(g) => {
                g.1 += 1;
                g.2 += r.pixel_area;
            }
            None => groups.push((r.class_name.clone(), 1, r.pixel_area)),
        }
    }
    groups.sort_by_key(|g| std::cmp::Reverse(g.2));
    let area = image_area.max(1) as f64;
    ObjectInventory {
        entries: groups
            .into_iter()
            .map(|(class_name, count, total)| InventoryEntry {
                class_name,
                count,
                area_fraction: total as f64 / area,
            })
            .collect(),
    }
}

// Words whose plural is the word itself.
const INVARIANT_PLURALS: &[&str] =
    &["stairs", "sheep", "deer", "fish", "glasses", "scissors", "clothes", "pants", "grass"];

/// Suffix-only English plural, so the singular always survives verbatim.
pub fn pluralize(name: &str) -> String {
    let last = name.rsplit(' ').next().unwrap_or(name);
    if INVARIANT_PLURALS.contains(&last) {
        return name.to_string();
    }
    if ["s", "x", "z", "ch", "sh"].iter().any(|s| last.ends_with(s)) {
        format!("{name}es")
    } else {
        format!("{name}s")
    }
}

fn render_entry(e: &InventoryEntry) -> String {
    let noun = if e.count == 1 { e.class_name.clone() } else { pluralize(&e.class_name) };
    format!("{} {noun}", e.count)
}

/// The knowledge sentence alone, e.g. "The image contains the following
/// objects: 1 table, 2 chairs."
pub fn knowledge_sentence(inv: &ObjectInventory, tpl: &PromptTemplate) -> String {
    if inv.is_empty() {
        return tpl.empty_knowledge.clone();
    }
    let list = inv.entries.iter().map(render_entry).collect::<Vec<_>>().join(", ");
    tpl.knowledge_sentence.replacen(OBJECTS_PLACEHOLDER, &list, 1)
}

/// Knowledge sentence, ordinary prompt and `query`, in that order.
pub fn build_augmented_prompt(inv: &ObjectInventory, tpl: &PromptTemplate, query: &str) -> String {
    format!("{} {} {}", knowledge_sentence(inv, tpl), tpl.ordinary_prompt, query)
}

pub fn build_global_prompt(inv: &ObjectInventory, tpl: &PromptTemplate) -> String {
    build_augmented_prompt(inv, tpl, &tpl.default_query)
}

pub fn build_local_prompt(class_name: &str, tpl: &PromptTemplate) -> Result<String> {
    if class_name.trim().is_empty() {
        return Err(Error::invalid_input("class name for a local prompt is empty"));
    }
    Ok(tpl.local_query.replacen(CLASS_PLACEHOLDER, class_name, 1))
}
