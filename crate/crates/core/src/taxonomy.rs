// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BACKGROUND_ID: u16 = 0;
pub const BACKGROUND_NAME: &str = "background";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub id: u16,
    pub name: String,
}

/// Ordered class list. Id 0 is always `background`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TaxonomyFile", into = "TaxonomyFile")]
pub struct ClassTaxonomy {
    entries: Vec<TaxonomyEntry>,
    by_id: HashMap<u16, usize>,
}

#[derive(Serialize, Deserialize)]
struct TaxonomyFile {
    classes: Vec<TaxonomyEntry>,
}

impl TryFrom<TaxonomyFile> for ClassTaxonomy {
    type Error = Error;

    fn try_from(file: TaxonomyFile) -> Result<Self> {
        ClassTaxonomy::new(file.classes)
    }
}

impl From<ClassTaxonomy> for TaxonomyFile {
    fn from(t: ClassTaxonomy) -> Self {
        TaxonomyFile { classes: t.entries }
    }
}

impl ClassTaxonomy {
    pub fn new(entries: Vec<TaxonomyEntry>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(entries.len());
        let mut names = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if e.name.trim().is_empty() {
                return Err(Error::invalid_config(format!("class {} has an empty name", e.id)));
            }
            if by_id.insert(e.id, i).is_some() {
                return Err(Error::invalid_config(format!("duplicate class id {}", e.id)));
            }
            if !names.insert(e.name.as_str()) {
                return Err(Error::invalid_config(format!("duplicate class name {:?}", e.name)));
            }
        }
        match by_id.get(&BACKGROUND_ID) {
            Some(&i) if entries[i].name == BACKGROUND_NAME => {}
            _ => {
                return Err(Error::invalid_config(
                    "class id 0 must be present and named \"background\"",
                ))
            }
        }
        Ok(Self { entries, by_id })
    }

    /// Builds a taxonomy from names; index in the slice becomes the id, and
    /// `background` is prepended as id 0.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut entries = vec![TaxonomyEntry { id: BACKGROUND_ID, name: BACKGROUND_NAME.into() }];
        for (i, n) in names.iter().enumerate() {
            let id = u16::try_from(i + 1)
                .map_err(|_| Error::invalid_config("too many classes for 16-bit ids"))?;
            entries.push(TaxonomyEntry { id, name: n.as_ref().to_string() });
        }
        Self::new(entries)
    }

    /// Indoor/outdoor classes used by the demo fixtures and mock backends.
    pub fn builtin() -> Self {
        Self::from_names(&[
            "wall", "floor", "ceiling", "window", "door", "table", "chair", "sofa", "bed",
            "cabinet", "shelf", "lamp", "flowerpot", "person", "bicycle", "car", "bottle", "cup",
            "laptop", "television", "stairs", "sink", "refrigerator", "clock",
        ])
        .expect("builtin taxonomy is valid")
    }

    pub fn entries(&self) -> &[TaxonomyEntry] {
        &self.entries
    }

    pub fn contains(&self, id: u16) -> bool {
        self.by_id.contains_key(&id)
    }

    pub fn name(&self, id: u16) -> Option<&str> {
        self.by_id.get(&id).map(|&i| self.entries[i].name.as_str())
    }

    pub fn id_of(&self, name: &str) -> Option<u16> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.id)
    }

    /// Names of every non-background class.
    pub fn object_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter(|e| e.id != BACKGROUND_ID).map(|e| e.name.as_str())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid_config(format!("taxonomy: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Loads `.json` or `.toml` by extension.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_toml(&text),
        }
    }
}
