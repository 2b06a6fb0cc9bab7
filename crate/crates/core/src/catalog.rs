//! Object catalog: the pool of food and household items the task generator
//! draws from, plus the plural forms used in perception responses.
//!
//! The on-disk format is line oriented, one entry per line:
//!
//! ```text
//! # comment
//! name,category[,plural]
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

const DEFAULT_CATALOG: &str = include_str!("../data/catalog.txt");

/// Names every catalog shipped with the harness must contain.
pub const REQUIRED_NAMES: [&str; 6] = ["pen", "spoon", "comb", "orange", "fork", "sponge"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Food,
    Household,
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "food" => Ok(Self::Food),
            "household" => Ok(Self::Household),
            other => Err(format!("unknown category `{other}`")),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Food => "food",
            Self::Household => "household",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plural: Option<String>,
}

impl CatalogEntry {
    pub fn plural(&self) -> String {
        self.plural.clone().unwrap_or_else(|| format!("{}s", self.name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectCatalog {
    entries: Vec<CatalogEntry>,
}

impl ObjectCatalog {
    /// Builds a catalog, rejecting empty, non-lowercase or duplicate names.
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self, Error> {
        if entries.is_empty() {
            return Err(Error::Catalog("catalog is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for entry in &entries {
            let name = entry.name.as_str();
            if name.is_empty() {
                return Err(Error::Catalog("object name is empty".into()));
            }
            if name != name.to_lowercase() || name.contains(',') || name.trim() != name {
                return Err(Error::Catalog(format!("object name `{name}` must be lowercase without commas or padding")));
            }
            if !seen.insert(name) {
                return Err(Error::Catalog(format!("duplicate object name `{name}`")));
            }
        }
        Ok(Self { entries })
    }

    /// Parses the `name,category[,plural]` text format.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |msg: String| Error::Catalog(format!("line {}: {msg}", idx + 1));
            if !(2..=3).contains(&fields.len()) {
                return Err(bad(format!("expected `name,category[,plural]`, got `{line}`")));
            }
            let category = fields[1].parse::<Category>().map_err(bad)?;
            let plural = match fields.get(2) {
                Some(p) if p.is_empty() => return Err(bad("empty plural".into())),
                Some(p) => Some(p.to_string()),
                None => None,
            };
            entries.push(CatalogEntry { name: fields[0].to_string(), category, plural });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Catalog(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.name);
            out.push(',');
            out.push_str(&e.category.to_string());
            if let Some(p) = &e.plural {
                out.push(',');
                out.push_str(p);
            }
            out.push('\n');
        }
        out
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Plural form of `name`. Names outside the catalog get a trailing "s".
    pub fn plural(&self, name: &str) -> String {
        match self.get(name) {
            Some(entry) => entry.plural(),
            None => format!("{name}s"),
        }
    }

    /// Bare name for a count of one, plural otherwise (zero included).
    pub fn counted(&self, name: &str, count: u32) -> String {
        if count == 1 {
            name.to_string()
        } else {
            self.plural(name)
        }
    }
}

impl Default for ObjectCatalog {
    fn default() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }
}
