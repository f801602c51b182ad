use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub code: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

impl Category {
    pub fn top(code: &str, label: &str) -> Self {
        Category {
            code: code.to_string(),
            label: label.to_string(),
            parent: None,
        }
    }

    pub fn child(code: &str, label: &str, parent: &str) -> Self {
        Category {
            code: code.to_string(),
            label: label.to_string(),
            parent: Some(parent.to_string()),
        }
    }

    pub fn is_top_level(&self) -> bool {
        self.parent.is_none()
    }
}

/// Hierarchical category inventory. Every category resolves to exactly one
/// top-level ancestor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCodebook", into = "RawCodebook")]
pub struct Codebook {
    name: String,
    categories: Vec<Category>,
    #[serde(skip)]
    top_of: HashMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct RawCodebook {
    name: String,
    categories: Vec<Category>,
}

impl TryFrom<RawCodebook> for Codebook {
    type Error = Error;

    fn try_from(raw: RawCodebook) -> Result<Self> {
        Codebook::new(raw.name, raw.categories)
    }
}

impl From<Codebook> for RawCodebook {
    fn from(cb: Codebook) -> Self {
        RawCodebook {
            name: cb.name,
            categories: cb.categories,
        }
    }
}

impl Codebook {
    pub fn new(name: impl Into<String>, categories: Vec<Category>) -> Result<Self> {
        let mut by_code: HashMap<&str, &Category> = HashMap::new();
        for c in &categories {
            if c.code.is_empty() {
                return Err(Error::Validation("category with empty code".into()));
            }
            if by_code.insert(&c.code, c).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate category code `{}`",
                    c.code
                )));
            }
        }

        let mut top_of = HashMap::with_capacity(categories.len());
        for c in &categories {
            let mut seen = HashSet::new();
            let mut cur = c;
            while let Some(parent) = &cur.parent {
                if !seen.insert(cur.code.as_str()) {
                    return Err(Error::Validation(format!(
                        "category hierarchy cycle through `{}`",
                        c.code
                    )));
                }
                cur = by_code.get(parent.as_str()).ok_or_else(|| {
                    Error::Validation(format!(
                        "category `{}` references unknown parent `{parent}`",
                        cur.code
                    ))
                })?;
            }
            top_of.insert(c.code.clone(), cur.code.clone());
        }

        Ok(Codebook {
            name: name.into(),
            categories,
            top_of,
        })
    }

    /// The eight top-level migration-policy categories of the DebateNet
    /// codebook.
    pub fn debatenet() -> Self {
        let cats = [
            ("C1", "Controlling Migration"),
            ("C2", "Residency"),
            ("C3", "Integration"),
            ("C4", "Domestic Security"),
            ("C5", "Foreign Policy"),
            ("C6", "Economy + Labour Market"),
            ("C7", "Society"),
            ("C8", "Procedures"),
        ]
        .into_iter()
        .map(|(code, label)| Category::top(code, label))
        .collect();
        Codebook::new("debatenet-top-level", cats).expect("builtin codebook is valid")
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawCodebook = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn contains(&self, code: &str) -> bool {
        self.top_of.contains_key(code)
    }

    pub fn get(&self, code: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.code == code)
    }

    /// Top-level ancestor of `code` (itself when already top-level).
    pub fn top_level_of(&self, code: &str) -> Option<&str> {
        self.top_of.get(code).map(String::as_str)
    }

    /// Top-level codes in codebook order. This is the label space of the
    /// categorization task.
    pub fn top_level_codes(&self) -> Vec<String> {
        self.categories
            .iter()
            .filter(|c| c.is_top_level())
            .map(|c| c.code.clone())
            .collect()
    }
}
