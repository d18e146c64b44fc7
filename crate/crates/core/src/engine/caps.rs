//! Declarative search capabilities of an engine.
//!
//! Profiles load from TOML files whose `format` key is `qf-caps-1`:
//!
//! ```toml
//! format = "qf-caps-1"
//! id = "amazon-books"
//! supports_or = true
//! max_disjuncts = 10
//! page_size = 12
//! max_pages = 10
//! soft_and_threshold = 1.0
//!
//! [[predicate]]
//! name = "title"
//! field = "title"          # or "free"
//! accepts = ["value", "keywords", "phrase"]
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::query::ValueKind;
use crate::corpus::Attribute;

pub const CAPS_FORMAT: &str = "qf-caps-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredicateScope {
    /// Tests a single attribute.
    Field(Attribute),
    /// Tests the concatenation of all attributes.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDescriptor {
    pub name: String,
    pub scope: PredicateScope,
    pub accepts: BTreeSet<ValueKind>,
}

impl PredicateDescriptor {
    pub fn new(name: &str, scope: PredicateScope, accepts: &[ValueKind]) -> Self {
        PredicateDescriptor {
            name: name.to_string(),
            scope,
            accepts: accepts.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineCapabilities {
    pub id: String,
    pub predicates: Vec<PredicateDescriptor>,
    pub supports_or: bool,
    /// Upper bound on basic queries OR-combined into one query.
    pub max_disjuncts: usize,
    /// Maximum result entities per request.
    pub page_size: usize,
    pub max_pages: usize,
    /// Fraction of a basic query's terms an entity must satisfy.
    pub soft_and_threshold: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CapsError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse capabilities: {0}")]
    Parse(String),
    #[error("invalid capabilities: {0}")]
    Invalid(String),
}

impl EngineCapabilities {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDescriptor> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn validate(&self) -> Result<(), CapsError> {
        let invalid = |m: String| Err(CapsError::Invalid(m));
        if self.page_size < 1 {
            return invalid("page_size must be at least 1".into());
        }
        if self.max_pages < 1 {
            return invalid("max_pages must be at least 1".into());
        }
        if self.max_disjuncts < 1 {
            return invalid("max_disjuncts must be at least 1".into());
        }
        if !self.supports_or && self.max_disjuncts != 1 {
            return invalid("max_disjuncts must be 1 when OR is not supported".into());
        }
        if !(self.soft_and_threshold > 0.0 && self.soft_and_threshold <= 1.0) {
            return invalid("soft_and_threshold must lie in (0,1]".into());
        }
        let mut names = BTreeSet::new();
        for p in &self.predicates {
            if p.accepts.is_empty() {
                return invalid(format!("predicate {} accepts no value kind", p.name));
            }
            if !names.insert(p.name.as_str()) {
                return invalid(format!("predicate {} declared twice", p.name));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CapsError> {
        let file: CapsFile = toml::from_str(text).map_err(|e| CapsError::Parse(e.to_string()))?;
        if file.format != CAPS_FORMAT {
            return Err(CapsError::Parse(format!(
                "expected format {CAPS_FORMAT}, found {}",
                file.format
            )));
        }
        let predicates = file
            .predicate
            .into_iter()
            .map(|p| {
                let scope = if p.field == "free" {
                    PredicateScope::Free
                } else {
                    PredicateScope::Field(p.field.parse().map_err(CapsError::Parse)?)
                };
                Ok(PredicateDescriptor {
                    name: p.name,
                    scope,
                    accepts: p.accepts.into_iter().collect(),
                })
            })
            .collect::<Result<Vec<_>, CapsError>>()?;
        let caps = EngineCapabilities {
            id: file.id,
            predicates,
            supports_or: file.supports_or,
            max_disjuncts: file.max_disjuncts,
            page_size: file.page_size,
            max_pages: file.max_pages,
            soft_and_threshold: file.soft_and_threshold,
        };
        caps.validate()?;
        Ok(caps)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CapsError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CapsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = CapsFile {
            format: CAPS_FORMAT.to_string(),
            id: self.id.clone(),
            supports_or: self.supports_or,
            max_disjuncts: self.max_disjuncts,
            page_size: self.page_size,
            max_pages: self.max_pages,
            soft_and_threshold: self.soft_and_threshold,
            predicate: self
                .predicates
                .iter()
                .map(|p| PredicateFile {
                    name: p.name.clone(),
                    field: match p.scope {
                        PredicateScope::Free => "free".to_string(),
                        PredicateScope::Field(a) => a.as_str().to_string(),
                    },
                    accepts: p.accepts.iter().copied().collect(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("capabilities serialize")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapsFile {
    format: String,
    id: String,
    supports_or: bool,
    #[serde(default = "default_max_disjuncts")]
    max_disjuncts: usize,
    page_size: usize,
    #[serde(default = "default_max_pages")]
    max_pages: usize,
    #[serde(default = "default_threshold")]
    soft_and_threshold: f64,
    #[serde(default)]
    predicate: Vec<PredicateFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredicateFile {
    name: String,
    field: String,
    accepts: Vec<ValueKind>,
}

fn default_max_disjuncts() -> usize {
    10
}

fn default_max_pages() -> usize {
    10
}

fn default_threshold() -> f64 {
    1.0
}

/// Google-Scholar-like profile: `intitle`, `author`, `year` and `free`
/// predicates, OR aggregation, 100 entities per request.
pub fn scholar_profile() -> EngineCapabilities {
    use ValueKind::*;
    let text = [Value, Keywords, Phrase, Pattern];
    EngineCapabilities {
        id: "scholar".to_string(),
        predicates: vec![
            PredicateDescriptor::new("intitle", PredicateScope::Field(Attribute::Title), &text),
            PredicateDescriptor::new("author", PredicateScope::Field(Attribute::Authors), &text),
            PredicateDescriptor::new("year", PredicateScope::Field(Attribute::Year), &[Value]),
            PredicateDescriptor::new("free", PredicateScope::Free, &text),
        ],
        supports_or: true,
        max_disjuncts: 10,
        page_size: 100,
        max_pages: 10,
        soft_and_threshold: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scholar_values() {
        let caps = scholar_profile();
        caps.validate().unwrap();
        assert!(caps.predicate("intitle").unwrap().accepts.contains(&ValueKind::Pattern));
        assert_eq!(caps.page_size, 100);
        assert!(caps.supports_or);
        assert_eq!((caps.max_disjuncts, caps.max_pages), (10, 10));
        assert_eq!(caps.soft_and_threshold, 1.0);
        let names: Vec<_> = caps.predicates.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["intitle", "author", "year", "free"]);
    }

    #[test]
    fn toml_roundtrip() {
        let caps = scholar_profile();
        let text = caps.to_toml_string();
        assert!(text.starts_with("format = \"qf-caps-1\""));
        assert_eq!(EngineCapabilities::from_toml_str(&text).unwrap(), caps);
    }

    #[test]
    fn rejects_bad_profiles() {
        let mut caps = scholar_profile();
        caps.supports_or = false;
        assert!(caps.validate().is_err());
        caps.max_disjuncts = 1;
        caps.validate().unwrap();
        caps.page_size = 0;
        assert!(caps.validate().is_err());
        let text = scholar_profile().to_toml_string().replace("qf-caps-1", "qf-caps-0");
        assert!(matches!(EngineCapabilities::from_toml_str(&text), Err(CapsError::Parse(_))));
        let text = scholar_profile().to_toml_string().replace("\"title\"", "\"isbn\"");
        assert!(EngineCapabilities::from_toml_str(&text).is_err());
    }
}
