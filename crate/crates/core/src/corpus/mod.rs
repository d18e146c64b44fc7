//! Publication data model and corpus files.
//!
//! A corpus file is UTF-8 text. The first line is the header
//! `format=qf-corpus-1`; every following non-blank line is one JSON object
//! with the keys `id`, `authors`, `title`, `year` and `venue`.

mod datasets;
mod noise;
pub mod synth;

pub use datasets::{generate_datasets, load_datasets, save_datasets, Category, Dataset};
pub use noise::{build_index, IndexProvenance, NoiseProfile};

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CORPUS_FORMAT: &str = "qf-corpus-1";
pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("invalid publication {id:?}: {reason}")]
    Invalid { id: String, reason: String },
    #[error("infeasible dataset cell ({category}, size {size}): {reason}")]
    InfeasibleCell {
        category: Category,
        size: usize,
        reason: String,
    },
    #[error("invalid noise profile: {0}")]
    InvalidProfile(String),
    #[error("invalid dataset {id:?}: {reason}")]
    InvalidDataset { id: String, reason: String },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// A bibliographic entity. Input sets and search results share this type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Publication {
    pub id: String,
    pub authors: Vec<String>,
    pub title: String,
    pub year: i32,
    pub venue: String,
}

impl Publication {
    pub fn new(
        id: impl Into<String>,
        authors: &[&str],
        title: impl Into<String>,
        year: i32,
        venue: impl Into<String>,
    ) -> Self {
        Publication {
            id: id.into(),
            authors: authors.iter().map(|a| a.to_string()).collect(),
            title: title.into(),
            year,
            venue: venue.into(),
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |reason: &str| CorpusError::Invalid {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.trim().is_empty() {
            return Err(invalid("empty id"));
        }
        if self.authors.is_empty() {
            return Err(invalid("no authors"));
        }
        if self.authors.iter().any(|a| a.trim().is_empty()) {
            return Err(invalid("empty author name"));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(invalid("year out of range"));
        }
        Ok(())
    }
}

impl fmt::Display for Publication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} / {} ({}, {})",
            self.id,
            self.authors.join(", "),
            self.title,
            self.venue,
            self.year
        )
    }
}

/// A publication attribute that queries and generators can refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Authors,
    Title,
    Year,
    Venue,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [
        Attribute::Authors,
        Attribute::Title,
        Attribute::Year,
        Attribute::Venue,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Authors => "authors",
            Attribute::Title => "title",
            Attribute::Year => "year",
            Attribute::Venue => "venue",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Attribute {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown attribute {s:?}"))
    }
}

/// An ordered collection of publications with unique ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    publications: Vec<Publication>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(publications: Vec<Publication>) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(publications.len());
        for (i, p) in publications.iter().enumerate() {
            p.validate()?;
            if by_id.insert(p.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(p.id.clone()));
            }
        }
        Ok(Corpus {
            publications,
            by_id,
        })
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Publication> {
        self.publications.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Publication> {
        self.by_id.get(id).map(|&i| &self.publications[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Resolves dataset member ids, in the given order.
    pub fn resolve<'a>(&'a self, ids: &[String]) -> Option<Vec<&'a Publication>> {
        ids.iter().map(|id| self.get(id)).collect()
    }

    pub fn into_publications(self) -> Vec<Publication> {
        self.publications
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Publication;
    type IntoIter = std::slice::Iter<'a, Publication>;
    fn into_iter(self) -> Self::IntoIter {
        self.publications.iter()
    }
}

/// Reads a versioned header line of the form `format=<name>`.
pub(crate) fn check_header(line: Option<&str>, expected: &str) -> Result<(), CorpusError> {
    let Some(line) = line else {
        return Ok(());
    };
    let found = line
        .split_once('=')
        .filter(|(k, _)| k.trim() == "format")
        .map(|(_, v)| v.trim());
    match found {
        Some(v) if v == expected => Ok(()),
        Some(v) => Err(CorpusError::Malformed {
            line: 1,
            message: format!("expected format {expected}, found {v}"),
        }),
        None => Err(CorpusError::Malformed {
            line: 1,
            message: format!("missing header line format={expected}"),
        }),
    }
}

pub fn parse_corpus(reader: impl BufRead) -> Result<Corpus, CorpusError> {
    let mut publications = Vec::new();
    let lines = reader.lines().enumerate();
    let mut header_seen = false;
    for (i, line) in lines {
        let line = line.map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            check_header(Some(&line), CORPUS_FORMAT).map_err(|e| match e {
                CorpusError::Malformed { message, .. } => CorpusError::Malformed {
                    line: i + 1,
                    message,
                },
                other => other,
            })?;
            header_seen = true;
            continue;
        }
        let p: Publication = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        p.validate().map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        publications.push(p);
    }
    Corpus::new(publications)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    parse_corpus(io::BufReader::new(file))
}

pub fn write_corpus<'a>(
    mut w: impl Write,
    publications: impl IntoIterator<Item = &'a Publication>,
) -> io::Result<()> {
    writeln!(w, "format={CORPUS_FORMAT}")?;
    for p in publications {
        serde_json::to_writer(&mut w, p)?;
        writeln!(w)?;
    }
    w.flush()
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
    write_corpus(io::BufWriter::new(file), corpus).map_err(|e| CorpusError::io(path, e))
}

/// The three fictional publications used throughout the worked examples.
/// Years and venues are not part of the original table and are filled in.
pub fn example_publications() -> Vec<Publication> {
    vec![
        Publication::new("s1", &["Smith", "Jones"], "The question to 42", 2005, "Journal of Improbable Results"),
        Publication::new("s2", &["Williams", "Smith"], "Don't Panic!", 2006, "Journal of Improbable Results"),
        Publication::new("s3", &["Taylor"], "The Hitchhiker's Guide to the Galaxy", 1979, "Pan Books"),
    ]
}
