//! Seeded evaluation datasets drawn from a corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_header, Corpus, CorpusError, Publication};
use crate::seed;
use crate::text::{PersonName, Stopwords};

pub const DATASET_FORMAT: &str = "qf-dataset-1";

/// Resampling attempts per dataset when looking for a member set not yet
/// used in the same (category, size) cell.
const DISTINCT_RETRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Author,
    Title,
    Venue,
    Random,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Author,
        Category::Title,
        Category::Venue,
        Category::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Author => "Author",
            Category::Title => "Title",
            Category::Venue => "Venue",
            Category::Random => "Random",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub id: String,
    pub category: Category,
    pub size: usize,
    pub seed: u64,
    pub members: Vec<String>,
}

impl Dataset {
    /// Checks member resolution and the category constraint against `corpus`.
    pub fn validate(&self, corpus: &Corpus) -> Result<(), CorpusError> {
        let invalid = |reason: String| CorpusError::InvalidDataset {
            id: self.id.clone(),
            reason,
        };
        if self.members.len() != self.size {
            return Err(invalid(format!(
                "{} members for size {}",
                self.members.len(),
                self.size
            )));
        }
        let pubs = corpus
            .resolve(&self.members)
            .ok_or_else(|| invalid("member id not in corpus".into()))?;
        if !category_holds(self.category, &pubs) {
            return Err(invalid(format!("{} constraint violated", self.category)));
        }
        Ok(())
    }
}

/// Author keys (`last initial`) of a publication.
fn author_keys(p: &Publication) -> BTreeSet<String> {
    p.authors.iter().map(|a| PersonName::parse(a).key()).collect()
}

fn title_keys(p: &Publication) -> BTreeSet<String> {
    Stopwords::default_list()
        .content_tokens(&p.title)
        .into_iter()
        .collect()
}

fn venue_key(p: &Publication) -> (String, i32) {
    (p.venue.clone(), p.year)
}

/// Whether the members satisfy the category constraint.
pub fn category_holds(category: Category, members: &[&Publication]) -> bool {
    let Some((first, rest)) = members.split_first() else {
        return true;
    };
    match category {
        Category::Random => true,
        Category::Venue => rest.iter().all(|p| venue_key(p) == venue_key(first)),
        Category::Author => {
            let mut common = author_keys(first);
            for p in rest {
                let keys = author_keys(p);
                common.retain(|k| keys.contains(k));
            }
            !common.is_empty()
        }
        Category::Title => {
            let mut common = title_keys(first);
            for p in rest {
                let keys = title_keys(p);
                common.retain(|k| keys.contains(k));
            }
            !common.is_empty()
        }
    }
}

/// Corpus positions grouped by the category's shared key.
fn groups(corpus: &Corpus, category: Category) -> BTreeMap<String, Vec<usize>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, p) in corpus.iter().enumerate() {
        let keys: Vec<String> = match category {
            Category::Author => author_keys(p).into_iter().collect(),
            Category::Title => title_keys(p).into_iter().collect(),
            Category::Venue => {
                let (v, y) = venue_key(p);
                vec![format!("{y}\u{1f}{v}")]
            }
            Category::Random => vec![String::new()],
        };
        for k in keys {
            groups.entry(k).or_default().push(i);
        }
    }
    groups
}

/// Generates `|sizes| * |categories| * reps` datasets.
///
/// Cells are produced size-major, then category, then repetition. Each dataset
/// gets its own derived seed, so regenerating one cell never shifts another.
pub fn generate_datasets(
    corpus: &Corpus,
    sizes: &[usize],
    categories: &[Category],
    reps: usize,
    seed: u64,
) -> Result<Vec<Dataset>, CorpusError> {
    let mut out = Vec::with_capacity(sizes.len() * categories.len() * reps);
    for &category in categories {
        let groups = groups(corpus, category);
        for &size in sizes {
            let infeasible = |reason: &str| CorpusError::InfeasibleCell {
                category,
                size,
                reason: reason.to_string(),
            };
            if size == 0 {
                return Err(infeasible("size must be at least 1"));
            }
            if reps == 0 {
                return Err(infeasible("reps must be at least 1"));
            }
            let eligible: Vec<&Vec<usize>> =
                groups.values().filter(|g| g.len() >= size).collect();
            if eligible.is_empty() {
                let largest = groups.values().map(Vec::len).max().unwrap_or(0);
                return Err(infeasible(&format!(
                    "largest candidate group has {largest} publications"
                )));
            }
            let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
            for rep in 1..=reps {
                let id = format!("{}-{}-{}", category.as_str().to_lowercase(), size, rep);
                let ds_seed = seed::derive(seed, &id);
                let mut rng = seed::rng(ds_seed);
                let mut members = Vec::new();
                for _ in 0..DISTINCT_RETRIES {
                    let group = eligible[rng.random_range(0..eligible.len())];
                    let mut picked: Vec<usize> = sample(&mut rng, group.len(), size)
                        .into_iter()
                        .map(|j| group[j])
                        .collect();
                    picked.sort_unstable();
                    members = picked;
                    if !seen.contains(&members) {
                        break;
                    }
                }
                seen.insert(members.clone());
                out.push(Dataset {
                    id,
                    category,
                    size,
                    seed: ds_seed,
                    members: members
                        .into_iter()
                        .map(|i| corpus.publications()[i].id.clone())
                        .collect(),
                });
            }
        }
    }
    // size-major order reads naturally in reports
    out.sort_by_key(|d| {
        (
            sizes.iter().position(|&s| s == d.size),
            categories.iter().position(|&c| c == d.category),
        )
    });
    Ok(out)
}

pub fn write_datasets<'a>(
    mut w: impl Write,
    datasets: impl IntoIterator<Item = &'a Dataset>,
) -> io::Result<()> {
    writeln!(w, "format={DATASET_FORMAT}")?;
    for d in datasets {
        serde_json::to_writer(&mut w, d)?;
        writeln!(w)?;
    }
    w.flush()
}

pub fn save_datasets(datasets: &[Dataset], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
    write_datasets(io::BufWriter::new(file), datasets).map_err(|e| CorpusError::io(path, e))
}

pub fn parse_datasets(reader: impl BufRead) -> Result<Vec<Dataset>, CorpusError> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            check_header(Some(&line), DATASET_FORMAT)?;
            header_seen = true;
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

pub fn load_datasets(path: impl AsRef<Path>) -> Result<Vec<Dataset>, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    parse_datasets(io::BufReader::new(file))
}
