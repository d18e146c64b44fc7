//! Derivation of a noisy search-engine index from a clean corpus.
//!
//! The index keeps one faithful copy of every retained source publication,
//! adds perturbed duplicates, drops part of the older literature and mixes in
//! unrelated distractor entries. Every derived entry remembers its source.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, Publication, MAX_YEAR, MIN_YEAR};
use crate::engine::EngineIndex;
use crate::seed;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseProfile {
    pub duplicate_probability: f64,
    pub max_duplicates: u32,
    /// Expected character edits per 100 title characters in a duplicate.
    pub title_typo_rate: f64,
    pub author_misspell_probability: f64,
    pub year_shift_probability: f64,
    pub drop_cutoff_year: i32,
    pub drop_probability_old: f64,
    pub distractor_count: usize,
    pub seed: u64,
}

impl Default for NoiseProfile {
    /// Illustrative defaults; not calibrated against any live engine.
    fn default() -> Self {
        NoiseProfile {
            duplicate_probability: 0.3,
            max_duplicates: 2,
            title_typo_rate: 1.0,
            author_misspell_probability: 0.2,
            year_shift_probability: 0.1,
            drop_cutoff_year: 1995,
            drop_probability_old: 0.6,
            distractor_count: 2000,
            seed: 0,
        }
    }
}

impl NoiseProfile {
    /// No duplicates, no drops, no distractors: the index equals the corpus.
    pub fn zero() -> Self {
        NoiseProfile {
            duplicate_probability: 0.0,
            max_duplicates: 0,
            title_typo_rate: 0.0,
            author_misspell_probability: 0.0,
            year_shift_probability: 0.0,
            drop_cutoff_year: MIN_YEAR,
            drop_probability_old: 0.0,
            distractor_count: 0,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let probs = [
            ("duplicate_probability", self.duplicate_probability),
            ("author_misspell_probability", self.author_misspell_probability),
            ("year_shift_probability", self.year_shift_probability),
            ("drop_probability_old", self.drop_probability_old),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(CorpusError::InvalidProfile(format!(
                    "{name} = {p} is not in [0,1]"
                )));
            }
        }
        if !(self.title_typo_rate >= 0.0 && self.title_typo_rate.is_finite()) {
            return Err(CorpusError::InvalidProfile(
                "title_typo_rate must be a non-negative number".into(),
            ));
        }
        Ok(())
    }
}

/// Index entity id -> source publication id (`None` for distractors).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexProvenance {
    entries: Vec<(String, Option<String>)>,
    by_entity: HashMap<String, usize>,
    by_source: HashMap<String, Vec<usize>>,
}

impl IndexProvenance {
    pub fn new(entries: Vec<(String, Option<String>)>) -> Self {
        let mut by_entity = HashMap::with_capacity(entries.len());
        let mut by_source: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, (entity, source)) in entries.iter().enumerate() {
            by_entity.insert(entity.clone(), i);
            if let Some(s) = source {
                by_source.entry(s.clone()).or_default().push(i);
            }
        }
        IndexProvenance {
            entries,
            by_entity,
            by_source,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_of(&self, entity: &str) -> Option<&str> {
        self.by_entity
            .get(entity)
            .and_then(|&i| self.entries[i].1.as_deref())
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.by_entity.contains_key(entity)
    }

    /// Index entity ids derived from `source`, in index order.
    pub fn derived_from<'a>(&'a self, source: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.by_source
            .get(source)
            .into_iter()
            .flatten()
            .map(|&i| self.entries[i].0.as_str())
    }

    pub fn distractor_count(&self) -> usize {
        self.entries.iter().filter(|(_, s)| s.is_none()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.entries.iter().map(|(e, s)| (e.as_str(), s.as_deref()))
    }
}

struct Pending {
    publication: Publication,
    source: Option<String>,
    popularity: f64,
}

/// Builds the engine index for `corpus` under `profile`.
///
/// Static ranks follow a seeded pseudo-popularity: faithful entries draw from
/// `[0,1)`, duplicates from `[0,0.5)` and distractors from `[0,0.4)`.
pub fn build_index(
    corpus: &Corpus,
    profile: &NoiseProfile,
) -> Result<(EngineIndex, IndexProvenance), CorpusError> {
    profile.validate()?;
    let mut rng = seed::rng(profile.seed);
    let mut pending: Vec<Pending> = Vec::with_capacity(corpus.len());

    for source in corpus {
        if source.year < profile.drop_cutoff_year
            && profile.drop_probability_old > 0.0
            && rng.random::<f64>() < profile.drop_probability_old
        {
            continue;
        }
        pending.push(Pending {
            publication: source.clone(),
            source: Some(source.id.clone()),
            popularity: rng.random::<f64>(),
        });
        let copies = if profile.max_duplicates > 0
            && profile.duplicate_probability > 0.0
            && rng.random::<f64>() < profile.duplicate_probability
        {
            rng.random_range(1..=profile.max_duplicates)
        } else {
            0
        };
        for k in 1..=copies {
            let mut dup = source.clone();
            dup.id = format!("{}~{}", source.id, k);
            perturb(&mut dup, profile, &mut rng);
            pending.push(Pending {
                publication: dup,
                source: Some(source.id.clone()),
                popularity: 0.5 * rng.random::<f64>(),
            });
        }
    }

    if profile.distractor_count > 0 && !corpus.is_empty() {
        let tables = FrequencyTables::new(corpus);
        let taken: HashSet<&str> = pending.iter().map(|p| p.publication.id.as_str()).collect();
        let mut ids = Vec::with_capacity(profile.distractor_count);
        let mut n = 0usize;
        while ids.len() < profile.distractor_count {
            let id = format!("x{n}");
            n += 1;
            if !taken.contains(id.as_str()) {
                ids.push(id);
            }
        }
        for id in ids {
            let publication = tables.distractor(id, &mut rng);
            pending.push(Pending {
                publication,
                source: None,
                popularity: 0.4 * rng.random::<f64>(),
            });
        }
    }

    let mut order: Vec<usize> = (0..pending.len()).collect();
    order.sort_by(|&a, &b| {
        pending[b]
            .popularity
            .total_cmp(&pending[a].popularity)
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0u32; pending.len()];
    for (rank, &i) in order.iter().enumerate() {
        ranks[i] = rank as u32;
    }

    let provenance = IndexProvenance::new(
        pending
            .iter()
            .map(|p| (p.publication.id.clone(), p.source.clone()))
            .collect(),
    );
    let index = EngineIndex::with_ranks(
        pending.into_iter().map(|p| p.publication).collect(),
        ranks,
    );
    Ok((index, provenance))
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

fn random_letter_except(rng: &mut impl Rng, not: char) -> char {
    loop {
        let c = ALPHABET[rng.random_range(0..ALPHABET.len())] as char;
        if !c.eq_ignore_ascii_case(&not) {
            return c;
        }
    }
}

fn perturb(p: &mut Publication, profile: &NoiseProfile, rng: &mut impl Rng) {
    let len = p.title.chars().count();
    let mean = profile.title_typo_rate * len as f64 / 100.0;
    if mean > 0.0 {
        let edits = Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0);
        let mut chars: Vec<char> = p.title.chars().collect();
        for _ in 0..edits {
            if chars.len() <= 1 {
                break;
            }
            let at = rng.random_range(0..chars.len());
            if rng.random_bool(0.5) {
                chars[at] = random_letter_except(rng, chars[at]);
            } else {
                chars.remove(at);
            }
        }
        p.title = chars.into_iter().collect();
    }
    if profile.author_misspell_probability > 0.0
        && rng.random::<f64>() < profile.author_misspell_probability
    {
        let which = rng.random_range(0..p.authors.len());
        p.authors[which] = misspell_last_name(&p.authors[which], rng);
    }
    if profile.year_shift_probability > 0.0 && rng.random::<f64>() < profile.year_shift_probability
    {
        let shifted = if rng.random_bool(0.5) { p.year + 1 } else { p.year - 1 };
        p.year = shifted.clamp(MIN_YEAR, MAX_YEAR);
    }
}

/// Replaces one letter of the final whitespace token; the first name is untouched.
fn misspell_last_name(name: &str, rng: &mut impl Rng) -> String {
    let start = name.trim_end().rfind(char::is_whitespace).map_or(0, |i| i + 1);
    let (head, last) = name.split_at(start);
    let mut chars: Vec<char> = last.chars().collect();
    let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_alphabetic()).collect();
    if letters.is_empty() {
        return name.to_string();
    }
    let at = letters[rng.random_range(0..letters.len())];
    let replacement = random_letter_except(rng, chars[at]);
    chars[at] = if chars[at].is_uppercase() {
        replacement.to_ascii_uppercase()
    } else {
        replacement
    };
    format!("{head}{}", chars.into_iter().collect::<String>())
}

/// Occurrence lists; sampling uniformly from them is frequency-weighted sampling.
struct FrequencyTables<'a> {
    title_tokens: Vec<String>,
    title_lengths: Vec<usize>,
    authors: Vec<&'a str>,
    author_counts: Vec<usize>,
    years: Vec<i32>,
    venues: Vec<&'a str>,
}

impl<'a> FrequencyTables<'a> {
    fn new(corpus: &'a Corpus) -> Self {
        let mut t = FrequencyTables {
            title_tokens: Vec::new(),
            title_lengths: Vec::new(),
            authors: Vec::new(),
            author_counts: Vec::new(),
            years: Vec::new(),
            venues: Vec::new(),
        };
        for p in corpus {
            let tokens = tokenize(&p.title);
            t.title_lengths.push(tokens.len().max(1));
            t.title_tokens.extend(tokens);
            t.authors.extend(p.authors.iter().map(String::as_str));
            t.author_counts.push(p.authors.len());
            t.years.push(p.year);
            t.venues.push(&p.venue);
        }
        t
    }

    fn distractor(&self, id: String, rng: &mut impl Rng) -> Publication {
        let pick = |rng: &mut dyn rand::RngCore, n: usize| rng.random_range(0..n);
        let n_tokens = self.title_lengths[pick(rng, self.title_lengths.len())];
        let mut words: Vec<String> = (0..n_tokens)
            .map(|_| self.title_tokens[pick(rng, self.title_tokens.len())].clone())
            .collect();
        if words.is_empty() {
            words.push("untitled".into());
        }
        if let Some(first) = words.first_mut() {
            let mut c = first.chars();
            if let Some(h) = c.next() {
                *first = h.to_uppercase().chain(c).collect();
            }
        }
        let n_authors = self.author_counts[pick(rng, self.author_counts.len())].max(1);
        let mut authors: Vec<String> = Vec::with_capacity(n_authors);
        for _ in 0..n_authors {
            let a = self.authors[pick(rng, self.authors.len())].to_string();
            if !authors.contains(&a) {
                authors.push(a);
            }
        }
        Publication {
            id,
            authors,
            title: words.join(" "),
            year: self.years[pick(rng, self.years.len())],
            venue: self.venues[pick(rng, self.venues.len())].to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::example_publications;
    use crate::corpus::synth::{generate_corpus, SynthConfig};

    fn table1() -> Corpus {
        Corpus::new(example_publications()).unwrap()
    }

    #[test]
    fn zero_profile_copies_corpus() {
        let corpus = generate_corpus(&SynthConfig::with_size(300), 2);
        let (index, prov) = build_index(&corpus, &NoiseProfile::zero()).unwrap();
        assert_eq!(index.len(), corpus.len());
        for (entry, source) in index.publications().zip(corpus.iter()) {
            assert_eq!(entry, source);
            assert_eq!(prov.source_of(&entry.id), Some(source.id.as_str()));
        }
        assert_eq!(prov.distractor_count(), 0);
    }

    #[test]
    fn one_exact_duplicate_each() {
        let profile = NoiseProfile {
            duplicate_probability: 1.0,
            max_duplicates: 1,
            ..NoiseProfile::zero()
        };
        let corpus = table1();
        let (index, prov) = build_index(&corpus, &profile).unwrap();
        assert_eq!(index.len(), 2 * corpus.len());
        for s in &corpus {
            let derived: Vec<_> = prov.derived_from(&s.id).collect();
            assert_eq!(derived.len(), 2);
            for id in derived {
                let e = index.get(id).unwrap();
                assert_eq!((&e.authors, &e.title, e.year, &e.venue), (&s.authors, &s.title, s.year, &s.venue));
            }
        }
    }

    #[test]
    fn old_entries_dropped() {
        let mut pubs = example_publications();
        pubs[0].year = 1990;
        let corpus = Corpus::new(pubs).unwrap();
        let profile = NoiseProfile {
            drop_probability_old: 1.0,
            drop_cutoff_year: 1995,
            ..NoiseProfile::zero()
        };
        let (index, prov) = build_index(&corpus, &profile).unwrap();
        assert!(prov.derived_from("s1").next().is_none());
        // s3 (1979) is also old
        assert_eq!(index.len(), 1);
        assert!(index.get("s2").is_some());
    }

    #[test]
    fn provenance_totality_and_determinism() {
        let corpus = generate_corpus(&SynthConfig::with_size(400), 9);
        let profile = NoiseProfile {
            distractor_count: 150,
            ..NoiseProfile::default()
        }
        .with_seed(4);
        let (index, prov) = build_index(&corpus, &profile).unwrap();
        assert_eq!(index.len(), prov.len());
        assert_eq!(prov.distractor_count(), 150);
        let derived = prov.iter().filter(|(_, s)| s.is_some()).count();
        assert_eq!(index.len(), derived + 150);
        for (entity, source) in prov.iter() {
            assert!(index.get(entity).is_some());
            if let Some(s) = source {
                assert!(corpus.get(s).is_some());
            }
        }
        let (again, prov2) = build_index(&corpus, &profile).unwrap();
        assert_eq!(index, again);
        assert_eq!(prov, prov2);
        let (other, _) = build_index(&corpus, &profile.clone().with_seed(5)).unwrap();
        assert_ne!(index, other);
    }

    #[test]
    fn misspelling_keeps_first_initial() {
        let mut rng = seed::rng(1);
        for _ in 0..50 {
            let m = misspell_last_name("John Smith", &mut rng);
            assert!(m.starts_with("John "));
            assert_ne!(m, "John Smith");
            assert_eq!(m.len(), "John Smith".len());
        }
        assert_eq!(misspell_last_name("X", &mut rng).len(), 1);
    }

    #[test]
    fn invalid_profile() {
        let p = NoiseProfile {
            duplicate_probability: 1.5,
            ..NoiseProfile::zero()
        };
        assert!(matches!(
            build_index(&table1(), &p),
            Err(CorpusError::InvalidProfile(_))
        ));
    }
}
