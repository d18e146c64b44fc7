//! Token caches, posting lists and the matching kernels.

use std::collections::HashMap;

use super::caps::PredicateScope;
use super::query::{PatternItem, SearchValue};
use crate::corpus::{Attribute, Publication};
use crate::text::tokenize;

/// Tokenized view of one publication.
#[derive(Debug, Clone)]
pub(crate) struct DocTokens {
    authors: Vec<Vec<String>>,
    title: Vec<String>,
    year: i32,
    year_token: String,
    venue: Vec<String>,
    free: Vec<String>,
}

impl DocTokens {
    pub(crate) fn new(p: &Publication) -> Self {
        let authors: Vec<Vec<String>> = p.authors.iter().map(|a| tokenize(a)).collect();
        let title = tokenize(&p.title);
        let venue = tokenize(&p.venue);
        let year_token = p.year.to_string();
        let mut free: Vec<String> = authors.iter().flatten().cloned().collect();
        free.extend(title.iter().cloned());
        free.push(year_token.clone());
        free.extend(venue.iter().cloned());
        DocTokens {
            authors,
            title,
            year: p.year,
            year_token,
            venue,
            free,
        }
    }

    fn tokens_of(&self, scope: PredicateScope) -> Box<dyn Iterator<Item = &String> + '_> {
        match scope {
            PredicateScope::Free => Box::new(self.free.iter()),
            PredicateScope::Field(Attribute::Authors) => Box::new(self.authors.iter().flatten()),
            PredicateScope::Field(Attribute::Title) => Box::new(self.title.iter()),
            PredicateScope::Field(Attribute::Venue) => Box::new(self.venue.iter()),
            PredicateScope::Field(Attribute::Year) => Box::new(std::iter::once(&self.year_token)),
        }
    }

    /// Token sequences a sequence-level condition is tested against.
    fn sequences(&self, scope: PredicateScope) -> Vec<&[String]> {
        match scope {
            PredicateScope::Free => vec![&self.free],
            PredicateScope::Field(Attribute::Authors) => {
                self.authors.iter().map(Vec::as_slice).collect()
            }
            PredicateScope::Field(Attribute::Title) => vec![&self.title],
            PredicateScope::Field(Attribute::Venue) => vec![&self.venue],
            PredicateScope::Field(Attribute::Year) => vec![std::slice::from_ref(&self.year_token)],
        }
    }
}

/// A term compiled against its predicate scope.
#[derive(Debug, Clone)]
pub(crate) struct CompiledTerm {
    scope: PredicateScope,
    test: Test,
}

#[derive(Debug, Clone)]
enum Test {
    /// All tokens present anywhere in the scope.
    AllTokens(Vec<String>),
    /// Contiguous run in one sequence.
    Run(Vec<String>),
    /// Token-level equality with one whole sequence.
    Equal(Vec<String>),
    YearEquals(i32),
    Pattern(Vec<Option<String>>),
}

impl CompiledTerm {
    pub(crate) fn new(scope: PredicateScope, value: &SearchValue) -> Self {
        let test = match value {
            SearchValue::Keywords(words) => {
                Test::AllTokens(words.iter().flat_map(|w| tokenize(w)).collect())
            }
            SearchValue::Phrase(text) => Test::Run(tokenize(text)),
            SearchValue::Pattern(items) => Test::Pattern(
                items
                    .iter()
                    .map(|i| match i {
                        PatternItem::Wildcard => None,
                        PatternItem::Literal(l) => Some(tokenize(l).join(" ")),
                    })
                    .collect(),
            ),
            SearchValue::Value(v) => match scope {
                PredicateScope::Field(Attribute::Year) => match v.trim().parse::<i32>() {
                    Ok(y) => Test::YearEquals(y),
                    Err(_) => Test::Equal(tokenize(v)),
                },
                PredicateScope::Free => Test::Run(tokenize(v)),
                PredicateScope::Field(_) => Test::Equal(tokenize(v)),
            },
        };
        CompiledTerm { scope, test }
    }

    /// Tokens of which at least one must be present for a match.
    pub(crate) fn required_tokens(&self) -> Vec<String> {
        match &self.test {
            Test::AllTokens(t) | Test::Run(t) | Test::Equal(t) => t.clone(),
            Test::YearEquals(y) => vec![y.to_string()],
            Test::Pattern(items) => items.iter().flatten().cloned().collect(),
        }
    }

    pub(crate) fn scope(&self) -> PredicateScope {
        self.scope
    }

    pub(crate) fn matches(&self, doc: &DocTokens) -> bool {
        match &self.test {
            Test::AllTokens(words) => {
                if words.is_empty() {
                    return false;
                }
                let mut present: Vec<&String> = doc.tokens_of(self.scope).collect();
                present.sort_unstable();
                words.iter().all(|w| present.binary_search(&w).is_ok())
            }
            Test::Run(run) => {
                !run.is_empty()
                    && doc
                        .sequences(self.scope)
                        .iter()
                        .any(|s| contains_run(s, run))
            }
            Test::Equal(seq) => {
                !seq.is_empty()
                    && doc
                        .sequences(self.scope)
                        .iter()
                        .any(|s| s.iter().eq(seq.iter()))
            }
            Test::YearEquals(y) => match self.scope {
                PredicateScope::Field(Attribute::Year) => doc.year == *y,
                _ => false,
            },
            Test::Pattern(items) => doc
                .sequences(self.scope)
                .iter()
                .any(|s| pattern_matches(s, items)),
        }
    }
}

pub(crate) fn contains_run(seq: &[String], run: &[String]) -> bool {
    !run.is_empty() && run.len() <= seq.len() && seq.windows(run.len()).any(|w| w == run)
}

/// Literal tokens in order with exactly one arbitrary token per wildcard,
/// as a contiguous window of `seq`.
pub fn pattern_matches<S: AsRef<str>>(seq: &[S], items: &[Option<String>]) -> bool {
    if items.is_empty() || items.len() > seq.len() || items.iter().all(Option::is_none) {
        return false;
    }
    seq.windows(items.len()).any(|w| {
        w.iter()
            .zip(items)
            .all(|(t, i)| i.as_ref().is_none_or(|l| l == t.as_ref()))
    })
}

/// The searchable index of an engine: entities, static ranks and postings.
#[derive(Debug, Clone)]
pub struct EngineIndex {
    entries: Vec<Publication>,
    ranks: Vec<u32>,
    by_id: HashMap<String, u32>,
    pub(crate) docs: Vec<DocTokens>,
    postings: Postings,
}

#[derive(Debug, Clone, Default)]
struct Postings {
    authors: HashMap<String, Vec<u32>>,
    title: HashMap<String, Vec<u32>>,
    year: HashMap<String, Vec<u32>>,
    venue: HashMap<String, Vec<u32>>,
    free: HashMap<String, Vec<u32>>,
}

impl Postings {
    fn for_scope(&self, scope: PredicateScope) -> &HashMap<String, Vec<u32>> {
        match scope {
            PredicateScope::Free => &self.free,
            PredicateScope::Field(Attribute::Authors) => &self.authors,
            PredicateScope::Field(Attribute::Title) => &self.title,
            PredicateScope::Field(Attribute::Year) => &self.year,
            PredicateScope::Field(Attribute::Venue) => &self.venue,
        }
    }

    fn add(map: &mut HashMap<String, Vec<u32>>, token: &str, doc: u32) {
        let list = map.entry(token.to_string()).or_default();
        if list.last() != Some(&doc) {
            list.push(doc);
        }
    }
}

impl PartialEq for EngineIndex {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.ranks == other.ranks
    }
}

impl EngineIndex {
    /// Index whose static rank is the insertion order.
    pub fn from_publications(entries: Vec<Publication>) -> Self {
        let ranks = (0..entries.len() as u32).collect();
        Self::with_ranks(entries, ranks)
    }

    /// `ranks[i]` is the static rank of `entries[i]`; lower ranks first.
    pub fn with_ranks(entries: Vec<Publication>, ranks: Vec<u32>) -> Self {
        assert_eq!(entries.len(), ranks.len(), "one rank per entry");
        let mut by_id = HashMap::with_capacity(entries.len());
        let mut docs = Vec::with_capacity(entries.len());
        let mut postings = Postings::default();
        for (i, p) in entries.iter().enumerate() {
            let i = i as u32;
            let previous = by_id.insert(p.id.clone(), i);
            assert!(previous.is_none(), "duplicate index id {}", p.id);
            let doc = DocTokens::new(p);
            for t in doc.authors.iter().flatten() {
                Postings::add(&mut postings.authors, t, i);
            }
            for t in &doc.title {
                Postings::add(&mut postings.title, t, i);
            }
            Postings::add(&mut postings.year, &doc.year_token, i);
            for t in &doc.venue {
                Postings::add(&mut postings.venue, t, i);
            }
            for t in &doc.free {
                Postings::add(&mut postings.free, t, i);
            }
            docs.push(doc);
        }
        EngineIndex {
            entries,
            ranks,
            by_id,
            docs,
            postings,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Publication> {
        self.by_id.get(id).map(|&i| &self.entries[i as usize])
    }

    pub fn position(&self, id: &str) -> Option<u32> {
        self.by_id.get(id).copied()
    }

    pub fn entity(&self, pos: u32) -> &Publication {
        &self.entries[pos as usize]
    }

    pub fn static_rank(&self, pos: u32) -> u32 {
        self.ranks[pos as usize]
    }

    pub fn publications(&self) -> impl Iterator<Item = &Publication> {
        self.entries.iter()
    }

    /// Entities satisfying `term`, ascending by position.
    pub(crate) fn term_candidates(&self, term: &CompiledTerm) -> Vec<u32> {
        let postings = self.postings.for_scope(term.scope());
        let required = term.required_tokens();
        let shortest = required
            .iter()
            .map(|t| postings.get(t).map_or(&[][..], Vec::as_slice))
            .min_by_key(|l| l.len());
        match shortest {
            Some(list) => list
                .iter()
                .copied()
                .filter(|&i| term.matches(&self.docs[i as usize]))
                .collect(),
            None => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn pattern_windows() {
        let title = seq("MOMA - A Mapping-based Object Matching System");
        let p = |items: &[&str]| -> Vec<Option<String>> {
            items
                .iter()
                .map(|s| (*s != "*").then(|| s.to_string()))
                .collect()
        };
        assert!(pattern_matches(&title, &p(&["moma", "*", "*", "*", "object"])));
        assert!(!pattern_matches(&title, &p(&["moma", "*", "*", "object"])));
        assert!(pattern_matches(&title, &p(&["matching", "*"])));
        assert!(!pattern_matches(&title, &p(&["system", "*"])));
        assert!(!pattern_matches(&title, &p(&["*"])));
    }

    #[test]
    fn authors_sequences_are_per_name() {
        let p = Publication::new("a", &["John Smith", "Mary Jones"], "t", 2000, "v");
        let doc = DocTokens::new(&p);
        let scope = PredicateScope::Field(Attribute::Authors);
        let t = |v: SearchValue| CompiledTerm::new(scope, &v).matches(&doc);
        assert!(t(SearchValue::keywords(["smith"])));
        assert!(t(SearchValue::keywords(["john", "jones"])));
        assert!(t(SearchValue::phrase("john smith")));
        assert!(!t(SearchValue::phrase("smith mary")));
        assert!(t(SearchValue::value("Mary Jones")));
        assert!(!t(SearchValue::value("Jones")));
    }
}
