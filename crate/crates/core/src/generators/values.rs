//! Search value generation: keywords, phrases, raw values, author last
//! names and wildcard title patterns.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Attribute, Corpus, Publication};
use crate::engine::{pattern_matches, PatternItem, SearchValue, ValueKind};
use crate::text::{last_name, tokenize, Stopwords, DEFAULT_STOPWORDS};

/// How a search value is derived from an attribute value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueGen {
    /// Tokens minus the stopword list with the given id.
    Keywords(String),
    Phrase,
    Pattern,
    /// Last name of one author, as keywords.
    GsAuthors,
    Value,
}

impl ValueGen {
    pub fn keywords() -> Self {
        ValueGen::Keywords(DEFAULT_STOPWORDS.to_string())
    }

    /// Kind of the produced search value.
    pub fn kind(&self) -> ValueKind {
        match self {
            ValueGen::Keywords(_) | ValueGen::GsAuthors => ValueKind::Keywords,
            ValueGen::Phrase => ValueKind::Phrase,
            ValueGen::Pattern => ValueKind::Pattern,
            ValueGen::Value => ValueKind::Value,
        }
    }

    pub fn applies_to(&self, attribute: Attribute) -> bool {
        use Attribute::*;
        match self {
            ValueGen::Keywords(_) => matches!(attribute, Title | Venue),
            ValueGen::Phrase | ValueGen::Pattern => attribute == Title,
            ValueGen::GsAuthors => attribute == Authors,
            ValueGen::Value => matches!(attribute, Year | Venue),
        }
    }
}

impl fmt::Display for ValueGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueGen::Keywords(list) => write!(f, "keywords:{list}"),
            ValueGen::Phrase => f.write_str("phrase"),
            ValueGen::Pattern => f.write_str("pattern"),
            ValueGen::GsAuthors => f.write_str("gs_authors"),
            ValueGen::Value => f.write_str("value"),
        }
    }
}

impl FromStr for ValueGen {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keywords" => Ok(ValueGen::keywords()),
            "phrase" => Ok(ValueGen::Phrase),
            "pattern" => Ok(ValueGen::Pattern),
            "gs_authors" => Ok(ValueGen::GsAuthors),
            "value" => Ok(ValueGen::Value),
            _ => match s.strip_prefix("keywords:") {
                Some(list) if Stopwords::by_id(list).is_some() => {
                    Ok(ValueGen::Keywords(list.to_string()))
                }
                Some(list) => Err(format!("unknown stopword list {list:?}")),
                None => Err(format!("unknown value generator {s:?}")),
            },
        }
    }
}

impl Serialize for ValueGen {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ValueGen {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Something noteworthy that happened while generating a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueFlag {
    /// Every token was a stopword; the full token list was used.
    StopwordFallback,
    /// Even the fully literal pattern matches several corpus titles.
    AmbiguousPattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub value: SearchValue,
    pub flag: Option<ValueFlag>,
}

impl Generated {
    fn plain(value: SearchValue) -> Self {
        Generated { value, flag: None }
    }
}

/// Keywords of `text` minus stopwords; all tokens if nothing remains.
pub fn keywords_of(text: &str, stopwords: &Stopwords) -> Generated {
    let content = stopwords.content_tokens(text);
    if content.is_empty() {
        Generated {
            value: SearchValue::Keywords(tokenize(text)),
            flag: Some(ValueFlag::StopwordFallback),
        }
    } else {
        Generated::plain(SearchValue::Keywords(content))
    }
}

/// Search value for `attribute` of `entity`.
///
/// `anchor_author` selects the author for `gs_authors`; without it the first
/// listed author is used.
pub fn gen_value(
    entity: &Publication,
    attribute: Attribute,
    generator: &ValueGen,
    anchor_author: Option<&str>,
    titles: &TitleContext,
) -> Generated {
    let text = match attribute {
        Attribute::Authors => entity.authors.first().cloned().unwrap_or_default(),
        Attribute::Title => entity.title.clone(),
        Attribute::Year => entity.year.to_string(),
        Attribute::Venue => entity.venue.clone(),
    };
    match generator {
        ValueGen::Keywords(list) => {
            let stopwords = Stopwords::by_id(list).unwrap_or_else(|| Stopwords::default_list());
            keywords_of(&text, stopwords)
        }
        ValueGen::Phrase => Generated::plain(SearchValue::phrase(text)),
        ValueGen::Value => Generated::plain(SearchValue::value(text)),
        ValueGen::GsAuthors => {
            let name = anchor_author.map(str::to_string).unwrap_or(text);
            Generated::plain(SearchValue::Keywords(vec![last_name(&name)]))
        }
        ValueGen::Pattern => gen_pattern(&entity.title, titles),
    }
}

/// Tokenized corpus titles with per-token postings, for pattern search.
#[derive(Debug, Clone, Default)]
pub struct TitleContext {
    titles: Vec<Vec<String>>,
    postings: HashMap<String, Vec<u32>>,
}

impl TitleContext {
    pub fn new(corpus: &Corpus) -> Self {
        Self::from_titles(corpus.iter().map(|p| p.title.as_str()))
    }

    pub fn from_titles<'a>(titles: impl IntoIterator<Item = &'a str>) -> Self {
        let mut ctx = TitleContext::default();
        for (i, t) in titles.into_iter().enumerate() {
            let tokens = tokenize(t);
            for tok in &tokens {
                let list = ctx.postings.entry(tok.clone()).or_default();
                if list.last() != Some(&(i as u32)) {
                    list.push(i as u32);
                }
            }
            ctx.titles.push(tokens);
        }
        ctx
    }

    pub fn len(&self) -> usize {
        self.titles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.titles.is_empty()
    }

    /// Number of corpus titles containing `token`.
    pub fn document_frequency(&self, token: &str) -> usize {
        self.postings.get(token).map_or(0, Vec::len)
    }

    /// Corpus titles matched by `items`, counting at most `limit`.
    pub fn count_matches(&self, items: &[Option<String>], limit: usize) -> usize {
        let rarest = items
            .iter()
            .flatten()
            .map(|t| self.postings.get(t).map_or(&[][..], Vec::as_slice))
            .min_by_key(|l| l.len());
        let Some(candidates) = rarest else {
            return 0;
        };
        candidates
            .iter()
            .filter(|&&i| pattern_matches(&self.titles[i as usize], items))
            .take(limit)
            .count()
    }

    /// Exhaustive count without postings; used to cross-check.
    pub fn scan_matches(&self, items: &[Option<String>]) -> usize {
        self.titles.iter().filter(|t| pattern_matches(t, items)).count()
    }
}

/// Pattern over `tokens` keeping the `literal` positions, trimmed to the
/// span between the first and last literal.
fn pattern_items(tokens: &[String], literal: &[bool]) -> Vec<Option<String>> {
    let Some(first) = literal.iter().position(|&l| l) else {
        return Vec::new();
    };
    let last = literal.iter().rposition(|&l| l).unwrap_or(first);
    (first..=last)
        .map(|i| literal[i].then(|| tokens[i].clone()))
        .collect()
}

/// Wildcard pattern identifying `title` among the corpus titles.
///
/// Tokens become literal in ascending document frequency (leftmost first
/// on ties) until the pattern matches a single title. A final pass drops
/// literals that turned out redundant, most frequent first.
pub fn gen_pattern(title: &str, titles: &TitleContext) -> Generated {
    let tokens = tokenize(title);
    let mut order: Vec<usize> = (0..tokens.len()).collect();
    order.sort_by_key(|&i| (titles.document_frequency(&tokens[i]), i));

    let unique = |literal: &[bool]| titles.count_matches(&pattern_items(&tokens, literal), 2) <= 1;
    let mut literal = vec![false; tokens.len()];
    let mut added = Vec::new();
    let mut found = false;
    for &i in &order {
        literal[i] = true;
        added.push(i);
        if unique(&literal) {
            found = true;
            break;
        }
    }
    if !found {
        return Generated {
            value: to_value(&tokens, &vec![true; tokens.len()]),
            flag: Some(ValueFlag::AmbiguousPattern),
        };
    }
    for &i in added.iter().rev() {
        if added.len() > 1 && literal.iter().filter(|&&l| l).count() > 1 {
            literal[i] = false;
            if !unique(&literal) {
                literal[i] = true;
            }
        }
    }
    Generated::plain(to_value(&tokens, &literal))
}

fn to_value(tokens: &[String], literal: &[bool]) -> SearchValue {
    SearchValue::pattern(
        pattern_items(tokens, literal)
            .into_iter()
            .map(|i| i.unwrap_or_else(|| "*".to_string())),
    )
}

/// `SearchValue::Pattern` back into matcher items.
pub fn pattern_of(value: &SearchValue) -> Option<Vec<Option<String>>> {
    match value {
        SearchValue::Pattern(items) => Some(
            items
                .iter()
                .map(|i| match i {
                    PatternItem::Wildcard => None,
                    PatternItem::Literal(l) => Some(l.clone()),
                })
                .collect(),
        ),
        _ => None,
    }
}
