//! Tokenization, stopword lists and name parsing shared by the engine,
//! the generators and the matcher.
//!
//! All comparisons in this crate are case insensitive. A token is a maximal
//! run of alphanumeric characters; an apostrophe is kept when it sits between
//! two alphanumeric characters, so `don't` and `hitchhiker's` stay whole.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Splits `text` into lowercase tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02bc}')
}

/// Tokens of `text` joined by single spaces.
pub fn normalize(text: &str) -> String {
    tokenize(text).join(" ")
}

/// Identifier of the stopword list used when none is named.
pub const DEFAULT_STOPWORDS: &str = "default";

const DEFAULT_LIST: &[&str] = &[
    "a", "about", "after", "against", "all", "an", "and", "any", "are", "as", "at", "be",
    "been", "between", "both", "but", "by", "can", "do", "does", "for", "from", "has", "have",
    "how", "in", "into", "is", "it", "its", "not", "of", "on", "or", "our", "over", "so",
    "than", "that", "the", "their", "these", "this", "those", "through", "to", "toward",
    "towards", "under", "using", "via", "was", "we", "what", "when", "where", "which", "while",
    "why", "with", "within", "without",
];

/// A named, immutable stopword list.
#[derive(Debug, Clone)]
pub struct Stopwords {
    id: String,
    words: HashSet<String>,
}

impl Stopwords {
    /// Looks up a shipped list by id: `default` or `none`.
    pub fn by_id(id: &str) -> Option<&'static Stopwords> {
        static DEFAULT: OnceLock<Stopwords> = OnceLock::new();
        static NONE: OnceLock<Stopwords> = OnceLock::new();
        match id {
            DEFAULT_STOPWORDS => Some(DEFAULT.get_or_init(|| Stopwords::new(DEFAULT_STOPWORDS, DEFAULT_LIST.iter().copied()))),
            "none" => Some(NONE.get_or_init(|| Stopwords::new("none", std::iter::empty()))),
            _ => None,
        }
    }

    pub fn default_list() -> &'static Stopwords {
        Stopwords::by_id(DEFAULT_STOPWORDS).expect("default list is shipped")
    }

    pub fn new<'a>(id: &str, words: impl IntoIterator<Item = &'a str>) -> Self {
        Stopwords {
            id: id.to_string(),
            words: words.into_iter().map(str::to_lowercase).collect(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    /// Tokens of `text` with stopwords removed, order preserved.
    pub fn content_tokens(&self, text: &str) -> Vec<String> {
        tokenize(text)
            .into_iter()
            .filter(|t| !self.contains(t))
            .collect()
    }
}

/// A person name split into the parts the matcher compares.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PersonName {
    /// Lowercase final whitespace-separated token, outer punctuation stripped.
    pub last: String,
    /// Lowercase first character of the first token, if the name has two or more tokens.
    pub initial: Option<char>,
}

impl PersonName {
    pub fn parse(name: &str) -> Self {
        let parts: Vec<&str> = name.split_whitespace().collect();
        let last = parts
            .last()
            .map(|p| strip_outer_punct(p).to_lowercase())
            .unwrap_or_default();
        let initial = if parts.len() >= 2 {
            strip_outer_punct(parts[0])
                .chars()
                .next()
                .and_then(|c| c.to_lowercase().next())
        } else {
            None
        };
        PersonName { last, initial }
    }

    /// Two names agree when their last names are equal and their initials are
    /// equal; a name without an initial agrees on the last name alone.
    pub fn agrees(&self, other: &PersonName) -> bool {
        if self.last != other.last || self.last.is_empty() {
            return false;
        }
        match (self.initial, other.initial) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }

    /// `last initial` key, e.g. `smith j`; the last name alone when no initial.
    pub fn key(&self) -> String {
        match self.initial {
            Some(c) => format!("{} {}", self.last, c),
            None => self.last.clone(),
        }
    }
}

fn strip_outer_punct(s: &str) -> &str {
    s.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Lowercase full name with tokens joined by single spaces (`J. Smith` -> `j smith`).
pub fn normalize_name(name: &str) -> String {
    normalize(name)
}

/// Lowercase last name of `name`, as emitted in author queries.
pub fn last_name(name: &str) -> String {
    PersonName::parse(name).last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apostrophes_stay_inside_words() {
        assert_eq!(tokenize("Don't Panic!"), vec!["don't", "panic"]);
        assert_eq!(
            tokenize("The Hitchhiker's Guide to the Galaxy"),
            vec!["the", "hitchhiker's", "guide", "to", "the", "galaxy"]
        );
        assert_eq!(tokenize("'quoted' rock'n'roll'"), vec!["quoted", "rock'n'roll"]);
        assert_eq!(tokenize("it\u{2019}s"), vec!["it's"]);
    }

    #[test]
    fn splits_on_punctuation() {
        assert_eq!(
            tokenize("MOMA – A Mapping-based Object Matching System"),
            vec!["moma", "a", "mapping", "based", "object", "matching", "system"]
        );
        assert!(tokenize(" -- !! ").is_empty());
        assert_eq!(tokenize("XML2006 at VLDB"), vec!["xml2006", "at", "vldb"]);
    }

    #[test]
    fn default_stopwords() {
        let sw = Stopwords::default_list();
        assert_eq!(sw.content_tokens("The question to 42"), vec!["question", "42"]);
        assert_eq!(sw.content_tokens("Don't Panic!"), vec!["don't", "panic"]);
        assert!(Stopwords::by_id("none").unwrap().content_tokens("the").len() == 1);
        assert!(Stopwords::by_id("klingon").is_none());
        assert!((45..=70).contains(&DEFAULT_LIST.len()));
    }

    #[test]
    fn names() {
        let n = PersonName::parse("J. Smith");
        assert_eq!(n.last, "smith");
        assert_eq!(n.initial, Some('j'));
        assert_eq!(n.key(), "smith j");
        let bare = PersonName::parse("Smith");
        assert_eq!(bare.initial, None);
        assert!(bare.agrees(&n));
        assert!(!PersonName::parse("K. Smith").agrees(&n));
        assert_eq!(last_name("Jean-Luc van Dyke"), "dyke");
        assert_eq!(normalize_name("  John   SMITH "), "john smith");
    }
}
